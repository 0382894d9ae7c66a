#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace derivdepth::binio {

// Little-endian serialization used by the GMM1 and OWM1 formats.

class Writer {
public:
    void bytes(std::string_view raw);
    void u32(std::uint32_t v);
    void f32(float v);
    void f64(double v);

    const std::vector<unsigned char>& buffer() const { return buf_; }
    void save(const std::filesystem::path& path) const;

private:
    std::vector<unsigned char> buf_;
};

/// Bounds-checked cursor over a loaded file; overruns throw TruncatedPayloadError.
class Reader {
public:
    explicit Reader(std::vector<unsigned char> data) : data_(std::move(data)) {}
    static Reader load(const std::filesystem::path& path);

    std::string bytes(std::size_t n);
    std::uint32_t u32();
    float f32();
    double f64();

    std::size_t remaining() const { return data_.size() - pos_; }
    void require(std::size_t n) const;

private:
    std::vector<unsigned char> data_;
    std::size_t pos_ = 0;
};

}  // namespace derivdepth::binio
