#include "derivdepth/binary_io.hpp"

#include "derivdepth/errors.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace derivdepth::binio {

namespace {

template <typename T>
void put_le(std::vector<unsigned char>& buf, T value) {
    static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(raw, raw + sizeof(T));
    }
    buf.insert(buf.end(), raw, raw + sizeof(T));
}

template <typename T>
T get_le(const unsigned char* src) {
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, src, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(raw, raw + sizeof(T));
    }
    T value;
    std::memcpy(&value, raw, sizeof(T));
    return value;
}

}  // namespace

void Writer::bytes(std::string_view raw) { buf_.insert(buf_.end(), raw.begin(), raw.end()); }
void Writer::u32(std::uint32_t v) { put_le(buf_, v); }
void Writer::f32(float v) { put_le(buf_, v); }
void Writer::f64(double v) { put_le(buf_, v); }

void Writer::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Reader Reader::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return Reader(std::move(data));
}

void Reader::require(std::size_t n) const {
    if (remaining() < n) throw TruncatedPayloadError();
}

std::string Reader::bytes(std::size_t n) {
    require(n);
    std::string out(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return out;
}

std::uint32_t Reader::u32() {
    require(4);
    auto v = get_le<std::uint32_t>(data_.data() + pos_);
    pos_ += 4;
    return v;
}

float Reader::f32() {
    require(4);
    auto v = get_le<float>(data_.data() + pos_);
    pos_ += 4;
    return v;
}

double Reader::f64() {
    require(8);
    auto v = get_le<double>(data_.data() + pos_);
    pos_ += 8;
    return v;
}

}  // namespace derivdepth::binio
