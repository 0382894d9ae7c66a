#include "derivdepth/pfm.hpp"

#include "derivdepth/binary_io.hpp"
#include "derivdepth/errors.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

namespace derivdepth {

namespace {

std::string next_token(const std::vector<unsigned char>& data, std::size_t& pos) {
    while (pos < data.size() && std::isspace(data[pos])) ++pos;
    std::string tok;
    while (pos < data.size() && !std::isspace(data[pos])) tok.push_back(static_cast<char>(data[pos++]));
    if (tok.empty()) throw FileFormatError("pfm: truncated header");
    return tok;
}

}  // namespace

ScalarField read_pfm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::size_t pos = 0;
    const std::string magic = next_token(data, pos);
    if (magic == "PF") throw FileFormatError("pfm: color maps are not supported");
    if (magic != "Pf") throw BadMagicError();

    int width = 0;
    int height = 0;
    double scale = 0.0;
    try {
        width = std::stoi(next_token(data, pos));
        height = std::stoi(next_token(data, pos));
        scale = std::stod(next_token(data, pos));
    } catch (const std::logic_error&) {
        throw FileFormatError("pfm: malformed header");
    }
    if (width <= 0 || height <= 0 || scale == 0.0) throw FileFormatError("pfm: malformed header");
    ++pos;  // single whitespace byte terminating the header

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (pos > data.size() || data.size() - pos < count * sizeof(float)) throw TruncatedPayloadError();

    const bool file_little = scale < 0.0;
    const bool swap = file_little != (std::endian::native == std::endian::little);
    ScalarField out(width, height);
    for (int row = 0; row < height; ++row) {
        for (int x = 0; x < width; ++x) {
            unsigned char raw[4];
            std::memcpy(raw, data.data() + pos, 4);
            pos += 4;
            if (swap) {
                std::swap(raw[0], raw[3]);
                std::swap(raw[1], raw[2]);
            }
            float v;
            std::memcpy(&v, raw, 4);
            out.at(x, height - 1 - row) = static_cast<double>(v);
        }
    }
    return out;
}

void write_pfm(const std::filesystem::path& path, const ScalarField& field) {
    if (field.empty()) throw std::invalid_argument("pfm: empty field");
    binio::Writer w;
    w.bytes("Pf\n" + std::to_string(field.width()) + " " + std::to_string(field.height()) + "\n-1.0\n");
    for (int row = field.height() - 1; row >= 0; --row) {
        for (int x = 0; x < field.width(); ++x) {
            w.f32(static_cast<float>(field.at(x, row)));
        }
    }
    w.save(path);
}

}  // namespace derivdepth
