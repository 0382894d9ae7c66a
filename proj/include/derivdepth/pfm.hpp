#pragma once

#include "derivdepth/field.hpp"

#include <filesystem>

namespace derivdepth {

/// Reads a grayscale ("Pf") portable float map. Either byte order is accepted;
/// rows are stored bottom-to-top in the file and returned top-to-bottom.
ScalarField read_pfm(const std::filesystem::path& path);

/// Writes a grayscale little-endian PFM (scale -1.0). Values are narrowed to float.
void write_pfm(const std::filesystem::path& path, const ScalarField& field);

}  // namespace derivdepth
