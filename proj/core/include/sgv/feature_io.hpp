#pragma once

#include <filesystem>

#include "sgv/mask.hpp"

namespace sgv {

/// Versioned little-endian binary feature grid (magic "SGVF"): header
/// magic, format version, width, height, dim as u32, then
/// width*height*dim float64 samples, pixel-major.
void save_features(const std::filesystem::path& path, const pixel_features& features);
pixel_features load_features(const std::filesystem::path& path);

}  // namespace sgv
