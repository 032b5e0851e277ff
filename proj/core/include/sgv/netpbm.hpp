#pragma once

#include <filesystem>
#include <stdexcept>

#include "sgv/mask.hpp"

namespace sgv {

/// Malformed or truncated image file. The message names the byte offset
/// at which parsing failed.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Binary PBM (P4). Raster bit 1 maps to foreground.
binary_mask load_mask(const std::filesystem::path& path);
void save_mask(const std::filesystem::path& path, const binary_mask& m);

/// Binary PGM (P5), big-endian samples. Written with maxval 65535,
/// sample = round(p * 65535); any maxval in [1,65535] is accepted on
/// load and rescaled to [0,1].
prob_map load_probmap(const std::filesystem::path& path);
void save_probmap(const std::filesystem::path& path, const prob_map& p);

}  // namespace sgv
