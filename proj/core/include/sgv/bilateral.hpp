#pragma once

#include "sgv/mask.hpp"

namespace sgv {

struct bilateral_config {
    double sigma_spatial = 8.0;
    double sigma_range = 0.1;  // guide-intensity units on the [0,1] scale
    int window_radius = 16;    // must be >= ceil(2 * sigma_spatial)
};

/// Joint bilateral filter: each output pixel is the average of input
/// pixels in the window, weighted by spatial distance and guide
/// similarity, normalized per pixel.
prob_map bilateral_filter(const prob_map& p, const real_grid& guide, const bilateral_config& cfg);

/// Threshold the refined probability map into the final mask.
binary_mask finalize(const prob_map& p, double t = 0.5);

/// Rec.601 luma of the first three feature channels, the guide used for
/// joint filtering. Single-channel features pass through as-is.
real_grid luminance(const pixel_features& features);

}  // namespace sgv
