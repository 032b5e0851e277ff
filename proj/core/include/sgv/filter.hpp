#pragma once

#include "sgv/mask.hpp"

namespace sgv {

/// Separable Gaussian convolution, kernel radius ceil(3*sigma), kernel
/// normalized to sum 1, replicated borders. sigma = 0 returns the input
/// unchanged. Output clamped to [0,1].
real_grid gaussian_blur(const real_grid& p, double sigma);

/// Blur the 0/1 indicator of a mask.
real_grid gaussian_blur(const binary_mask& m, double sigma);

/// Foreground iff value > t (ties at exactly t go to background).
binary_mask threshold(const real_grid& p, double t);

}  // namespace sgv
