#pragma once

#include "sgv/mask.hpp"

namespace sgv {

/// Intersection over union of two same-size masks. Both empty -> 1.0.
double iou(const binary_mask& a, const binary_mask& b);

/// Foreground pixels with at least one 4-neighbor that is background or
/// out of bounds.
binary_mask boundary(const binary_mask& m);

/// Exact Euclidean distance to the nearest foreground pixel, two-pass
/// parabola-envelope transform. Empty mask -> +infinity everywhere.
real_grid distance_transform(const binary_mask& m);

}  // namespace sgv
