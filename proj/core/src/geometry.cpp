#include "sgv/geometry.hpp"

#include <cmath>
#include <limits>

namespace sgv {

double iou(const binary_mask& a, const binary_mask& b) {
    require_same_size(a, b, "iou");
    long long inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) {
        const bool fa = a.bits[i] != 0, fb = b.bits[i] != 0;
        inter += fa && fb;
        uni += fa || fb;
    }
    if (uni == 0) return 1.0;  // empty vs empty: trivially correct prediction
    return static_cast<double>(inter) / static_cast<double>(uni);
}

binary_mask boundary(const binary_mask& m) {
    binary_mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y) {
        for (int x = 0; x < m.width; ++x) {
            if (!m.at(x, y)) continue;
            const bool edge =
                x == 0 || !m.at(x - 1, y) || x == m.width - 1 || !m.at(x + 1, y) ||
                y == 0 || !m.at(x, y - 1) || y == m.height - 1 || !m.at(x, y + 1);
            if (edge) out.set(x, y, true);
        }
    }
    return out;
}

namespace {

// Large finite pedestal for cells with no source; never survives the
// lower envelope when any finite parabola exists in the row/column.
constexpr double kFar = 1e20;

// 1-D squared-distance transform of a sampled function (Felzenszwalb &
// Huttenlocher). n values at stride `stride` starting at `f`.
void squared_dt_1d(const double* f, int* v, double* z, int n, int stride,
                   double* out, int out_stride) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        const double fq = f[q * stride];
        double s = ((fq + double(q) * q) - (f[v[k] * stride] + double(v[k]) * v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((fq + double(q) * q) - (f[v[k] * stride] + double(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = double(q) - v[k];
        out[q * out_stride] = dq * dq + f[v[k] * stride];
    }
}

}  // namespace

real_grid distance_transform(const binary_mask& m) {
    real_grid out(m.width, m.height);
    if (m.area() == 0) {
        std::fill(out.values.begin(), out.values.end(),
                  std::numeric_limits<double>::infinity());
        return out;
    }

    const int w = m.width, h = m.height;
    std::vector<double> sq(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = m.bits[i] ? 0.0 : kFar;

    const int n = std::max(w, h);
    std::vector<double> tmp(static_cast<std::size_t>(w) * h);
    std::vector<int> v(n);
    std::vector<double> z(n + 1);

    // columns, then rows
    for (int x = 0; x < w; ++x)
        squared_dt_1d(sq.data() + x, v.data(), z.data(), h, w, tmp.data() + x, w);
    for (int y = 0; y < h; ++y)
        squared_dt_1d(tmp.data() + static_cast<std::size_t>(y) * w, v.data(),
                      z.data(), w, 1, sq.data() + static_cast<std::size_t>(y) * w, 1);

    for (std::size_t i = 0; i < sq.size(); ++i) out.values[i] = std::sqrt(sq[i]);
    return out;
}

}  // namespace sgv
