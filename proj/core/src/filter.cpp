#include "sgv/filter.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace sgv {

namespace {

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-(double(i) * i) / (2.0 * sigma * sigma));
        k[i + radius] = v;
        sum += v;
    }
    for (auto& v : k) v /= sum;
    return k;
}

}  // namespace

real_grid gaussian_blur(const real_grid& p, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_blur: sigma must be >= 0");
    if (sigma == 0.0) return p;

    const auto kernel = gaussian_kernel(sigma);
    const int radius = (static_cast<int>(kernel.size()) - 1) / 2;
    const int w = p.width, h = p.height;

    real_grid tmp(w, h), out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xi = std::clamp(x + i, 0, w - 1);
                acc += kernel[i + radius] * p.at(xi, y);
            }
            tmp.set(x, y, acc);
        }
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yi = std::clamp(y + i, 0, h - 1);
                acc += kernel[i + radius] * tmp.at(x, yi);
            }
            out.set(x, y, std::clamp(acc, 0.0, 1.0));
        }
    }
    return out;
}

real_grid gaussian_blur(const binary_mask& m, double sigma) {
    real_grid indicator(m.width, m.height);
    for (std::size_t i = 0; i < m.bits.size(); ++i)
        indicator.values[i] = m.bits[i] ? 1.0 : 0.0;
    return gaussian_blur(indicator, sigma);
}

binary_mask threshold(const real_grid& p, double t) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("threshold: t must be in [0,1]");
    binary_mask out(p.width, p.height);
    for (std::size_t i = 0; i < p.values.size(); ++i)
        out.bits[i] = p.values[i] > t ? 1 : 0;
    return out;
}

}  // namespace sgv
