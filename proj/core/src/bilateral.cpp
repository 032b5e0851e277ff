#include "sgv/bilateral.hpp"

#include <cmath>
#include <vector>

#include "sgv/filter.hpp"

namespace sgv {

prob_map bilateral_filter(const prob_map& p, const real_grid& guide,
                          const bilateral_config& cfg) {
    require_same_size(p, guide, "bilateral_filter");
    if (cfg.sigma_spatial <= 0.0 || cfg.sigma_range <= 0.0)
        throw std::invalid_argument("bilateral_filter: sigmas must be > 0");
    if (cfg.window_radius < static_cast<int>(std::ceil(2.0 * cfg.sigma_spatial)))
        throw std::invalid_argument("bilateral_filter: window_radius < ceil(2*sigma_spatial)");

    const int w = p.width, h = p.height, r = cfg.window_radius;
    const double inv_2ss = 1.0 / (2.0 * cfg.sigma_spatial * cfg.sigma_spatial);
    const double inv_2sr = 1.0 / (2.0 * cfg.sigma_range * cfg.sigma_range);

    // spatial weights are shift-invariant; precompute the window
    std::vector<double> spatial((2 * r + 1) * (2 * r + 1));
    for (int dy = -r; dy <= r; ++dy)
        for (int dx = -r; dx <= r; ++dx)
            spatial[(dy + r) * (2 * r + 1) + (dx + r)] =
                std::exp(-(double(dx) * dx + double(dy) * dy) * inv_2ss);

    prob_map out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double g0 = guide.at(x, y);
            double num = 0.0, den = 0.0;
            const int y0 = std::max(0, y - r), y1 = std::min(h - 1, y + r);
            const int x0 = std::max(0, x - r), x1 = std::min(w - 1, x + r);
            for (int yy = y0; yy <= y1; ++yy) {
                for (int xx = x0; xx <= x1; ++xx) {
                    const double dg = guide.at(xx, yy) - g0;
                    const double wgt = spatial[(yy - y + r) * (2 * r + 1) + (xx - x + r)] *
                                       std::exp(-dg * dg * inv_2sr);
                    num += wgt * p.at(xx, yy);
                    den += wgt;
                }
            }
            out.set(x, y, num / den);
        }
    }
    return out;
}

binary_mask finalize(const prob_map& p, double t) { return threshold(p, t); }

real_grid luminance(const pixel_features& features) {
    real_grid out(features.width, features.height);
    for (int y = 0; y < features.height; ++y) {
        for (int x = 0; x < features.width; ++x) {
            const auto fv = features.at(x, y);
            double v;
            if (features.dim >= 3)
                v = 0.299 * fv[0] + 0.587 * fv[1] + 0.114 * fv[2];
            else
                v = fv[0];
            out.set(x, y, v);
        }
    }
    return out;
}

}  // namespace sgv
