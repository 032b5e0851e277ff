#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sgv {

/// Row-major boolean pixel grid. Foreground pixels hold 1.
struct binary_mask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;

    binary_mask() = default;
    binary_mask(int w, int h, bool fill = false)
        : width(w), height(h), bits(pixel_count(w, h), fill ? 1 : 0) {}

    bool at(int x, int y) const { return bits[index(x, y)] != 0; }
    void set(int x, int y, bool v) { bits[index(x, y)] = v ? 1 : 0; }

    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width && y >= 0 && y < height;
    }

    /// Number of foreground pixels.
    long long area() const {
        long long n = 0;
        for (auto b : bits) n += b != 0;
        return n;
    }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }

    bool operator==(const binary_mask&) const = default;

    static std::size_t pixel_count(int w, int h) {
        if (w < 1 || h < 1)
            throw std::invalid_argument("binary_mask: dimensions must be >= 1");
        return static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    }
};

/// Row-major real-valued pixel grid. Probability and weight maps keep
/// their values in [0,1]; distance fields and gradients do not.
struct real_grid {
    int width = 0;
    int height = 0;
    std::vector<double> values;

    real_grid() = default;
    real_grid(int w, int h, double fill = 0.0)
        : width(w), height(h), values(binary_mask::pixel_count(w, h), fill) {}

    double at(int x, int y) const { return values[index(x, y)]; }
    void set(int x, int y, double v) { values[index(x, y)] = v; }

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }

    bool operator==(const real_grid&) const = default;
};

/// Classifier output maps f1, f2, f_out and the first-round foreground
/// estimate. Values in [0,1].
using prob_map = real_grid;

/// Per-pixel prior p(k=foreground | I) gating the two conditional heads.
/// Values in [0,1].
using weight_map = real_grid;

/// Per-pixel feature vectors, row-major pixels with `dim` contiguous
/// channels each. Stand-in for whatever feature extractor feeds the
/// per-pixel classifier.
struct pixel_features {
    int width = 0;
    int height = 0;
    int dim = 0;
    std::vector<double> values;

    pixel_features() = default;
    pixel_features(int w, int h, int d)
        : width(w), height(h), dim(d),
          values(binary_mask::pixel_count(w, h) * check_dim(d), 0.0) {}

    std::span<const double> at(int x, int y) const {
        return {values.data() + pixel_offset(x, y), static_cast<std::size_t>(dim)};
    }
    std::span<double> at(int x, int y) {
        return {values.data() + pixel_offset(x, y), static_cast<std::size_t>(dim)};
    }

    std::size_t pixel_offset(int x, int y) const {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(dim);
    }

    static std::size_t check_dim(int d) {
        if (d < 1) throw std::invalid_argument("pixel_features: dim must be >= 1");
        return static_cast<std::size_t>(d);
    }
};

inline void require_same_size(int wa, int ha, int wb, int hb, const char* op) {
    if (wa != wb || ha != hb)
        throw std::invalid_argument(std::string(op) + ": dimension mismatch (" +
                                    std::to_string(wa) + "x" + std::to_string(ha) + " vs " +
                                    std::to_string(wb) + "x" + std::to_string(hb) + ")");
}

template <typename A, typename B>
void require_same_size(const A& a, const B& b, const char* op) {
    require_same_size(a.width, a.height, b.width, b.height, op);
}

}  // namespace sgv
