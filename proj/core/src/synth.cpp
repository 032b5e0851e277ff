#include "sgv/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <vector>

#include <json.hpp>

#include "sgv/feature_io.hpp"
#include "sgv/mask.hpp"
#include "sgv/netpbm.hpp"

namespace sgv {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Deterministic draws on top of mt19937_64; std::*_distribution output is
// implementation-defined, these are not.
struct rng_stream {
    std::mt19937_64 gen;

    explicit rng_stream(std::uint64_t seed) : gen(seed) {}

    double uniform() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    double normal(double sigma) {
        const double u1 = 1.0 - uniform();  // (0,1]
        const double u2 = uniform();
        return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
    int uniform_int(int lo, int hi) {  // inclusive
        return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

struct rgb {
    double r, g, b;
};

rgb lerp(const rgb& a, const rgb& b, double t) {
    return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

binary_mask disc_mask(int size, double cx, double cy, double radius) {
    binary_mask m(size, size);
    const double r2 = radius * radius;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy <= r2) m.set(x, y, true);
        }
    return m;
}

binary_mask dilate(const binary_mask& m) {
    binary_mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            const bool v = m.at(x, y) || (x > 0 && m.at(x - 1, y)) ||
                           (x + 1 < m.width && m.at(x + 1, y)) || (y > 0 && m.at(x, y - 1)) ||
                           (y + 1 < m.height && m.at(x, y + 1));
            out.set(x, y, v);
        }
    return out;
}

binary_mask erode(const binary_mask& m) {
    binary_mask out(m.width, m.height);
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) {
            const bool v = m.at(x, y) && (x == 0 || m.at(x - 1, y)) &&
                           (x + 1 == m.width || m.at(x + 1, y)) && (y == 0 || m.at(x, y - 1)) &&
                           (y + 1 == m.height || m.at(x, y + 1));
            out.set(x, y, v);
        }
    return out;
}

binary_mask perturb_mask(const binary_mask& m, int steps) {
    binary_mask out = m;
    for (int i = 0; i < steps; ++i) out = dilate(out);
    for (int i = 0; i < -steps; ++i) out = erode(out);
    return out;
}

std::string frame_name(int frame) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", frame);
    return buf;
}

struct proposal_record {
    std::string mask_file;
    std::string category;
    double confidence;
    std::string instance_id;
};

}  // namespace

void generate_dataset(const synthetic_config& cfg, const std::filesystem::path& out_root) {
    if (cfg.num_sequences < 1 || cfg.frames_per_sequence < 1)
        throw std::invalid_argument("generate_dataset: counts must be >= 1");
    if (cfg.image_size < 16)
        throw std::invalid_argument("generate_dataset: image_size must be >= 16");
    if (cfg.appearance_change_frame_fraction <= 0.0 ||
        cfg.appearance_change_frame_fraction >= 1.0)
        throw std::invalid_argument(
            "generate_dataset: appearance_change_frame_fraction must be in (0,1)");
    if (cfg.noise_sigma < 0.0)
        throw std::invalid_argument("generate_dataset: noise_sigma must be >= 0");

    const int size = cfg.image_size;
    const int frames = cfg.frames_per_sequence;
    const double radius = size / 7.0;
    const int change_frame =
        static_cast<int>(std::floor(cfg.appearance_change_frame_fraction * frames));
    const int distractor_entry = std::max(1, static_cast<int>(std::floor(0.3 * frames)));

    const rgb bg_color{0.30, 0.55, 0.30};
    const rgb fg_color{0.75, 0.25, 0.25};
    const rgb other_color{0.25, 0.35, 0.75};

    std::filesystem::create_directories(out_root / "sequences");
    nlohmann::json attributes = nlohmann::json::object();

    for (int s = 0; s < cfg.num_sequences; ++s) {
        char seq_name[16];
        std::snprintf(seq_name, sizeof(seq_name), "seq%03d", s);
        const auto seq_dir = out_root / "sequences" / seq_name;
        std::filesystem::create_directories(seq_dir / "features");
        std::filesystem::create_directories(seq_dir / "gt");
        std::filesystem::create_directories(seq_dir / "proposals");

        rng_stream rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(s)));

        // static texture phases and motion parameters for this sequence
        const double phase1 = rng.uniform(0.0, 2.0 * kPi);
        const double phase2 = rng.uniform(0.0, 2.0 * kPi);
        const double tex_fx = rng.uniform(5.0, 9.0);
        const double tex_fy = rng.uniform(5.0, 9.0);
        const double motion_phase = rng.uniform(0.0, 2.0 * kPi);
        const double motion_amp = 0.10 * size;
        const double cx0 = 0.38 * size + rng.uniform(-2.0, 2.0);
        const double cy0 = 0.50 * size + rng.uniform(-2.0, 2.0);

        double distractor_x = 0.85 * size;
        double distractor_y = rng.uniform(0.30, 0.70) * size;

        for (int t = 0; t < frames; ++t) {
            const bool changed = t >= change_frame;
            const rgb target_color = changed ? lerp(fg_color, bg_color, 0.5) : fg_color;
            const rgb distractor_color =
                cfg.distractors == distractor_policy::same_appearance ? target_color : other_color;

            // smooth drift, clamped away from the borders
            const double theta = 2.0 * kPi * t / frames + motion_phase;
            double cx = cx0 + motion_amp * std::sin(theta) + rng.normal(0.3);
            double cy = cy0 + motion_amp * 0.6 * std::cos(0.7 * theta) + rng.normal(0.3);
            cx = std::clamp(cx, radius + 2.0, size - radius - 3.0);
            cy = std::clamp(cy, radius + 2.0, size - radius - 3.0);

            const bool distractor_visible =
                cfg.distractors != distractor_policy::none && t >= distractor_entry;
            binary_mask distractor;
            if (distractor_visible) {
                distractor_x += rng.normal(0.4);
                distractor_y += rng.normal(0.4);
                const double lo = radius + 2.0, hi = size - radius - 3.0;
                distractor_x = std::clamp(distractor_x, lo, hi);
                distractor_y = std::clamp(distractor_y, lo, hi);
                // keep the two instances spatially distinct
                const double min_dist = std::max(2.0 * radius + 4.0, size / 2.8);
                const double dx = distractor_x - cx, dy = distractor_y - cy;
                const double dist = std::hypot(dx, dy);
                if (dist < min_dist && dist > 1e-9) {
                    distractor_x = std::clamp(cx + dx / dist * min_dist, lo, hi);
                    distractor_y = std::clamp(cy + dy / dist * min_dist, lo, hi);
                }
                if (std::hypot(distractor_x - cx, distractor_y - cy) < min_dist) {
                    // clamping ate the separation: take the farthest corner
                    double best = -1.0;
                    for (double fx : {lo, hi})
                        for (double fy : {lo, hi}) {
                            const double d = std::hypot(fx - cx, fy - cy);
                            if (d > best) {
                                best = d;
                                distractor_x = fx;
                                distractor_y = fy;
                            }
                        }
                }
                distractor = disc_mask(size, distractor_x, distractor_y, radius);
            }

            const binary_mask gt = disc_mask(size, cx, cy, radius);

            // render RGB image
            std::vector<rgb> image(static_cast<std::size_t>(size) * size);
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    rgb c = bg_color;
                    if (distractor_visible && distractor.at(x, y)) c = distractor_color;
                    if (gt.at(x, y)) c = target_color;
                    const double tex = 0.05 * std::sin(2.0 * kPi * x / tex_fx + phase1) *
                                       std::cos(2.0 * kPi * y / tex_fy + phase2);
                    c.r = std::clamp(c.r + tex + rng.normal(cfg.noise_sigma), 0.0, 1.0);
                    c.g = std::clamp(c.g + tex + rng.normal(cfg.noise_sigma), 0.0, 1.0);
                    c.b = std::clamp(c.b + tex + rng.normal(cfg.noise_sigma), 0.0, 1.0);
                    image[gt.index(x, y)] = c;
                }
            }

            // feature channels: RGB, normalized position, 3x3 local variance
            pixel_features features(size, size, 6);
            auto luma = [&image, size](int x, int y) {
                const rgb& c = image[static_cast<std::size_t>(y) * size + x];
                return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b;
            };
            for (int y = 0; y < size; ++y) {
                for (int x = 0; x < size; ++x) {
                    double mean = 0.0, mean_sq = 0.0;
                    for (int dy = -1; dy <= 1; ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            const double v = luma(std::clamp(x + dx, 0, size - 1),
                                                  std::clamp(y + dy, 0, size - 1));
                            mean += v;
                            mean_sq += v * v;
                        }
                    mean /= 9.0;
                    mean_sq /= 9.0;
                    const rgb& c = image[gt.index(x, y)];
                    auto fv = features.at(x, y);
                    fv[0] = c.r;
                    fv[1] = c.g;
                    fv[2] = c.b;
                    fv[3] = static_cast<double>(x) / size;
                    fv[4] = static_cast<double>(y) / size;
                    fv[5] = std::max(0.0, mean_sq - mean * mean);
                }
            }

            const std::string name = frame_name(t);
            save_features(seq_dir / "features" / (name + ".feat"), features);
            save_mask(seq_dir / "gt" / (name + ".pbm"), gt);

            // noisy-oracle proposals
            std::vector<proposal_record> records;
            auto emit_instance = [&](const binary_mask& inst, const std::string& category,
                                     const std::string& instance_id) {
                const int variants = cfg.noise_sigma > 0.0 ? 2 : 1;
                for (int v = 0; v < variants; ++v) {
                    int steps = 0;
                    double confidence = 0.9;
                    if (cfg.noise_sigma > 0.0) {
                        steps = std::clamp(
                            static_cast<int>(std::lround(rng.normal(cfg.noise_sigma * 14.0))), -2,
                            2);
                        confidence = std::clamp(
                            0.9 - 0.05 * std::abs(steps) + rng.normal(cfg.noise_sigma), 0.72, 0.99);
                    }
                    const binary_mask mask = perturb_mask(inst, steps);
                    const std::string file =
                        name + "_p" + std::to_string(records.size()) + ".pbm";
                    save_mask(seq_dir / "proposals" / file, mask);
                    records.push_back({file, category, confidence, instance_id});
                }
            };
            emit_instance(gt, "camel", "target");
            if (distractor_visible) emit_instance(distractor, "camel", "distractor");
            if (cfg.noise_sigma > 0.0) {
                // low-confidence junk blob, filtered out by the default threshold
                const double jx = rng.uniform(radius, size - radius);
                const double jy = rng.uniform(radius, size - radius);
                const binary_mask junk = disc_mask(size, jx, jy, size / 10.0);
                const std::string file = name + "_p" + std::to_string(records.size()) + ".pbm";
                save_mask(seq_dir / "proposals" / file, junk);
                records.push_back({file, "person", 0.25 + 0.1 * rng.uniform(), "junk"});
            }

            nlohmann::json manifest = nlohmann::json::array();
            for (const auto& r : records)
                manifest.push_back({{"mask_path", r.mask_file},
                                    {"category", r.category},
                                    {"confidence", r.confidence},
                                    {"instance_id", r.instance_id}});
            std::ofstream mout(seq_dir / "proposals" / (name + ".json"), std::ios::binary);
            if (!mout) throw io_error("cannot write proposal manifest for " + name);
            mout << manifest.dump(2) << "\n";
        }

        nlohmann::json codes = nlohmann::json::array();
        if (change_frame < frames) codes.push_back("AC");
        attributes[seq_name] = codes;
    }

    std::ofstream aout(out_root / "attributes.json", std::ios::binary);
    if (!aout) throw io_error("cannot write attributes.json");
    aout << attributes.dump(2) << "\n";
}

}  // namespace sgv
