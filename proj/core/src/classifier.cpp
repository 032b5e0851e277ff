#include "sgv/classifier.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "sgv/netpbm.hpp"

namespace sgv {

namespace {

constexpr double kProbClamp = 1e-7;

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double clamped(double p) {
    return std::min(std::max(p, kProbClamp), 1.0 - kProbClamp);
}

// d/dp of the clamped cross-entropy term; zero where the clamp is active.
double bce_dp(double p, double y) {
    if (p <= kProbClamp || p >= 1.0 - kProbClamp) return 0.0;
    return (p - y) / (p * (1.0 - p));
}

}  // namespace

std::size_t pixel_classifier::parameter_count() const {
    return static_cast<std::size_t>(hidden_units) * feature_dim + hidden_units +
           3 * (static_cast<std::size_t>(hidden_units) + 1);
}

std::vector<double> pixel_classifier::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    out.insert(out.end(), shared_weights.begin(), shared_weights.end());
    out.insert(out.end(), shared_bias.begin(), shared_bias.end());
    for (const head* h : {&head_fg_estimate, &head_f1, &head_f2}) {
        out.insert(out.end(), h->weights.begin(), h->weights.end());
        out.push_back(h->bias);
    }
    return out;
}

pixel_classifier pixel_classifier::unflatten(int feature_dim, int hidden_units,
                                             const std::vector<double>& params) {
    pixel_classifier c;
    c.feature_dim = feature_dim;
    c.hidden_units = hidden_units;
    if (params.size() != c.parameter_count())
        throw std::invalid_argument("pixel_classifier::unflatten: parameter count mismatch");
    auto it = params.begin();
    c.shared_weights.assign(it, it + static_cast<std::ptrdiff_t>(hidden_units) * feature_dim);
    it += static_cast<std::ptrdiff_t>(hidden_units) * feature_dim;
    c.shared_bias.assign(it, it + hidden_units);
    it += hidden_units;
    for (head* h : {&c.head_fg_estimate, &c.head_f1, &c.head_f2}) {
        h->weights.assign(it, it + hidden_units);
        it += hidden_units;
        h->bias = *it++;
    }
    return c;
}

forward_maps classifier_forward(const pixel_features& features, const pixel_classifier& params) {
    if (features.dim != params.feature_dim)
        throw std::invalid_argument("classifier_forward: feature dimension mismatch");

    const int w = features.width, h = features.height;
    const int hu = params.hidden_units, d = params.feature_dim;
    forward_maps out{prob_map(w, h), prob_map(w, h), prob_map(w, h)};

    std::vector<double> act(hu);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto fv = features.at(x, y);
            for (int j = 0; j < hu; ++j) {
                double z = params.shared_bias[j];
                const double* row = params.shared_weights.data() + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) z += row[k] * fv[k];
                act[j] = z > 0.0 ? z : 0.0;
            }
            const std::size_t i = out.f1.index(x, y);
            for (const auto& [hd, map] : {std::pair{&params.head_fg_estimate, &out.fg_estimate},
                                          std::pair{&params.head_f1, &out.f1},
                                          std::pair{&params.head_f2, &out.f2}}) {
                double logit = hd->bias;
                for (int j = 0; j < hu; ++j) logit += hd->weights[j] * act[j];
                map->values[i] = logistic(logit);
            }
        }
    }
    return out;
}

prob_map fuse_forward(const prob_map& f1, const prob_map& f2, const weight_map& w) {
    require_same_size(f1, f2, "fuse_forward");
    require_same_size(f1, w, "fuse_forward");
    prob_map out(f1.width, f1.height);
    for (std::size_t i = 0; i < out.values.size(); ++i)
        out.values[i] = w.values[i] * f1.values[i] + (1.0 - w.values[i]) * f2.values[i];
    return out;
}

fuse_gradients fuse_backward(const real_grid& g_top, const weight_map& w, const prob_map& f1,
                             const prob_map& f2) {
    require_same_size(g_top, w, "fuse_backward");
    require_same_size(g_top, f1, "fuse_backward");
    require_same_size(g_top, f2, "fuse_backward");
    fuse_gradients g{real_grid(g_top.width, g_top.height),
                     real_grid(g_top.width, g_top.height),
                     real_grid(g_top.width, g_top.height)};
    for (std::size_t i = 0; i < g_top.values.size(); ++i) {
        g.g1.values[i] = w.values[i] * g_top.values[i];
        g.g2.values[i] = (1.0 - w.values[i]) * g_top.values[i];
        g.g_w.values[i] = (f1.values[i] - f2.values[i]) * g_top.values[i];
    }
    return g;
}

double loss(const prob_map& f_out, const prob_map& fg_estimate, const binary_mask& gt,
            double lambda) {
    require_same_size(f_out, fg_estimate, "loss");
    require_same_size(f_out, gt, "loss");
    const double n = static_cast<double>(f_out.values.size());
    double fused = 0.0, side = 0.0;
    for (std::size_t i = 0; i < f_out.values.size(); ++i) {
        const double y = gt.bits[i] ? 1.0 : 0.0;
        const double p = clamped(f_out.values[i]);
        const double q = clamped(fg_estimate.values[i]);
        fused -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
        side -= y * std::log(q) + (1.0 - y) * std::log(1.0 - q);
    }
    return fused / n + lambda * side / n;
}

namespace {

// One frame's contribution to the loss gradient, scaled by `scale`
// (1 / frame count). Accumulates into grad, which is laid out like
// pixel_classifier::flatten().
void accumulate_frame_gradient(const pixel_classifier& params, const train_frame& frame,
                               double lambda, double scale, std::vector<double>& grad) {
    const int w = frame.features.width, h = frame.features.height;
    const int hu = params.hidden_units, d = params.feature_dim;
    if (frame.features.dim != d)
        throw std::invalid_argument("train: feature dimension mismatch");
    require_same_size(frame.features, frame.gt, "train");
    require_same_size(frame.features, frame.prior, "train");

    const std::size_t shared_w_off = 0;
    const std::size_t shared_b_off = static_cast<std::size_t>(hu) * d;
    const std::size_t head_off = shared_b_off + hu;
    const std::size_t head_stride = static_cast<std::size_t>(hu) + 1;

    const double inv_n = 1.0 / (static_cast<double>(w) * h);
    std::vector<double> z(hu), act(hu), dact(hu);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto fv = frame.features.at(x, y);
            for (int j = 0; j < hu; ++j) {
                double zj = params.shared_bias[j];
                const double* row = params.shared_weights.data() + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) zj += row[k] * fv[k];
                z[j] = zj;
                act[j] = zj > 0.0 ? zj : 0.0;
            }
            double logit_fg = params.head_fg_estimate.bias;
            double logit_f1 = params.head_f1.bias;
            double logit_f2 = params.head_f2.bias;
            for (int j = 0; j < hu; ++j) {
                logit_fg += params.head_fg_estimate.weights[j] * act[j];
                logit_f1 += params.head_f1.weights[j] * act[j];
                logit_f2 += params.head_f2.weights[j] * act[j];
            }
            const double p_fg = logistic(logit_fg);
            const double p1 = logistic(logit_f1);
            const double p2 = logistic(logit_f2);

            const double wv = frame.prior.at(x, y);
            const double fused = wv * p1 + (1.0 - wv) * p2;
            const double label = frame.gt.at(x, y) ? 1.0 : 0.0;

            // gradient from the top of the fusion layer
            const double g_top = scale * inv_n * bce_dp(clamped(fused), label) *
                                 (fused > kProbClamp && fused < 1.0 - kProbClamp ? 1.0 : 0.0);
            const double g1 = wv * g_top;
            const double g2 = (1.0 - wv) * g_top;
            const double g_side = scale * lambda * inv_n * bce_dp(clamped(p_fg), label) *
                                  (p_fg > kProbClamp && p_fg < 1.0 - kProbClamp ? 1.0 : 0.0);

            const double dlogit_f1 = g1 * p1 * (1.0 - p1);
            const double dlogit_f2 = g2 * p2 * (1.0 - p2);
            const double dlogit_fg = g_side * p_fg * (1.0 - p_fg);
            if (dlogit_f1 == 0.0 && dlogit_f2 == 0.0 && dlogit_fg == 0.0) continue;

            // heads: fg_estimate, f1, f2 in flatten order
            const double dlogits[3] = {dlogit_fg, dlogit_f1, dlogit_f2};
            const pixel_classifier::head* heads[3] = {&params.head_fg_estimate, &params.head_f1,
                                                      &params.head_f2};
            for (int j = 0; j < hu; ++j) dact[j] = 0.0;
            for (int t = 0; t < 3; ++t) {
                const double dl = dlogits[t];
                if (dl == 0.0) continue;
                double* hw = grad.data() + head_off + t * head_stride;
                for (int j = 0; j < hu; ++j) {
                    hw[j] += dl * act[j];
                    dact[j] += dl * heads[t]->weights[j];
                }
                hw[hu] += dl;  // head bias
            }
            for (int j = 0; j < hu; ++j) {
                if (z[j] <= 0.0 || dact[j] == 0.0) continue;  // ReLU gate
                const double dz = dact[j];
                double* row = grad.data() + shared_w_off + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) row[k] += dz * fv[k];
                grad[shared_b_off + j] += dz;
            }
        }
    }
}

double total_loss(const pixel_classifier& params, const std::vector<train_frame>& frames,
                  double lambda) {
    double sum = 0.0;
    for (const auto& frame : frames) {
        const auto maps = classifier_forward(frame.features, params);
        const auto fused = fuse_forward(maps.f1, maps.f2, frame.prior);
        sum += loss(fused, maps.fg_estimate, frame.gt, lambda);
    }
    return sum / static_cast<double>(frames.size());
}

}  // namespace

std::vector<double> parameter_gradients(const pixel_classifier& params,
                                        const std::vector<train_frame>& frames, double lambda) {
    if (frames.empty()) throw std::invalid_argument("parameter_gradients: no frames");
    std::vector<double> grad(params.parameter_count(), 0.0);
    const double scale = 1.0 / static_cast<double>(frames.size());
    for (const auto& frame : frames)
        accumulate_frame_gradient(params, frame, lambda, scale, grad);
    return grad;
}

train_result train(const std::vector<train_frame>& frames, const train_config& cfg,
                   train_stage stage, const pixel_classifier& init) {
    if (frames.empty()) throw std::invalid_argument("train: no frames");
    if (cfg.learning_rate <= 0.0) throw std::invalid_argument("train: learning_rate must be > 0");

    const int steps = stage == train_stage::pretrain ? cfg.pretrain_steps : cfg.finetune_steps;
    train_result result{init, {}};
    result.losses.reserve(static_cast<std::size_t>(std::max(steps, 0)) + 1);

    std::vector<double> params = init.flatten();
    for (int step = 0; step <= steps; ++step) {
        const double current = total_loss(result.params, frames, cfg.side_loss_weight);
        if (!std::isfinite(current))
            throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
        result.losses.push_back(current);
        if (step == steps) break;

        const auto grad = parameter_gradients(result.params, frames, cfg.side_loss_weight);
        for (std::size_t i = 0; i < params.size(); ++i)
            params[i] -= cfg.learning_rate * grad[i];
        result.params = pixel_classifier::unflatten(init.feature_dim, init.hidden_units, params);
    }
    return result;
}

pixel_classifier random_init(int feature_dim, const train_config& cfg) {
    pixel_classifier c;
    c.feature_dim = feature_dim;
    c.hidden_units = cfg.hidden_units;
    std::mt19937_64 rng(cfg.seed);
    auto draw = [&rng](double scale) {
        // uniform in (-scale, scale); avoids distribution portability issues
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        return (2.0 * u - 1.0) * scale;
    };
    const double ws = 1.0 / std::sqrt(static_cast<double>(feature_dim));
    c.shared_weights.resize(static_cast<std::size_t>(cfg.hidden_units) * feature_dim);
    for (auto& v : c.shared_weights) v = draw(ws);
    c.shared_bias.assign(cfg.hidden_units, 0.0);
    const double hs = 1.0 / std::sqrt(static_cast<double>(cfg.hidden_units));
    for (pixel_classifier::head* h : {&c.head_fg_estimate, &c.head_f1, &c.head_f2}) {
        h->weights.resize(cfg.hidden_units);
        for (auto& v : h->weights) v = draw(hs);
        h->bias = 0.0;
    }
    return c;
}

double grad_check(const pixel_classifier& params, const pixel_features& features,
                  const binary_mask& gt, const weight_map& w, double eps, double lambda) {
    if (eps <= 0.0) throw std::invalid_argument("grad_check: eps must be > 0");
    const std::vector<train_frame> frames{{features, gt, w}};
    const auto analytic = parameter_gradients(params, frames, lambda);

    std::vector<double> flat = params.flatten();
    double worst = 0.0;
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double saved = flat[i];
        flat[i] = saved + eps;
        const double hi = total_loss(
            pixel_classifier::unflatten(params.feature_dim, params.hidden_units, flat), frames,
            lambda);
        flat[i] = saved - eps;
        const double lo = total_loss(
            pixel_classifier::unflatten(params.feature_dim, params.hidden_units, flat), frames,
            lambda);
        flat[i] = saved;
        const double numeric = (hi - lo) / (2.0 * eps);
        const double denom = std::max({1.0, std::abs(analytic[i]), std::abs(numeric)});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
    }
    return worst;
}

prob_map predict_frame(const pixel_features& features, const pixel_classifier& params,
                       const weight_map& w) {
    const auto maps = classifier_forward(features, params);
    return fuse_forward(maps.f1, maps.f2, w);
}

namespace {

constexpr char kClassifierMagic[4] = {'S', 'G', 'V', 'C'};
constexpr std::uint32_t kClassifierVersion = 1;

void put_u32(std::ofstream& out, std::uint32_t v) {
    char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                 static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
    out.write(b, 4);
}

std::uint32_t get_u32(std::ifstream& in, const std::filesystem::path& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw io_error(path.string() + ": truncated header");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void put_f64(std::ofstream& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xFF);
    out.write(b, 8);
}

double get_f64(std::ifstream& in, const std::filesystem::path& path) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw io_error(path.string() + ": truncated parameter data");
    std::uint64_t u = 0;
    for (int i = 0; i < 8; ++i) u |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

void save_classifier(const std::filesystem::path& path, const pixel_classifier& params) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path.string() + ": cannot open for writing");
    out.write(kClassifierMagic, 4);
    put_u32(out, kClassifierVersion);
    put_u32(out, static_cast<std::uint32_t>(params.feature_dim));
    put_u32(out, static_cast<std::uint32_t>(params.hidden_units));
    for (double v : params.flatten()) put_f64(out, v);
    if (!out) throw io_error(path.string() + ": write failed");
}

pixel_classifier load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path.string() + ": cannot open");
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kClassifierMagic, 4) != 0)
        throw io_error(path.string() + ": bad magic, not a classifier parameter file");
    const auto version = get_u32(in, path);
    if (version != kClassifierVersion)
        throw io_error(path.string() + ": unsupported format version " + std::to_string(version));
    const int d = static_cast<int>(get_u32(in, path));
    const int hu = static_cast<int>(get_u32(in, path));
    if (d < 1 || hu < 1) throw io_error(path.string() + ": invalid dimensions");

    pixel_classifier c;
    c.feature_dim = d;
    c.hidden_units = hu;
    std::vector<double> flat(c.parameter_count());
    for (auto& v : flat) v = get_f64(in, path);
    return pixel_classifier::unflatten(d, hu, flat);
}

}  // namespace sgv
