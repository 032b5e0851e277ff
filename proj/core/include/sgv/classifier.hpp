#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sgv/mask.hpp"

namespace sgv {

/// Per-pixel appearance model: one shared hidden layer (ReLU) feeding
/// three logistic heads. head_f1 models p(i|I,k=fg), head_f2 models
/// p(i|I,k=bg), head_fg_estimate is the first-round foreground estimator
/// that drives semantic propagation.
struct pixel_classifier {
    struct head {
        std::vector<double> weights;  // hidden_units
        double bias = 0.0;
    };

    int feature_dim = 0;
    int hidden_units = 0;
    std::vector<double> shared_weights;  // hidden_units x feature_dim, row-major
    std::vector<double> shared_bias;     // hidden_units
    head head_fg_estimate, head_f1, head_f2;

    /// Total number of scalar parameters.
    std::size_t parameter_count() const;
    /// Flatten in declaration order: shared weights, shared bias, then
    /// each head's weights + bias (fg_estimate, f1, f2).
    std::vector<double> flatten() const;
    static pixel_classifier unflatten(int feature_dim, int hidden_units,
                                      const std::vector<double>& params);
};

struct train_config {
    double learning_rate = 1.0;
    int pretrain_steps = 500;
    int finetune_steps = 200;
    double side_loss_weight = 1.0;  // lambda
    std::uint64_t seed = 0;
    int hidden_units = 16;
};

enum class train_stage { pretrain, finetune };

struct forward_maps {
    prob_map fg_estimate;
    prob_map f1;
    prob_map f2;
};

/// Shared transform + three heads at every pixel; outputs strictly in (0,1).
forward_maps classifier_forward(const pixel_features& features, const pixel_classifier& params);

/// f_out = w*f1 + (1-w)*f2, elementwise.
prob_map fuse_forward(const prob_map& f1, const prob_map& f2, const weight_map& w);

struct fuse_gradients {
    real_grid g1;   // w * g_top
    real_grid g2;   // (1-w) * g_top
    real_grid g_w;  // (f1-f2) * g_top, exposed for diagnostics only
};

fuse_gradients fuse_backward(const real_grid& g_top, const weight_map& w, const prob_map& f1,
                             const prob_map& f2);

/// Mean binary cross-entropy of f_out against gt plus lambda times the
/// mean cross-entropy of the first-round estimate; probabilities clamped
/// to [1e-7, 1-1e-7] before the logarithms.
double loss(const prob_map& f_out, const prob_map& fg_estimate, const binary_mask& gt,
            double lambda);

struct train_frame {
    pixel_features features;
    binary_mask gt;
    weight_map prior;
};

struct train_result {
    pixel_classifier params;
    std::vector<double> losses;  // loss before each step, plus the final loss
};

/// Full-batch gradient descent through the fusion and both heads; the
/// weight map is a fixed input and receives no parameter update.
/// Deterministic given cfg.seed. Throws std::runtime_error naming the
/// step index if the loss turns non-finite.
train_result train(const std::vector<train_frame>& frames, const train_config& cfg,
                   train_stage stage, const pixel_classifier& init);

/// Seeded random initialization for the configured architecture.
pixel_classifier random_init(int feature_dim, const train_config& cfg);

/// Analytic parameter gradient of loss(fuse(classifier_forward)) -- the
/// same gradient train() descends on, averaged over the given frames.
std::vector<double> parameter_gradients(const pixel_classifier& params,
                                        const std::vector<train_frame>& frames, double lambda);

/// Max discrepancy between parameter_gradients and central finite
/// differences with step eps, measured as |a-n| / max(1, |a|, |n|).
double grad_check(const pixel_classifier& params, const pixel_features& features,
                  const binary_mask& gt, const weight_map& w, double eps, double lambda = 1.0);

/// fuse_forward over the two conditional heads; pure composition.
prob_map predict_frame(const pixel_features& features, const pixel_classifier& params,
                       const weight_map& w);

/// Versioned little-endian binary parameter file (magic "SGVC").
void save_classifier(const std::filesystem::path& path, const pixel_classifier& params);
pixel_classifier load_classifier(const std::filesystem::path& path);

}  // namespace sgv
