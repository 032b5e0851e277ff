#pragma once

#include <cstdint>
#include <filesystem>

namespace sgv {

enum class distractor_policy { none, same_category, same_appearance };

/// Desk-scale synthetic sequence generator: a moving textured disc over a
/// textured background, with an appearance change partway through the
/// sequence and optional distractor instances. Emits features, ground
/// truth, and noisy-oracle proposal manifests in the dataset layout the
/// pipeline consumes. Fully deterministic for a given seed.
struct synthetic_config {
    int num_sequences = 10;
    int frames_per_sequence = 40;
    int image_size = 64;
    /// The target's color distribution shifts at floor(fraction * frames).
    double appearance_change_frame_fraction = 0.5;
    distractor_policy distractors = distractor_policy::none;
    /// Drives image noise, proposal boundary perturbation, and confidence
    /// jitter. 0 produces proposals exactly equal to the instance masks.
    double noise_sigma = 0.05;
    std::uint64_t seed = 0;
};

void generate_dataset(const synthetic_config& cfg, const std::filesystem::path& out_root);

}  // namespace sgv
