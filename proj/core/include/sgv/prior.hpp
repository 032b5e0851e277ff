#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgv/mask.hpp"

namespace sgv {

/// One candidate instance mask from the external instance segmenter (or
/// the synthetic noisy oracle). `instance_id` is optional provenance
/// metadata carried through from the manifest; selection and propagation
/// never look at it.
struct instance_proposal {
    binary_mask mask;
    std::string category;
    double confidence = 0.0;
    std::string instance_id;
};

/// The category multiset fixed at frame 1; the quantity kept consistent
/// through the sequence.
struct semantic_descriptor {
    std::map<std::string, int> counts;

    int total() const {
        int n = 0;
        for (const auto& [c, k] : counts) n += k;
        return n;
    }
};

enum class propagation_score {
    mean_foreground_inside,
    iou_with_thresholded_foreground,
};

struct prior_config {
    double confidence_threshold = 0.7;
    double selection_min_precision = 0.5;  // tau_sel
    double selection_min_gain = 0.05;      // epsilon, fraction of |gt|
    double sigma_prior = 5.0;
    propagation_score score = propagation_score::mean_foreground_inside;
};

/// Raised when no proposal can be matched to the first-frame ground
/// truth; callers fall back to the pure appearance model.
struct selection_empty : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Proposals with confidence >= cfg.confidence_threshold, order preserved.
std::vector<instance_proposal> filter_proposals(const std::vector<instance_proposal>& proposals,
                                                const prior_config& cfg);

struct selection_result {
    semantic_descriptor descriptor;
    std::vector<instance_proposal> selected;
};

/// First-frame semantic selection: greedy precision-gated cover of the
/// ground-truth mask. Throws selection_empty when nothing qualifies.
selection_result semantic_select(const binary_mask& gt,
                                 const std::vector<instance_proposal>& proposals,
                                 const prior_config& cfg);

struct propagation_result {
    std::vector<instance_proposal> selected;
    /// category -> number of instances the frame could not supply
    std::map<std::string, int> shortfall;

    bool complete() const { return shortfall.empty(); }
};

/// Per-frame re-identification: keep the top n_c proposals per category,
/// scored by agreement with the first-round foreground estimate. Ties
/// break by higher confidence, then input order.
propagation_result semantic_propagate(const semantic_descriptor& desc,
                                      const std::vector<instance_proposal>& proposals,
                                      const prob_map& fg,
                                      const prior_config& cfg);

/// Union of the selected masks, Gaussian-smoothed into the per-frame
/// weight map. Empty selection yields the neutral 0.5 map.
weight_map build_prior(const std::vector<instance_proposal>& selected, int width, int height,
                       const prior_config& cfg);

/// Per-frame proposal manifest: JSON array of objects
/// {mask_path, category, confidence[, instance_id]}. Relative mask paths
/// resolve against the manifest's directory.
std::vector<instance_proposal> load_proposal_manifest(const std::filesystem::path& manifest);

void save_descriptor(const std::filesystem::path& path, const semantic_descriptor& desc);
semantic_descriptor load_descriptor(const std::filesystem::path& path);

}  // namespace sgv
