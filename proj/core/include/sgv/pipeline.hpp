#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "sgv/bilateral.hpp"
#include "sgv/classifier.hpp"
#include "sgv/metrics.hpp"
#include "sgv/prior.hpp"

namespace sgv {

enum class pipeline_mode {
    conditional,          // full pipeline: propagated prior gating the two heads
    monolithic_baseline,  // single appearance classifier, proposals ignored
    prior_only,           // propagated instances evaluated directly, no refinement
};

struct pipeline_config {
    std::filesystem::path dataset_root;
    std::filesystem::path output_root;
    prior_config prior;
    train_config train;
    bilateral_config bilateral;
    pipeline_mode mode = pipeline_mode::conditional;
    std::uint64_t seed = 0;
    int jobs = 1;                      // frame-level parallelism
    std::string report_format = "both";
};

struct sequence_run_report {
    std::string id;
    bool ok = false;
    /// First-frame selection failed; the run fell back to the neutral
    /// 0.5 weight map for the whole sequence.
    bool selection_fallback = false;
    /// Frames on which propagation could not supply the full descriptor.
    int shortfall_frames = 0;
    std::string error;
};

struct pipeline_result {
    int exit_code = 0;  // 0 success, 1 at least one sequence failed
    std::vector<sequence_run_report> sequences;
    /// Per-sequence metrics for the sequences that ran (first frame excluded).
    std::vector<sequence_result> eval_results;
    std::filesystem::path report_dir;
};

/// Run the full per-sequence pipeline over a dataset tree and emit
/// masks, probability maps, audit files, and metric reports under
/// output_root/<run-id>/. Deterministic for a given config and seed,
/// independent of the job count.
pipeline_result run_pipeline(const pipeline_config& cfg);

/// Deterministic run directory name derived from mode and seed.
std::string run_id(const pipeline_config& cfg);

/// Standalone evaluation of prediction masks against dataset ground
/// truth (same first-frame exclusion as the pipeline).
struct eval_job {
    std::filesystem::path dataset_root;
    std::filesystem::path pred_root;  // <run-id>/masks tree
    std::filesystem::path output_root;
    std::string report_format = "both";
};

pipeline_result run_eval(const eval_job& job);

}  // namespace sgv
