#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "sgv/mask.hpp"

namespace sgv {

/// Per-sequence evaluation record. The given first frame is excluded, so
/// the lists cover frames 1..N-1 of the sequence.
struct sequence_result {
    std::string sequence_id;
    std::vector<double> per_frame_j;
    std::vector<double> per_frame_f;
    std::set<std::string> attributes;
};

struct metric_summary {
    double mean = 0.0;    // M
    double recall = 0.0;  // O: fraction of frames above 0.5
    double decay = 0.0;   // D: first-quartile mean minus last-quartile mean
};

/// The eight sequence attribute codes, in reporting order.
inline constexpr std::array<const char*, 8> attribute_codes = {"LR",  "SV", "SC", "FM",
                                                               "DB",  "MB", "OCC", "AC"};

/// Mean / recall / decay statistics of a per-frame metric list (J or F).
/// Quartile size for the decay is floor(N/4), minimum 1. Requires at
/// least 4 frames.
metric_summary summarize(const std::vector<double>& per_frame);

/// Contour accuracy: harmonic mean of boundary precision and recall
/// under a pixel-distance tolerance. Both boundaries empty -> 1.0.
double f_measure(const binary_mask& pred, const binary_mask& gt, double tol);

/// Default F tolerance: 0.8% of the image diagonal, at least 1 px.
double default_f_tolerance(int width, int height);
/// Default close-false-positive distance: 2% of the image diagonal.
double default_close_distance(int width, int height);

/// Linear interpolation of a per-frame metric at `percent` in [0,100] of
/// the normalized sequence length. Needs at least 2 frames.
double sample_normalized(const std::vector<double>& per_frame, double percent);

/// Mean metric curve over [0,100]% of sequence length, 101 points,
/// averaged across sequences.
std::array<double, 101> decay_curve(const std::vector<sequence_result>& results);

/// Misclassified-pixel taxonomy over a sequence: false positives within
/// d_close of the gt boundary (FP-Close), beyond it (FP-Far), and missed
/// foreground (FN). Percentages are of the total pixel count.
struct error_partition_result {
    long long fp_close = 0, fp_far = 0, fn = 0, tp = 0, tn = 0, total = 0;
    double fp_close_pct = 0.0, fp_far_pct = 0.0, fn_pct = 0.0;
};

error_partition_result error_partition(const std::vector<binary_mask>& preds,
                                       const std::vector<binary_mask>& gts, double d_close);

/// Per-attribute mean and gain (mean over sequences with the attribute
/// minus mean over sequences without it). Undefined when either side is
/// empty.
struct attribute_entry {
    std::string code;
    bool defined = false;
    double mean_with = 0.0;
    double gain = 0.0;
    int with_count = 0;
    int without_count = 0;
};

std::vector<attribute_entry> attribute_summary(const std::vector<sequence_result>& results);

}  // namespace sgv
