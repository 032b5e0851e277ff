#include "sgv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sgv/geometry.hpp"

namespace sgv {

metric_summary summarize(const std::vector<double>& per_frame) {
    const std::size_t n = per_frame.size();
    if (n < 4) throw std::invalid_argument("summarize: need at least 4 frames");

    metric_summary s;
    s.mean = std::accumulate(per_frame.begin(), per_frame.end(), 0.0) / static_cast<double>(n);

    std::size_t above = 0;
    for (double v : per_frame) above += v > 0.5;
    s.recall = static_cast<double>(above) / static_cast<double>(n);

    const std::size_t q = std::max<std::size_t>(1, n / 4);
    const double first =
        std::accumulate(per_frame.begin(), per_frame.begin() + q, 0.0) / static_cast<double>(q);
    const double last =
        std::accumulate(per_frame.end() - q, per_frame.end(), 0.0) / static_cast<double>(q);
    s.decay = first - last;
    return s;
}

double f_measure(const binary_mask& pred, const binary_mask& gt, double tol) {
    require_same_size(pred, gt, "f_measure");
    if (tol < 0.0) throw std::invalid_argument("f_measure: tol must be >= 0");

    const binary_mask pb = boundary(pred);
    const binary_mask gb = boundary(gt);
    const long long npb = pb.area(), ngb = gb.area();
    if (npb == 0 && ngb == 0) return 1.0;
    if (npb == 0 || ngb == 0) return 0.0;

    const real_grid dist_to_gb = distance_transform(gb);
    const real_grid dist_to_pb = distance_transform(pb);

    long long matched_p = 0, matched_g = 0;
    for (std::size_t i = 0; i < pb.bits.size(); ++i) {
        if (pb.bits[i] && dist_to_gb.values[i] <= tol) ++matched_p;
        if (gb.bits[i] && dist_to_pb.values[i] <= tol) ++matched_g;
    }
    const double precision = static_cast<double>(matched_p) / static_cast<double>(npb);
    const double recall = static_cast<double>(matched_g) / static_cast<double>(ngb);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

double default_f_tolerance(int width, int height) {
    return std::max(1.0, 0.008 * std::hypot(double(width), double(height)));
}

double default_close_distance(int width, int height) {
    return 0.02 * std::hypot(double(width), double(height));
}

double sample_normalized(const std::vector<double>& per_frame, double percent) {
    if (per_frame.size() < 2)
        throw std::invalid_argument("sample_normalized: need at least 2 frames");
    const double pos = percent / 100.0 * static_cast<double>(per_frame.size() - 1);
    const double lo = std::floor(pos);
    const std::size_t i = static_cast<std::size_t>(
        std::clamp<double>(lo, 0.0, static_cast<double>(per_frame.size() - 1)));
    if (i + 1 >= per_frame.size()) return per_frame.back();
    const double t = pos - lo;
    return (1.0 - t) * per_frame[i] + t * per_frame[i + 1];
}

std::array<double, 101> decay_curve(const std::vector<sequence_result>& results) {
    if (results.empty()) throw std::invalid_argument("decay_curve: no sequences");
    std::array<double, 101> curve{};
    for (const auto& seq : results)
        for (int p = 0; p <= 100; ++p)
            curve[p] += sample_normalized(seq.per_frame_j, static_cast<double>(p));
    for (auto& v : curve) v /= static_cast<double>(results.size());
    return curve;
}

error_partition_result error_partition(const std::vector<binary_mask>& preds,
                                       const std::vector<binary_mask>& gts, double d_close) {
    if (preds.size() != gts.size())
        throw std::invalid_argument("error_partition: list length mismatch");
    if (preds.empty()) throw std::invalid_argument("error_partition: empty input");

    error_partition_result r;
    for (std::size_t f = 0; f < preds.size(); ++f) {
        const binary_mask& pred = preds[f];
        const binary_mask& gt = gts[f];
        require_same_size(pred, gt, "error_partition");

        const real_grid gt_boundary_dist = distance_transform(boundary(gt));
        for (std::size_t i = 0; i < pred.bits.size(); ++i) {
            const bool p = pred.bits[i] != 0, g = gt.bits[i] != 0;
            if (p && g) ++r.tp;
            else if (!p && !g) ++r.tn;
            else if (!p && g) ++r.fn;
            else if (gt_boundary_dist.values[i] <= d_close) ++r.fp_close;
            else ++r.fp_far;
        }
        r.total += static_cast<long long>(pred.bits.size());
    }

    const double t = static_cast<double>(r.total);
    r.fp_close_pct = 100.0 * static_cast<double>(r.fp_close) / t;
    r.fp_far_pct = 100.0 * static_cast<double>(r.fp_far) / t;
    r.fn_pct = 100.0 * static_cast<double>(r.fn) / t;
    return r;
}

std::vector<attribute_entry> attribute_summary(const std::vector<sequence_result>& results) {
    std::vector<attribute_entry> out;
    for (const char* code : attribute_codes) {
        attribute_entry e;
        e.code = code;
        double with_sum = 0.0, without_sum = 0.0;
        for (const auto& seq : results) {
            const double m = summarize(seq.per_frame_j).mean;
            if (seq.attributes.count(code)) {
                with_sum += m;
                ++e.with_count;
            } else {
                without_sum += m;
                ++e.without_count;
            }
        }
        if (e.with_count > 0 && e.without_count > 0) {
            e.defined = true;
            e.mean_with = with_sum / e.with_count;
            e.gain = e.mean_with - without_sum / e.without_count;
        }
        out.push_back(e);
    }
    return out;
}

}  // namespace sgv
