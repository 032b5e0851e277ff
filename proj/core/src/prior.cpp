#include "sgv/prior.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "sgv/filter.hpp"
#include "sgv/geometry.hpp"
#include "sgv/netpbm.hpp"

namespace sgv {

std::vector<instance_proposal> filter_proposals(const std::vector<instance_proposal>& proposals,
                                                const prior_config& cfg) {
    std::vector<instance_proposal> out;
    for (const auto& p : proposals)
        if (p.confidence >= cfg.confidence_threshold) out.push_back(p);
    return out;
}

selection_result semantic_select(const binary_mask& gt,
                                 const std::vector<instance_proposal>& proposals,
                                 const prior_config& cfg) {
    if (gt.area() == 0)
        throw std::invalid_argument("semantic_select: ground-truth mask is empty");
    for (const auto& p : proposals) require_same_size(gt, p.mask, "semantic_select");

    // Precision w.r.t. the full gt is a fixed property of each proposal.
    const std::size_t n = proposals.size();
    std::vector<double> precision(n, 0.0);
    std::vector<long long> proposal_area(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        long long inter = 0, area = 0;
        const auto& mask = proposals[i].mask;
        for (std::size_t px = 0; px < mask.bits.size(); ++px) {
            if (!mask.bits[px]) continue;
            ++area;
            inter += gt.bits[px] != 0;
        }
        proposal_area[i] = area;
        precision[i] = area > 0 ? static_cast<double>(inter) / static_cast<double>(area) : 0.0;
    }

    const double gt_area = static_cast<double>(gt.area());
    std::vector<std::uint8_t> covered(gt.bits.size(), 0);
    std::vector<bool> used(n, false);

    selection_result result;
    for (;;) {
        // Best remaining candidate by marginal precision against the
        // uncovered part of gt; equal ratios break toward the larger
        // absolute coverage gain, then input order.
        int best = -1;
        double best_score = -1.0;
        long long best_gain = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (used[i] || precision[i] < cfg.selection_min_precision || proposal_area[i] == 0)
                continue;
            long long gain = 0;
            const auto& mask = proposals[i].mask;
            for (std::size_t px = 0; px < mask.bits.size(); ++px)
                gain += mask.bits[px] && gt.bits[px] && !covered[px];
            const double score = static_cast<double>(gain) / static_cast<double>(proposal_area[i]);
            if (score > best_score || (score == best_score && gain > best_gain)) {
                best_score = score;
                best_gain = gain;
                best = static_cast<int>(i);
            }
        }
        if (best < 0) break;
        if (static_cast<double>(best_gain) < cfg.selection_min_gain * gt_area) break;

        used[best] = true;
        result.selected.push_back(proposals[best]);
        result.descriptor.counts[proposals[best].category] += 1;
        const auto& mask = proposals[best].mask;
        for (std::size_t px = 0; px < mask.bits.size(); ++px)
            if (mask.bits[px]) covered[px] = 1;
    }

    if (result.selected.empty())
        throw selection_empty("semantic_select: no proposal matches the first-frame mask");
    return result;
}

namespace {

double proposal_agreement(const instance_proposal& p, const prob_map& fg,
                          const prior_config& cfg) {
    switch (cfg.score) {
        case propagation_score::mean_foreground_inside: {
            double sum = 0.0;
            long long count = 0;
            for (std::size_t i = 0; i < p.mask.bits.size(); ++i) {
                if (!p.mask.bits[i]) continue;
                sum += fg.values[i];
                ++count;
            }
            return count > 0 ? sum / static_cast<double>(count) : 0.0;
        }
        case propagation_score::iou_with_thresholded_foreground:
            return iou(p.mask, threshold(fg, 0.5));
    }
    return 0.0;
}

}  // namespace

propagation_result semantic_propagate(const semantic_descriptor& desc,
                                      const std::vector<instance_proposal>& proposals,
                                      const prob_map& fg,
                                      const prior_config& cfg) {
    for (const auto& p : proposals) require_same_size(fg, p.mask, "semantic_propagate");

    propagation_result result;
    for (const auto& [category, required] : desc.counts) {
        struct ranked {
            double score;
            double confidence;
            std::size_t input_index;
        };
        std::vector<ranked> candidates;
        for (std::size_t i = 0; i < proposals.size(); ++i) {
            if (proposals[i].category != category) continue;
            candidates.push_back({proposal_agreement(proposals[i], fg, cfg),
                                  proposals[i].confidence, i});
        }
        std::sort(candidates.begin(), candidates.end(), [](const ranked& a, const ranked& b) {
            if (a.score != b.score) return a.score > b.score;
            if (a.confidence != b.confidence) return a.confidence > b.confidence;
            return a.input_index < b.input_index;
        });
        const int take = std::min<int>(required, static_cast<int>(candidates.size()));
        for (int k = 0; k < take; ++k)
            result.selected.push_back(proposals[candidates[k].input_index]);
        if (take < required) result.shortfall[category] = required - take;
    }
    return result;
}

weight_map build_prior(const std::vector<instance_proposal>& selected, int width, int height,
                       const prior_config& cfg) {
    if (selected.empty()) return weight_map(width, height, 0.5);  // neutral prior

    binary_mask uni(width, height);
    for (const auto& p : selected) {
        require_same_size(uni, p.mask, "build_prior");
        for (std::size_t i = 0; i < uni.bits.size(); ++i)
            if (p.mask.bits[i]) uni.bits[i] = 1;
    }
    return gaussian_blur(uni, cfg.sigma_prior);
}

std::vector<instance_proposal> load_proposal_manifest(const std::filesystem::path& manifest) {
    std::ifstream in(manifest);
    if (!in) throw io_error(manifest.string() + ": cannot open manifest");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(manifest.string() + ": invalid JSON: " + e.what());
    }
    if (!doc.is_array()) throw io_error(manifest.string() + ": manifest must be a JSON array");

    const auto base = manifest.parent_path();
    std::vector<instance_proposal> out;
    for (const auto& entry : doc) {
        instance_proposal p;
        if (!entry.contains("mask_path") || !entry.contains("category") ||
            !entry.contains("confidence"))
            throw io_error(manifest.string() +
                           ": manifest entry needs mask_path, category, confidence");
        std::filesystem::path mask_path = entry.at("mask_path").get<std::string>();
        if (mask_path.is_relative()) mask_path = base / mask_path;
        p.mask = load_mask(mask_path);
        p.category = entry.at("category").get<std::string>();
        p.confidence = entry.at("confidence").get<double>();
        if (p.category.empty())
            throw io_error(manifest.string() + ": empty category");
        if (p.confidence < 0.0 || p.confidence > 1.0)
            throw io_error(manifest.string() + ": confidence outside [0,1]");
        if (entry.contains("instance_id"))
            p.instance_id = entry.at("instance_id").get<std::string>();
        out.push_back(std::move(p));
    }
    return out;
}

void save_descriptor(const std::filesystem::path& path, const semantic_descriptor& desc) {
    nlohmann::json doc;
    doc["counts"] = desc.counts;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(path.string() + ": cannot open for writing");
    out << doc.dump(2) << "\n";
}

semantic_descriptor load_descriptor(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error(path.string() + ": cannot open descriptor");
    nlohmann::json doc;
    in >> doc;
    semantic_descriptor desc;
    for (const auto& [category, count] : doc.at("counts").items())
        desc.counts[category] = count.get<int>();
    return desc;
}

}  // namespace sgv
