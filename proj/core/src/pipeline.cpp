#include "sgv/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "sgv/feature_io.hpp"
#include "sgv/filter.hpp"
#include "sgv/geometry.hpp"
#include "sgv/netpbm.hpp"
#include "sgv/report.hpp"

namespace sgv {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::string frame_stem(int frame) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05d", frame);
    return buf;
}

std::vector<std::string> list_sequence_ids(const std::filesystem::path& dataset_root) {
    const auto dir = dataset_root / "sequences";
    if (!std::filesystem::is_directory(dir))
        throw std::runtime_error(dir.string() + ": dataset has no sequences directory");
    std::vector<std::string> ids;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_directory()) ids.push_back(entry.path().filename().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

int count_frames(const std::filesystem::path& seq_dir) {
    int n = 0;
    while (std::filesystem::exists(seq_dir / "gt" / (frame_stem(n) + ".pbm"))) ++n;
    return n;
}

std::map<std::string, std::set<std::string>> load_attributes(
    const std::filesystem::path& dataset_root) {
    std::map<std::string, std::set<std::string>> out;
    const auto path = dataset_root / "attributes.json";
    if (!std::filesystem::exists(path)) return out;
    std::ifstream in(path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path.string() + ": invalid JSON: " + e.what());
    }
    for (const auto& [seq, codes] : doc.items())
        for (const auto& code : codes) out[seq].insert(code.get<std::string>());
    return out;
}

struct frame_output {
    binary_mask final_mask;
    prob_map fused;
    nlohmann::json selection_audit;
};

struct sequence_context {
    const pipeline_config& cfg;
    std::filesystem::path seq_dir;
    pixel_classifier params;
    bool have_descriptor = false;
    semantic_descriptor descriptor;
};

frame_output process_frame(const sequence_context& ctx, int frame) {
    const std::string stem = frame_stem(frame);
    const auto features = load_features(ctx.seq_dir / "features" / (stem + ".feat"));

    frame_output out;
    out.selection_audit = nlohmann::json::object();
    out.selection_audit["frame"] = frame;

    if (ctx.cfg.mode == pipeline_mode::monolithic_baseline) {
        const auto maps = classifier_forward(features, ctx.params);
        const auto refined =
            bilateral_filter(maps.fg_estimate, luminance(features), ctx.cfg.bilateral);
        out.fused = maps.fg_estimate;
        out.final_mask = finalize(refined);
        return out;
    }

    const auto maps = classifier_forward(features, ctx.params);

    std::vector<instance_proposal> selected;
    nlohmann::json audit_selected = nlohmann::json::array();
    int shortfall = 0;
    if (ctx.have_descriptor) {
        const auto proposals = filter_proposals(
            load_proposal_manifest(ctx.seq_dir / "proposals" / (stem + ".json")), ctx.cfg.prior);
        auto propagated =
            semantic_propagate(ctx.descriptor, proposals, maps.fg_estimate, ctx.cfg.prior);
        for (const auto& p : propagated.selected) {
            nlohmann::json entry;
            entry["category"] = p.category;
            entry["confidence"] = p.confidence;
            if (!p.instance_id.empty()) entry["instance_id"] = p.instance_id;
            audit_selected.push_back(entry);
        }
        for (const auto& [cat, missing] : propagated.shortfall) shortfall += missing;
        selected = std::move(propagated.selected);
    }
    out.selection_audit["selected"] = audit_selected;
    out.selection_audit["shortfall"] = shortfall;
    out.selection_audit["fallback"] = !ctx.have_descriptor;

    if (ctx.cfg.mode == pipeline_mode::prior_only) {
        // propagated instances evaluated directly, no refinement
        binary_mask uni(features.width, features.height);
        for (const auto& p : selected)
            for (std::size_t i = 0; i < uni.bits.size(); ++i)
                if (p.mask.bits[i]) uni.bits[i] = 1;
        out.fused = prob_map(features.width, features.height);
        for (std::size_t i = 0; i < uni.bits.size(); ++i)
            out.fused.values[i] = uni.bits[i] ? 1.0 : 0.0;
        out.final_mask = uni;
        return out;
    }

    const weight_map w =
        ctx.have_descriptor
            ? build_prior(selected, features.width, features.height, ctx.cfg.prior)
            : weight_map(features.width, features.height, 0.5);
    const auto fused = fuse_forward(maps.f1, maps.f2, w);
    const auto refined = bilateral_filter(fused, luminance(features), ctx.cfg.bilateral);
    out.fused = fused;
    out.final_mask = finalize(refined);
    return out;
}

// Frame-level parallelism with deterministic output ordering: results
// land in an index-addressed vector, errors rethrow after join.
std::vector<frame_output> process_all_frames(const sequence_context& ctx, int frames, int jobs) {
    std::vector<frame_output> outputs(frames);
    std::vector<std::exception_ptr> errors(frames);
    std::atomic<int> next{0};

    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= frames) return;
            try {
                outputs[i] = process_frame(ctx, i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const int n_threads = std::max(1, std::min(jobs, frames));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (int i = 0; i < frames; ++i)
        if (errors[i]) std::rethrow_exception(errors[i]);
    return outputs;
}

}  // namespace

std::string run_id(const pipeline_config& cfg) {
    const char* mode = cfg.mode == pipeline_mode::conditional          ? "conditional"
                       : cfg.mode == pipeline_mode::monolithic_baseline ? "monolithic"
                                                                         : "prior_only";
    return std::string("run-") + mode + "-s" + std::to_string(cfg.seed);
}

pipeline_result run_pipeline(const pipeline_config& cfg) {
    pipeline_result result;
    result.report_dir = cfg.output_root / run_id(cfg);
    // the run directory is pipeline-owned; stale artifacts from an earlier
    // run would break the byte-identical-tree guarantee
    std::filesystem::remove_all(result.report_dir);
    std::filesystem::create_directories(result.report_dir);

    const auto attributes = load_attributes(cfg.dataset_root);
    const auto sequence_ids = list_sequence_ids(cfg.dataset_root);

    std::vector<std::pair<std::string, error_partition_result>> partitions;

    for (std::size_t seq_index = 0; seq_index < sequence_ids.size(); ++seq_index) {
        const std::string& id = sequence_ids[seq_index];
        sequence_run_report report;
        report.id = id;
        const auto seq_dir = cfg.dataset_root / "sequences" / id;

        try {
            const int frames = count_frames(seq_dir);
            // the given first frame is excluded from metrics and the
            // summary statistics need 4 evaluated frames
            if (frames < 5)
                throw std::runtime_error(id + ": need at least 5 frames, found " +
                                         std::to_string(frames));

            // frame 1 inputs
            const auto features0 = load_features(seq_dir / "features" / "00000.feat");
            const auto gt0 = load_mask(seq_dir / "gt" / "00000.pbm");
            require_same_size(features0, gt0, "run_pipeline");

            // semantic selection on the given first frame
            sequence_context ctx{cfg, seq_dir, {}, false, {}};
            std::vector<instance_proposal> first_selected;
            if (cfg.mode != pipeline_mode::monolithic_baseline) {
                try {
                    const auto proposals0 = filter_proposals(
                        load_proposal_manifest(seq_dir / "proposals" / "00000.json"), cfg.prior);
                    auto selection = semantic_select(gt0, proposals0, cfg.prior);
                    ctx.descriptor = std::move(selection.descriptor);
                    first_selected = std::move(selection.selected);
                    ctx.have_descriptor = true;
                } catch (const selection_empty&) {
                    report.selection_fallback = true;  // pure appearance model
                }
            }

            // fine-tune the appearance model on frame 1; the weight map
            // comes from the first-frame prior (neutral on fallback)
            const weight_map w0 =
                ctx.have_descriptor && cfg.mode != pipeline_mode::monolithic_baseline
                    ? build_prior(first_selected, gt0.width, gt0.height, cfg.prior)
                    : weight_map(gt0.width, gt0.height, 0.5);
            train_config tc = cfg.train;
            tc.seed = mix_seed(cfg.seed, seq_index);
            const auto trained = train({{features0, gt0, w0}}, tc, train_stage::finetune,
                                       random_init(features0.dim, tc));
            ctx.params = trained.params;

            const auto outputs = process_all_frames(ctx, frames, cfg.jobs);

            // persist per-frame artifacts
            const auto masks_dir = result.report_dir / "masks" / id;
            const auto probs_dir = result.report_dir / "probs" / id;
            std::filesystem::create_directories(masks_dir);
            std::filesystem::create_directories(probs_dir);
            nlohmann::json selection_log = nlohmann::json::array();
            for (int t = 0; t < frames; ++t) {
                save_mask(masks_dir / (frame_stem(t) + ".pbm"), outputs[t].final_mask);
                save_probmap(probs_dir / (frame_stem(t) + ".pgm"), outputs[t].fused);
                if (cfg.mode != pipeline_mode::monolithic_baseline)
                    selection_log.push_back(outputs[t].selection_audit);
                report.shortfall_frames +=
                    cfg.mode != pipeline_mode::monolithic_baseline &&
                    outputs[t].selection_audit.value("shortfall", 0) > 0;
            }
            if (ctx.have_descriptor) {
                std::filesystem::create_directories(result.report_dir / "descriptor");
                save_descriptor(result.report_dir / "descriptor" / (id + ".json"),
                                ctx.descriptor);
            }
            if (cfg.mode != pipeline_mode::monolithic_baseline) {
                std::filesystem::create_directories(result.report_dir / "selection");
                std::ofstream slog(result.report_dir / "selection" / (id + ".json"),
                                   std::ios::binary);
                slog << selection_log.dump(2) << "\n";
            }

            // evaluate all frames after the given first one
            sequence_result eval;
            eval.sequence_id = id;
            if (auto it = attributes.find(id); it != attributes.end()) eval.attributes = it->second;
            std::vector<binary_mask> preds, gts;
            for (int t = 1; t < frames; ++t) {
                const auto gt = load_mask(seq_dir / "gt" / (frame_stem(t) + ".pbm"));
                eval.per_frame_j.push_back(iou(outputs[t].final_mask, gt));
                eval.per_frame_f.push_back(f_measure(outputs[t].final_mask, gt,
                                                     default_f_tolerance(gt.width, gt.height)));
                preds.push_back(outputs[t].final_mask);
                gts.push_back(gt);
            }
            if (!preds.empty()) {
                partitions.emplace_back(
                    id, error_partition(preds, gts,
                                        default_close_distance(gts[0].width, gts[0].height)));
            }
            result.eval_results.push_back(std::move(eval));
            report.ok = true;
        } catch (const std::exception& e) {
            report.error = e.what();
            result.exit_code = 1;
        }
        result.sequences.push_back(std::move(report));
    }

    // reports
    emit_report(result.eval_results, result.report_dir, cfg.report_format);
    bool curve_ok = !result.eval_results.empty();
    for (const auto& r : result.eval_results) curve_ok = curve_ok && r.per_frame_j.size() >= 2;
    if (curve_ok)
        write_decay_csv(decay_curve(result.eval_results), result.report_dir / "decay_curve.csv");
    if (!partitions.empty()) write_error_csv(partitions, result.report_dir / "errors.csv");
    if (!attributes.empty() && !result.eval_results.empty())
        write_attribute_csv(attribute_summary(result.eval_results),
                            result.report_dir / "attributes.csv");

    nlohmann::json summary;
    summary["run_id"] = run_id(cfg);
    summary["mode"] = cfg.mode == pipeline_mode::conditional          ? "conditional"
                      : cfg.mode == pipeline_mode::monolithic_baseline ? "monolithic"
                                                                        : "prior_only";
    summary["seed"] = cfg.seed;
    summary["sequences"] = nlohmann::json::array();
    for (const auto& r : result.sequences) {
        nlohmann::json s;
        s["id"] = r.id;
        s["ok"] = r.ok;
        s["selection_fallback"] = r.selection_fallback;
        s["shortfall_frames"] = r.shortfall_frames;
        if (!r.error.empty()) s["error"] = r.error;
        summary["sequences"].push_back(s);
    }
    std::ofstream sout(result.report_dir / "summary.json", std::ios::binary);
    sout << summary.dump(2) << "\n";

    return result;
}

pipeline_result run_eval(const eval_job& job) {
    pipeline_result result;
    result.report_dir = job.output_root;
    std::filesystem::create_directories(result.report_dir);

    const auto attributes = load_attributes(job.dataset_root);
    const auto sequence_ids = list_sequence_ids(job.dataset_root);
    std::vector<std::pair<std::string, error_partition_result>> partitions;

    for (const auto& id : sequence_ids) {
        sequence_run_report report;
        report.id = id;
        const auto seq_dir = job.dataset_root / "sequences" / id;
        try {
            const int frames = count_frames(seq_dir);
            if (frames < 5)
                throw std::runtime_error(id + ": need at least 5 frames, found " +
                                         std::to_string(frames));

            sequence_result eval;
            eval.sequence_id = id;
            if (auto it = attributes.find(id); it != attributes.end()) eval.attributes = it->second;
            std::vector<binary_mask> preds, gts;
            for (int t = 1; t < frames; ++t) {
                const auto gt = load_mask(seq_dir / "gt" / (frame_stem(t) + ".pbm"));
                const auto pred = load_mask(job.pred_root / id / (frame_stem(t) + ".pbm"));
                require_same_size(pred, gt, "run_eval");
                eval.per_frame_j.push_back(iou(pred, gt));
                eval.per_frame_f.push_back(
                    f_measure(pred, gt, default_f_tolerance(gt.width, gt.height)));
                preds.push_back(pred);
                gts.push_back(gt);
            }
            partitions.emplace_back(
                id, error_partition(preds, gts,
                                    default_close_distance(gts[0].width, gts[0].height)));
            result.eval_results.push_back(std::move(eval));
            report.ok = true;
        } catch (const std::exception& e) {
            report.error = e.what();
            result.exit_code = 1;
        }
        result.sequences.push_back(std::move(report));
    }

    emit_report(result.eval_results, result.report_dir, job.report_format);
    bool curve_ok = !result.eval_results.empty();
    for (const auto& r : result.eval_results) curve_ok = curve_ok && r.per_frame_j.size() >= 2;
    if (curve_ok)
        write_decay_csv(decay_curve(result.eval_results), result.report_dir / "decay_curve.csv");
    if (!partitions.empty()) write_error_csv(partitions, result.report_dir / "errors.csv");
    if (!attributes.empty() && !result.eval_results.empty())
        write_attribute_csv(attribute_summary(result.eval_results),
                            result.report_dir / "attributes.csv");
    return result;
}

}  // namespace sgv
