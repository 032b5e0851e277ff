#include "sgv/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace sgv {

namespace {

using nlohmann::json;

json load_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error(path.string() + ": cannot open config file");
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw config_error(path.string() + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object()) throw config_error(path.string() + ": config must be a JSON object");
    return doc;
}

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& context) {
    for (const auto& [key, value] : obj.items())
        if (!known.count(key)) throw config_error(context + ": unknown key '" + key + "'");
}

template <typename T>
T field(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error(std::string("config: bad value for '") + key + "'");
    }
}

}  // namespace

pipeline_mode parse_mode(const std::string& name) {
    if (name == "conditional") return pipeline_mode::conditional;
    if (name == "monolithic") return pipeline_mode::monolithic_baseline;
    if (name == "prior_only") return pipeline_mode::prior_only;
    throw config_error("config: unknown mode '" + name +
                       "' (expected conditional, monolithic, or prior_only)");
}

std::string mode_name(pipeline_mode mode) {
    switch (mode) {
        case pipeline_mode::conditional: return "conditional";
        case pipeline_mode::monolithic_baseline: return "monolithic";
        case pipeline_mode::prior_only: return "prior_only";
    }
    return "unknown";
}

pipeline_config load_pipeline_config(const std::filesystem::path& path) {
    const json doc = load_document(path);
    reject_unknown(doc,
                   {"dataset_root", "output_root", "mode", "seed", "jobs", "format", "prior",
                    "train", "bilateral"},
                   path.string());

    pipeline_config cfg;
    if (!doc.contains("dataset_root") || !doc.contains("output_root"))
        throw config_error(path.string() + ": dataset_root and output_root are required");
    cfg.dataset_root = doc.at("dataset_root").get<std::string>();
    cfg.output_root = doc.at("output_root").get<std::string>();
    cfg.mode = parse_mode(field<std::string>(doc, "mode", "conditional"));
    cfg.seed = field<std::uint64_t>(doc, "seed", 0);
    cfg.jobs = field<int>(doc, "jobs", 1);
    cfg.report_format = field<std::string>(doc, "format", "both");
    if (cfg.jobs < 1) throw config_error(path.string() + ": jobs must be >= 1");
    if (cfg.report_format != "csv" && cfg.report_format != "json" && cfg.report_format != "both")
        throw config_error(path.string() + ": format must be csv, json, or both");

    if (doc.contains("prior")) {
        const json& p = doc.at("prior");
        reject_unknown(p,
                       {"confidence_threshold", "selection_min_precision", "selection_min_gain",
                        "sigma_prior", "propagation_score"},
                       path.string() + ": prior");
        cfg.prior.confidence_threshold =
            field<double>(p, "confidence_threshold", cfg.prior.confidence_threshold);
        cfg.prior.selection_min_precision =
            field<double>(p, "selection_min_precision", cfg.prior.selection_min_precision);
        cfg.prior.selection_min_gain =
            field<double>(p, "selection_min_gain", cfg.prior.selection_min_gain);
        cfg.prior.sigma_prior = field<double>(p, "sigma_prior", cfg.prior.sigma_prior);
        const std::string score = field<std::string>(p, "propagation_score", "mean_foreground_inside");
        if (score == "mean_foreground_inside")
            cfg.prior.score = propagation_score::mean_foreground_inside;
        else if (score == "iou_with_thresholded_foreground")
            cfg.prior.score = propagation_score::iou_with_thresholded_foreground;
        else
            throw config_error(path.string() + ": unknown propagation_score '" + score + "'");
        if (cfg.prior.confidence_threshold < 0 || cfg.prior.confidence_threshold > 1 ||
            cfg.prior.selection_min_precision < 0 || cfg.prior.selection_min_precision > 1 ||
            cfg.prior.selection_min_gain < 0 || cfg.prior.sigma_prior < 0)
            throw config_error(path.string() + ": prior parameter out of range");
    }

    if (doc.contains("train")) {
        const json& t = doc.at("train");
        reject_unknown(t,
                       {"learning_rate", "pretrain_steps", "finetune_steps", "side_loss_weight",
                        "hidden_units"},
                       path.string() + ": train");
        cfg.train.learning_rate = field<double>(t, "learning_rate", cfg.train.learning_rate);
        cfg.train.pretrain_steps = field<int>(t, "pretrain_steps", cfg.train.pretrain_steps);
        cfg.train.finetune_steps = field<int>(t, "finetune_steps", cfg.train.finetune_steps);
        cfg.train.side_loss_weight =
            field<double>(t, "side_loss_weight", cfg.train.side_loss_weight);
        cfg.train.hidden_units = field<int>(t, "hidden_units", cfg.train.hidden_units);
        if (cfg.train.learning_rate <= 0 || cfg.train.pretrain_steps < 0 ||
            cfg.train.finetune_steps < 0 || cfg.train.side_loss_weight < 0 ||
            cfg.train.hidden_units < 1)
            throw config_error(path.string() + ": train parameter out of range");
    }

    if (doc.contains("bilateral")) {
        const json& b = doc.at("bilateral");
        reject_unknown(b, {"sigma_spatial", "sigma_range", "window_radius"},
                       path.string() + ": bilateral");
        cfg.bilateral.sigma_spatial = field<double>(b, "sigma_spatial", cfg.bilateral.sigma_spatial);
        cfg.bilateral.sigma_range = field<double>(b, "sigma_range", cfg.bilateral.sigma_range);
        cfg.bilateral.window_radius = field<int>(b, "window_radius", cfg.bilateral.window_radius);
        if (cfg.bilateral.sigma_spatial <= 0 || cfg.bilateral.sigma_range <= 0 ||
            cfg.bilateral.window_radius < 1)
            throw config_error(path.string() + ": bilateral parameter out of range");
    }

    cfg.train.seed = cfg.seed;
    return cfg;
}

synth_job load_synth_job(const std::filesystem::path& path) {
    const json doc = load_document(path);
    reject_unknown(doc,
                   {"output_root", "num_sequences", "frames_per_sequence", "image_size",
                    "appearance_change_frame_fraction", "distractors", "noise_sigma", "seed"},
                   path.string());
    if (!doc.contains("output_root"))
        throw config_error(path.string() + ": output_root is required");

    synth_job job;
    job.output_root = doc.at("output_root").get<std::string>();
    job.cfg.num_sequences = field<int>(doc, "num_sequences", job.cfg.num_sequences);
    job.cfg.frames_per_sequence =
        field<int>(doc, "frames_per_sequence", job.cfg.frames_per_sequence);
    job.cfg.image_size = field<int>(doc, "image_size", job.cfg.image_size);
    job.cfg.appearance_change_frame_fraction = field<double>(
        doc, "appearance_change_frame_fraction", job.cfg.appearance_change_frame_fraction);
    job.cfg.noise_sigma = field<double>(doc, "noise_sigma", job.cfg.noise_sigma);
    job.cfg.seed = field<std::uint64_t>(doc, "seed", 0);
    const std::string policy = field<std::string>(doc, "distractors", "none");
    if (policy == "none") job.cfg.distractors = distractor_policy::none;
    else if (policy == "same_category") job.cfg.distractors = distractor_policy::same_category;
    else if (policy == "same_appearance") job.cfg.distractors = distractor_policy::same_appearance;
    else
        throw config_error(path.string() + ": unknown distractor policy '" + policy + "'");

    if (job.cfg.num_sequences < 1 || job.cfg.frames_per_sequence < 1 || job.cfg.image_size < 16 ||
        job.cfg.appearance_change_frame_fraction <= 0.0 ||
        job.cfg.appearance_change_frame_fraction >= 1.0 || job.cfg.noise_sigma < 0.0)
        throw config_error(path.string() + ": synthetic parameter out of range");
    return job;
}

eval_job load_eval_job(const std::filesystem::path& path) {
    const json doc = load_document(path);
    reject_unknown(doc, {"dataset_root", "pred_root", "output_root", "format"}, path.string());
    if (!doc.contains("dataset_root") || !doc.contains("pred_root") ||
        !doc.contains("output_root"))
        throw config_error(path.string() + ": dataset_root, pred_root, output_root are required");
    eval_job job;
    job.dataset_root = doc.at("dataset_root").get<std::string>();
    job.pred_root = doc.at("pred_root").get<std::string>();
    job.output_root = doc.at("output_root").get<std::string>();
    job.report_format = field<std::string>(doc, "format", "both");
    if (job.report_format != "csv" && job.report_format != "json" && job.report_format != "both")
        throw config_error(path.string() + ": format must be csv, json, or both");
    return job;
}

}  // namespace sgv
