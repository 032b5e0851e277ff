#pragma once

#include <filesystem>
#include <stdexcept>

#include "sgv/pipeline.hpp"
#include "sgv/synth.hpp"

namespace sgv {

/// Bad or missing configuration; the CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parse the JSON configuration document mirroring pipeline_config.
/// Unknown keys are rejected.
pipeline_config load_pipeline_config(const std::filesystem::path& path);

struct synth_job {
    synthetic_config cfg;
    std::filesystem::path output_root;
};

synth_job load_synth_job(const std::filesystem::path& path);

eval_job load_eval_job(const std::filesystem::path& path);

pipeline_mode parse_mode(const std::string& name);
std::string mode_name(pipeline_mode mode);

}  // namespace sgv
