#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct command_result {
    int exit_code;
    std::string output;  // stdout + stderr
};

command_result run_cli(const std::string& args) {
    const auto out_file = std::filesystem::temp_directory_path() / "sgv_cli_output.txt";
    const std::string cmd =
        std::string(SGV_CLI_PATH) + " " + args + " > " + out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_file);
    std::ostringstream text;
    text << in.rdbuf();
    return {WEXITSTATUS(status), text.str()};
}

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "sgv_cli_tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream(path) << text;
}

}  // namespace

TEST_CASE("missing config file exits with code 2") {
    const auto r = run_cli("run --config /nonexistent/missing.json");
    CHECK(r.exit_code == 2);
}

TEST_CASE("unknown flags exit with code 2 and print usage") {
    const auto r = run_cli("run --config x.json --frobnicate");
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("Usage") != std::string::npos);
}

TEST_CASE("unknown subcommand exits with code 2") {
    CHECK(run_cli("transmogrify").exit_code == 2);
}

TEST_CASE("help exits cleanly") {
    const auto r = run_cli("--help");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("synth") != std::string::npos);
    CHECK(r.output.find("gradcheck") != std::string::npos);
}

TEST_CASE("gradcheck prints the max relative error and passes") {
    const auto r = run_cli("gradcheck --seed 7");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("max relative gradient error") != std::string::npos);
}

TEST_CASE("invalid config content exits with code 2") {
    const auto dir = fresh_dir("badcfg");
    write_file(dir / "bad.json", R"({"dataset_root": "/d", "output_root": "/o", "mode": "nope"})");
    const auto r = run_cli("run --config " + (dir / "bad.json").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("synth, run, and eval cooperate end to end") {
    const auto dir = fresh_dir("e2e");
    const auto dataset = dir / "dataset";
    const auto runs = dir / "runs";
    const auto eval_out = dir / "eval";

    write_file(dir / "synth.json", R"({
        "output_root": ")" + dataset.string() + R"(",
        "num_sequences": 1,
        "frames_per_sequence": 6,
        "image_size": 32,
        "appearance_change_frame_fraction": 0.5,
        "noise_sigma": 0.0,
        "seed": 3
    })");
    auto r = run_cli("synth --config " + (dir / "synth.json").string());
    CHECK(r.exit_code == 0);

    write_file(dir / "run.json", R"({
        "dataset_root": ")" + dataset.string() + R"(",
        "output_root": ")" + runs.string() + R"(",
        "mode": "prior_only",
        "seed": 11,
        "train": {"finetune_steps": 25, "hidden_units": 8},
        "prior": {"sigma_prior": 2.0},
        "bilateral": {"sigma_spatial": 2.0, "window_radius": 4}
    })");
    r = run_cli("run --config " + (dir / "run.json").string());
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("seq000: ok") != std::string::npos);

    const auto masks = runs / "run-prior_only-s11" / "masks";
    REQUIRE(std::filesystem::exists(masks / "seq000" / "00001.pbm"));

    write_file(dir / "eval.json", R"({
        "dataset_root": ")" + dataset.string() + R"(",
        "pred_root": ")" + masks.string() + R"(",
        "output_root": ")" + eval_out.string() + R"("
    })");
    r = run_cli("eval --config " + (dir / "eval.json").string());
    CHECK(r.exit_code == 0);

    // prior-only with oracle proposals reproduces the ground truth exactly
    std::ifstream in(eval_out / "per_sequence.json");
    nlohmann::json doc;
    in >> doc;
    CHECK(doc.at("aggregate").at("j").at("mean").get<double>() == 1.0);

    // --mode override changes the run directory
    r = run_cli("run --config " + (dir / "run.json").string() + " --mode monolithic --seed 12");
    CHECK(r.exit_code == 0);
    CHECK(std::filesystem::exists(runs / "run-monolithic-s12"));
}

TEST_CASE("jobs flag leaves the report tree byte-identical") {
    const auto dir = fresh_dir("jobs");
    const auto dataset = dir / "dataset";
    write_file(dir / "synth.json", R"({
        "output_root": ")" + dataset.string() + R"(",
        "num_sequences": 1,
        "frames_per_sequence": 6,
        "image_size": 32,
        "noise_sigma": 0.03,
        "seed": 4
    })");
    REQUIRE(run_cli("synth --config " + (dir / "synth.json").string()).exit_code == 0);

    auto make_run_cfg = [&](const std::string& out) {
        write_file(dir / ("run_" + out + ".json"), R"({
            "dataset_root": ")" + dataset.string() + R"(",
            "output_root": ")" + (dir / out).string() + R"(",
            "seed": 5,
            "train": {"finetune_steps": 20, "hidden_units": 8},
            "bilateral": {"sigma_spatial": 2.0, "window_radius": 4}
        })");
        return (dir / ("run_" + out + ".json")).string();
    };
    REQUIRE(run_cli("run --config " + make_run_cfg("a")).exit_code == 0);
    REQUIRE(run_cli("run --config " + make_run_cfg("b") + " --jobs 4").exit_code == 0);

    // compare the two trees byte for byte
    const auto root_a = dir / "a" / "run-conditional-s5";
    const auto root_b = dir / "b" / "run-conditional-s5";
    int files = 0;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(root_a)) {
        if (!entry.is_regular_file()) continue;
        ++files;
        const auto rel = std::filesystem::relative(entry.path(), root_a);
        std::ifstream fa(entry.path(), std::ios::binary), fb(root_b / rel, std::ios::binary);
        REQUIRE(fb.good());
        std::ostringstream sa, sb;
        sa << fa.rdbuf();
        sb << fb.rdbuf();
        CHECK(sa.str() == sb.str());
    }
    CHECK(files > 5);
}
