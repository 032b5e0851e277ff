#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include <json.hpp>

#include "sgv/netpbm.hpp"
#include "sgv/prior.hpp"

using namespace sgv;

namespace {

binary_mask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
    binary_mask m(w, h);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) m.set(x, y, true);
    return m;
}

instance_proposal make_proposal(binary_mask mask, std::string category, double confidence) {
    return {std::move(mask), std::move(category), confidence, ""};
}

}  // namespace

TEST_CASE("filter_proposals thresholds on confidence, order preserved") {
    std::vector<instance_proposal> props;
    props.push_back(make_proposal(rect_mask(4, 4, 0, 0, 1, 1), "a", 0.9));
    props.push_back(make_proposal(rect_mask(4, 4, 2, 2, 3, 3), "b", 0.3));
    props.push_back(make_proposal(rect_mask(4, 4, 0, 2, 1, 3), "c", 0.7));

    prior_config cfg;
    cfg.confidence_threshold = 0.0;
    CHECK(filter_proposals(props, cfg).size() == 3);

    cfg.confidence_threshold = 1.0;
    CHECK(filter_proposals(props, cfg).empty());

    cfg.confidence_threshold = 0.5;
    const auto kept = filter_proposals(props, cfg);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].category == "a");
    CHECK(kept[1].category == "c");
}

TEST_CASE("semantic_select picks the exact match and ignores the disjoint proposal") {
    const auto gt = rect_mask(8, 8, 1, 1, 4, 4);
    std::vector<instance_proposal> props;
    props.push_back(make_proposal(gt, "person", 0.9));
    props.push_back(make_proposal(rect_mask(8, 8, 6, 6, 7, 7), "chair", 0.8));

    const auto result = semantic_select(gt, props, prior_config{});
    REQUIRE(result.selected.size() == 1);
    CHECK(result.selected[0].category == "person");
    CHECK(result.descriptor.counts.at("person") == 1);
    CHECK(result.descriptor.counts.size() == 1);
}

TEST_CASE("semantic_select finds a motorbike plus a person") {
    // gt is the union of two disjoint instances; a third proposal has no overlap
    const auto person = rect_mask(12, 8, 1, 1, 3, 6);
    const auto motorbike = rect_mask(12, 8, 5, 3, 9, 6);
    binary_mask gt(12, 8);
    for (std::size_t i = 0; i < gt.bits.size(); ++i)
        gt.bits[i] = person.bits[i] || motorbike.bits[i];

    std::vector<instance_proposal> props;
    props.push_back(make_proposal(person, "person", 0.9));
    props.push_back(make_proposal(motorbike, "motorbike", 0.85));
    props.push_back(make_proposal(rect_mask(12, 8, 10, 0, 11, 1), "dog", 0.95));

    const auto result = semantic_select(gt, props, prior_config{});
    CHECK(result.descriptor.counts.size() == 2);
    CHECK(result.descriptor.counts.at("person") == 1);
    CHECK(result.descriptor.counts.at("motorbike") == 1);
    CHECK(result.selected.size() == 2);
}

TEST_CASE("greedy order: the larger-coverage proposal is selected first") {
    // A covers 60% of gt, B the remaining 40%, both with precision 1
    const auto gt = rect_mask(10, 10, 0, 0, 9, 4);  // 50 pixels
    const auto a = rect_mask(10, 10, 0, 0, 5, 4);   // 30 pixels of gt
    const auto b = rect_mask(10, 10, 6, 0, 9, 4);   // 20 pixels of gt

    prior_config cfg;
    cfg.selection_min_gain = 0.01;
    std::vector<instance_proposal> props;
    props.push_back(make_proposal(b, "cat", 0.9));
    props.push_back(make_proposal(a, "cat", 0.9));

    const auto result = semantic_select(gt, props, cfg);
    REQUIRE(result.selected.size() == 2);
    CHECK(result.selected[0].mask == a);
    CHECK(result.selected[1].mask == b);
    CHECK(result.descriptor.counts.at("cat") == 2);
}

TEST_CASE("selection stops when the marginal gain falls below epsilon") {
    const auto gt = rect_mask(10, 10, 0, 0, 9, 4);
    const auto big = rect_mask(10, 10, 0, 0, 9, 4);
    const auto tiny = rect_mask(10, 10, 0, 0, 0, 0);  // 1 gt pixel, already covered

    prior_config cfg;
    cfg.selection_min_gain = 0.05;
    std::vector<instance_proposal> props;
    props.push_back(make_proposal(big, "cat", 0.9));
    props.push_back(make_proposal(tiny, "cat", 0.9));

    const auto result = semantic_select(gt, props, cfg);
    CHECK(result.selected.size() == 1);
}

TEST_CASE("semantic_select with no qualifying proposal raises selection_empty") {
    const auto gt = rect_mask(8, 8, 0, 0, 3, 3);
    std::vector<instance_proposal> props;
    props.push_back(make_proposal(rect_mask(8, 8, 4, 4, 7, 7), "cat", 0.9));  // precision 0
    CHECK_THROWS_AS(semantic_select(gt, props, prior_config{}), selection_empty);
}

TEST_CASE("semantic_select requires a nonempty gt") {
    std::vector<instance_proposal> props;
    props.push_back(make_proposal(rect_mask(4, 4, 0, 0, 1, 1), "cat", 0.9));
    CHECK_THROWS_AS(semantic_select(binary_mask(4, 4), props, prior_config{}),
                    std::invalid_argument);
}

TEST_CASE("propagation keeps the proposal that agrees with the foreground estimate") {
    semantic_descriptor desc;
    desc.counts["person"] = 1;

    prob_map fg(10, 10, 0.0);
    for (int y = 0; y <= 3; ++y)
        for (int x = 0; x <= 3; ++x) fg.set(x, y, 0.9);

    std::vector<instance_proposal> props;
    props.push_back(make_proposal(rect_mask(10, 10, 6, 6, 9, 9), "person", 0.9));  // mean 0
    props.push_back(make_proposal(rect_mask(10, 10, 0, 0, 3, 3), "person", 0.9));  // mean 0.9

    const auto result = semantic_propagate(desc, props, fg, prior_config{});
    REQUIRE(result.selected.size() == 1);
    CHECK(result.selected[0].mask == props[1].mask);
    CHECK(result.complete());
}

TEST_CASE("single-instance consistency: only one of two identical-looking candidates") {
    semantic_descriptor desc;
    desc.counts["camel"] = 1;

    prob_map fg(12, 12, 0.0);
    for (int y = 2; y <= 5; ++y)
        for (int x = 2; x <= 5; ++x) fg.set(x, y, 0.8);

    std::vector<instance_proposal> props;
    props.push_back(make_proposal(rect_mask(12, 12, 2, 2, 5, 5), "camel", 0.9));
    props.push_back(make_proposal(rect_mask(12, 12, 8, 2, 11, 5), "camel", 0.9));

    const auto result = semantic_propagate(desc, props, fg, prior_config{});
    REQUIRE(result.selected.size() == 1);
    CHECK(result.selected[0].mask == props[0].mask);
}

TEST_CASE("propagation flags a shortfall when the category is missing") {
    semantic_descriptor desc;
    desc.counts["person"] = 1;
    std::vector<instance_proposal> props;
    props.push_back(make_proposal(rect_mask(6, 6, 0, 0, 2, 2), "cat", 0.9));

    const auto result = semantic_propagate(desc, props, prob_map(6, 6, 0.5), prior_config{});
    CHECK(result.selected.empty());
    CHECK_FALSE(result.complete());
    CHECK(result.shortfall.at("person") == 1);
}

TEST_CASE("propagation never exceeds the descriptor counts or categories") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    semantic_descriptor desc;
    desc.counts["a"] = 2;
    desc.counts["b"] = 1;

    for (int trial = 0; trial < 50; ++trial) {
        prob_map fg(8, 8);
        for (auto& v : fg.values) v = u(rng);
        std::vector<instance_proposal> props;
        const char* cats[3] = {"a", "b", "c"};
        const int n = 1 + static_cast<int>(rng() % 8);
        for (int i = 0; i < n; ++i) {
            binary_mask m(8, 8);
            for (auto& bit : m.bits) bit = u(rng) < 0.3 ? 1 : 0;
            props.push_back(make_proposal(m, cats[rng() % 3], u(rng)));
        }
        const auto result = semantic_propagate(desc, props, fg, prior_config{});
        std::map<std::string, int> got;
        for (const auto& p : result.selected) ++got[p.category];
        for (const auto& [cat, count] : got) {
            CHECK(desc.counts.count(cat) == 1);
            CHECK(count <= desc.counts.at(cat));
        }
    }
}

TEST_CASE("propagation is invariant to input order for distinct scores") {
    semantic_descriptor desc;
    desc.counts["x"] = 2;

    prob_map fg(6, 6);
    for (std::size_t i = 0; i < fg.values.size(); ++i)
        fg.values[i] = static_cast<double>(i) / fg.values.size();

    std::vector<instance_proposal> props;
    props.push_back(make_proposal(rect_mask(6, 6, 0, 0, 1, 1), "x", 0.71));
    props.push_back(make_proposal(rect_mask(6, 6, 4, 4, 5, 5), "x", 0.82));
    props.push_back(make_proposal(rect_mask(6, 6, 2, 2, 3, 3), "x", 0.93));

    auto shuffled = props;
    std::reverse(shuffled.begin(), shuffled.end());

    const auto a = semantic_propagate(desc, props, fg, prior_config{});
    const auto b = semantic_propagate(desc, shuffled, fg, prior_config{});
    REQUIRE(a.selected.size() == b.selected.size());
    for (std::size_t i = 0; i < a.selected.size(); ++i)
        CHECK(a.selected[i].mask == b.selected[i].mask);
}

TEST_CASE("propagation picks oracle instances over strictly lower-scoring distractors") {
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    semantic_descriptor desc;
    desc.counts["target"] = 1;

    int correct = 0;
    const int frames = 100;
    for (int frame = 0; frame < frames; ++frame) {
        const int x0 = static_cast<int>(rng() % 6);
        const int y0 = static_cast<int>(rng() % 6);
        const auto truth = rect_mask(12, 12, x0, y0, x0 + 3, y0 + 3);
        prob_map fg(12, 12, 0.05);
        for (int y = 0; y < 12; ++y)
            for (int x = 0; x < 12; ++x)
                if (truth.at(x, y)) fg.set(x, y, 0.9 + 0.05 * u(rng));

        std::vector<instance_proposal> props;
        const int dx = (x0 + 7) % 9, dy = (y0 + 5) % 9;
        props.push_back(make_proposal(rect_mask(12, 12, dx, dy, dx + 2, dy + 2), "target", 0.95));
        props.push_back(make_proposal(truth, "target", 0.8));

        const auto result = semantic_propagate(desc, props, fg, prior_config{});
        REQUIRE(result.selected.size() == 1);
        // exhaustive scoring oracle: recompute both means directly
        double best_mean = -1.0;
        std::size_t best_index = 0;
        for (std::size_t i = 0; i < props.size(); ++i) {
            double sum = 0.0;
            long long cnt = 0;
            for (std::size_t px = 0; px < fg.values.size(); ++px)
                if (props[i].mask.bits[px]) {
                    sum += fg.values[px];
                    ++cnt;
                }
            const double mean = cnt ? sum / cnt : 0.0;
            if (mean > best_mean) {
                best_mean = mean;
                best_index = i;
            }
        }
        if (result.selected[0].mask == props[best_index].mask) ++correct;
        CHECK(result.selected[0].mask == truth);
    }
    CHECK(correct == frames);
}

TEST_CASE("build_prior with sigma 0 is the union indicator") {
    const auto a = rect_mask(8, 8, 0, 0, 3, 3);
    const auto b = rect_mask(8, 8, 2, 2, 5, 5);  // overlaps a
    prior_config cfg;
    cfg.sigma_prior = 0.0;

    std::vector<instance_proposal> selected;
    selected.push_back(make_proposal(a, "x", 0.9));
    selected.push_back(make_proposal(b, "x", 0.9));

    const auto w = build_prior(selected, 8, 8, cfg);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
            CHECK(w.at(x, y) == ((a.at(x, y) || b.at(x, y)) ? 1.0 : 0.0));
}

TEST_CASE("build_prior of an empty selection is the neutral 0.5 map") {
    const auto w = build_prior({}, 5, 4, prior_config{});
    for (double v : w.values) CHECK(v == 0.5);
}

TEST_CASE("build_prior output stays in [0,1] after blurring") {
    std::vector<instance_proposal> selected;
    selected.push_back(make_proposal(rect_mask(16, 16, 4, 4, 11, 11), "x", 0.9));
    prior_config cfg;
    cfg.sigma_prior = 3.0;
    const auto w = build_prior(selected, 16, 16, cfg);
    for (double v : w.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("build_prior rejects mismatched dimensions") {
    std::vector<instance_proposal> selected;
    selected.push_back(make_proposal(rect_mask(4, 4, 0, 0, 1, 1), "x", 0.9));
    CHECK_THROWS_AS(build_prior(selected, 5, 5, prior_config{}), std::invalid_argument);
}

TEST_CASE("descriptor counts mirror the selected categories") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const int w = 10, h = 10;
        binary_mask gt(w, h);
        for (auto& b : gt.bits) b = rng() % 3 == 0 ? 1 : 0;
        if (gt.area() == 0) gt.set(0, 0, true);

        std::vector<instance_proposal> props;
        const char* cats[3] = {"p", "q", "r"};
        for (int i = 0; i < 5; ++i) {
            binary_mask m(w, h);
            for (std::size_t px = 0; px < m.bits.size(); ++px)
                m.bits[px] = gt.bits[px] && rng() % 2 == 0 ? 1 : 0;
            props.push_back(make_proposal(m, cats[rng() % 3], 0.9));
        }
        try {
            prior_config cfg;
            cfg.selection_min_gain = 0.0;
            const auto result = semantic_select(gt, props, cfg);
            std::map<std::string, int> expected;
            for (const auto& p : result.selected) ++expected[p.category];
            CHECK(result.descriptor.counts == expected);
        } catch (const selection_empty&) {
            // acceptable outcome for degenerate draws
        }
    }
}

TEST_CASE("proposal manifest round-trips through JSON and PBM") {
    const auto dir = std::filesystem::temp_directory_path() / "sgv_prior_tests";
    std::filesystem::create_directories(dir);

    const auto mask = rect_mask(6, 5, 1, 1, 4, 3);
    save_mask(dir / "m0.pbm", mask);

    nlohmann::json manifest = nlohmann::json::array();
    manifest.push_back({{"mask_path", "m0.pbm"},
                        {"category", "person"},
                        {"confidence", 0.84},
                        {"instance_id", "target"}});
    std::ofstream(dir / "00000.json") << manifest.dump(2);

    const auto props = load_proposal_manifest(dir / "00000.json");
    REQUIRE(props.size() == 1);
    CHECK(props[0].mask == mask);
    CHECK(props[0].category == "person");
    CHECK(props[0].confidence == 0.84);
    CHECK(props[0].instance_id == "target");

    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_proposal_manifest(dir / "bad.json"), io_error);
}

TEST_CASE("manifest entries are validated") {
    const auto dir = std::filesystem::temp_directory_path() / "sgv_prior_tests";
    std::filesystem::create_directories(dir);
    save_mask(dir / "m1.pbm", rect_mask(4, 4, 0, 0, 1, 1));

    nlohmann::json missing_key = nlohmann::json::array();
    missing_key.push_back({{"mask_path", "m1.pbm"}, {"category", "cat"}});  // no confidence
    std::ofstream(dir / "missing.json") << missing_key.dump();
    CHECK_THROWS_AS(load_proposal_manifest(dir / "missing.json"), io_error);

    nlohmann::json bad_conf = nlohmann::json::array();
    bad_conf.push_back({{"mask_path", "m1.pbm"}, {"category", "cat"}, {"confidence", 1.7}});
    std::ofstream(dir / "badconf.json") << bad_conf.dump();
    CHECK_THROWS_AS(load_proposal_manifest(dir / "badconf.json"), io_error);

    nlohmann::json empty_cat = nlohmann::json::array();
    empty_cat.push_back({{"mask_path", "m1.pbm"}, {"category", ""}, {"confidence", 0.9}});
    std::ofstream(dir / "emptycat.json") << empty_cat.dump();
    CHECK_THROWS_AS(load_proposal_manifest(dir / "emptycat.json"), io_error);
}

TEST_CASE("descriptor JSON round-trip") {
    const auto dir = std::filesystem::temp_directory_path() / "sgv_prior_tests";
    std::filesystem::create_directories(dir);
    semantic_descriptor desc;
    desc.counts["person"] = 2;
    desc.counts["motorbike"] = 1;
    save_descriptor(dir / "desc.json", desc);
    const auto loaded = load_descriptor(dir / "desc.json");
    CHECK(loaded.counts == desc.counts);
}
