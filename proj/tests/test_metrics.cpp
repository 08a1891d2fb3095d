#include <doctest.h>

#include <cstring>

#include "crowdloc/metrics.hpp"
#include "crowdloc/synth.hpp"
#include "oracles.hpp"

using namespace crowdloc;

namespace {

Scene scene_with(std::vector<Point> gt, std::vector<Prediction> preds, std::string id = "s") {
    Scene s;
    s.id = std::move(id);
    s.ground_truth = std::move(gt);
    s.predictions = std::move(preds);
    return s;
}

Scene perfect_scene(const Scene& gt_only) {
    Scene s = gt_only;
    s.predictions.emplace();
    for (const Point& p : s.ground_truth) s.predictions->push_back({p, 1.0});
    return s;
}

}  // namespace

TEST_SUITE_BEGIN("metrics");

TEST_CASE("sequential association marks exact hits as TPs") {
    const Scene s = scene_with({{0, 0}, {100, 100}},
                               {{{0, 0}, 0.9}, {{100, 100}, 0.8}});
    const auto ctx = knn_density(s.ground_truth, 3);
    const auto flags = sequential_associate(s, ctx, 0.5);
    REQUIRE(flags.size() == 2);
    CHECK(flags[0].is_tp);
    CHECK(flags[1].is_tp);
}

TEST_CASE("a ground truth point is consumed once") {
    const Scene s = scene_with({{0, 0}, {100, 100}},
                               {{{1, 0}, 0.9}, {{0, 1}, 0.8}});
    const auto ctx = knn_density(s.ground_truth, 3);
    const auto flags = sequential_associate(s, ctx, 0.5);
    REQUIRE(flags.size() == 2);
    CHECK(flags[0].is_tp);        // higher confidence associates first
    CHECK_FALSE(flags[1].is_tp);  // same GT already consumed
}

TEST_CASE("sequential association equals the per-rank recheck oracle") {
    oracles::TestRng rng(314);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Point> gt;
        for (int i = 0; i < 20; ++i) gt.push_back({rng.uniform() * 80, rng.uniform() * 80});
        std::vector<Prediction> preds;
        for (int i = 0; i < 20; ++i) {
            preds.push_back({{rng.uniform() * 80, rng.uniform() * 80}, rng.uniform()});
        }
        const Scene s = scene_with(gt, preds);
        const auto ctx = knn_density(gt, 3);
        for (double delta : {0.25, 0.5, 1.0}) {
            const auto got = sequential_associate(s, ctx, delta);
            const auto expected = oracles::sequential_recheck(s, ctx.d_knn, delta);
            REQUIRE(got.size() == expected.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                CHECK(got[i].is_tp == expected[i].is_tp);
                CHECK(got[i].confidence == expected[i].confidence);
            }
        }
    }
}

TEST_CASE("greedy and sequential disagree when rank and distance conflict") {
    // Second GT point far away pins d_knn; the low-confidence prediction
    // sits closer to the contested GT than the high-confidence one.
    const Scene s = scene_with({{0, 0}, {50, 0}},
                               {{{4, 0}, 0.9}, {{1, 0}, 0.8}});
    const auto ctx = knn_density(s.ground_truth, 3);
    const auto seq = sequential_associate(s, ctx, 0.2);
    const auto greedy = greedy_associate(s, ctx, 0.2);
    REQUIRE(seq.size() == 2);
    CHECK(seq[0].is_tp);         // confidence 0.9 grabs the GT first
    CHECK_FALSE(seq[1].is_tp);
    CHECK_FALSE(greedy[0].is_tp);  // distance order flips the outcome
    CHECK(greedy[1].is_tp);
}

TEST_CASE("greedy equals sequential on uncontested scenes") {
    const Scene s = scene_with({{0, 0}, {100, 100}},
                               {{{0, 0}, 0.9}, {{100, 100}, 0.8}});
    const auto ctx = knn_density(s.ground_truth, 3);
    const auto seq = sequential_associate(s, ctx, 0.5);
    const auto greedy = greedy_associate(s, ctx, 0.5);
    REQUIRE(seq.size() == greedy.size());
    for (std::size_t i = 0; i < seq.size(); ++i) CHECK(seq[i].is_tp == greedy[i].is_tp);
    CHECK(greedy_associate(scene_with({{0, 0}}, {}), ctx, 0.5).empty());
}

TEST_CASE("average precision on hand-built rankings") {
    CHECK(average_precision({{0.9, true}, {0.8, false}}, 1) == 1.0);
    CHECK(average_precision({{0.9, false}, {0.8, true}}, 1) == 0.5);
    CHECK(average_precision({{0.9, true}, {0.8, true}}, 2) == 1.0);
    CHECK(average_precision({}, 5) == 0.0);
    // zero-GT conventions
    CHECK(average_precision({}, 0) == 1.0);
    CHECK(average_precision({{0.9, false}}, 0) == 0.0);
}

TEST_CASE("average precision equals the envelope recheck oracle") {
    oracles::TestRng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<RankedFlag> flags;
        const int n = static_cast<int>(rng.range(0, 25));
        int tps = 0;
        for (int i = 0; i < n; ++i) {
            const bool tp = rng.uniform() < 0.4;
            tps += tp ? 1 : 0;
            flags.push_back({1.0 - 0.01 * i, tp});
        }
        const std::size_t total_gt = static_cast<std::size_t>(tps + rng.range(0, 10));
        if (total_gt == 0) continue;
        CHECK(average_precision(flags, total_gt) ==
              doctest::Approx(oracles::average_precision_recheck(flags, total_gt))
                  .epsilon(1e-14));
    }
}

TEST_CASE("flipping a TP to FP never raises AP") {
    oracles::TestRng rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<RankedFlag> flags;
        for (int i = 0; i < 15; ++i) flags.push_back({1.0 - 0.01 * i, rng.uniform() < 0.5});
        const double base = average_precision(flags, 10);
        for (std::size_t i = 0; i < flags.size(); ++i) {
            if (!flags[i].is_tp) continue;
            auto flipped = flags;
            flipped[i].is_tp = false;
            CHECK(average_precision(flipped, 10) <= base);
        }
    }
}

TEST_CASE("PR curve bookkeeping") {
    const auto curve = pr_curve({{0.9, true}, {0.8, false}, {0.7, true}}, 2);
    REQUIRE(curve.points.size() == 3);
    CHECK(curve.points[0].recall == 0.5);
    CHECK(curve.points[0].precision == 1.0);
    CHECK(curve.points[1].recall == 0.5);
    CHECK(curve.points[1].precision == 0.5);
    CHECK(curve.points[2].recall == 1.0);
    CHECK(curve.points[2].precision == doctest::Approx(2.0 / 3.0));
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].recall >= curve.points[i - 1].recall);
    }
}

TEST_CASE("nap identities on perfect and empty predictors") {
    std::vector<Scene> scenes;
    oracles::TestRng rng(15);
    for (int s = 0; s < 4; ++s) {
        std::vector<Point> gt;
        for (int i = 0; i < 12; ++i) gt.push_back({rng.uniform() * 100, rng.uniform() * 100});
        scenes.push_back(perfect_scene(scene_with(gt, {}, "s" + std::to_string(s))));
    }
    const NapConfig cfg;
    auto report = nap_evaluate(scenes, cfg);
    for (const auto& [delta, ap] : report.ap_per_delta) CHECK(ap == 1.0);
    CHECK(report.nap_mean == 1.0);

    for (Scene& s : scenes) s.predictions.emplace();
    report = nap_evaluate(scenes, cfg);
    for (const auto& [delta, ap] : report.ap_per_delta) CHECK(ap == 0.0);
    CHECK(report.nap_mean == 0.0);
}

TEST_CASE("nap is invariant under confidence rescaling") {
    oracles::TestRng rng(21);
    std::vector<Scene> scenes;
    for (int s = 0; s < 3; ++s) {
        SceneRecipe recipe;
        recipe.kind = RecipeKind::Uniform;
        recipe.n_points = 25;
        recipe.seed = 100 + static_cast<std::uint64_t>(s);
        recipe.id = "r" + std::to_string(s);
        scenes.push_back(corrupt(generate(recipe), 3.0, 0.1, 0.1, recipe.seed + 1));
    }
    const NapConfig cfg;
    const auto base = nap_evaluate(scenes, cfg);

    auto rescaled = scenes;
    for (Scene& s : rescaled) {
        for (Prediction& p : *s.predictions) {
            p.confidence = p.confidence * p.confidence * 0.5 + 0.2 * p.confidence;  // strictly increasing on [0,1]
        }
    }
    const auto report = nap_evaluate(rescaled, cfg);
    for (std::size_t i = 0; i < report.ap_per_delta.size(); ++i) {
        CHECK(report.ap_per_delta[i].second == base.ap_per_delta[i].second);
    }
}

TEST_CASE("nap is bit-exact under power-of-two coordinate scaling") {
    std::vector<Scene> scenes;
    for (int s = 0; s < 3; ++s) {
        SceneRecipe recipe;
        recipe.kind = RecipeKind::GaussianClusters;
        recipe.n_points = 20;
        recipe.seed = 55 + static_cast<std::uint64_t>(s);
        recipe.id = "c" + std::to_string(s);
        scenes.push_back(corrupt(generate(recipe), 2.0, 0.0, 0.0, recipe.seed + 7));
    }
    const NapConfig cfg;
    const auto base = nap_evaluate(scenes, cfg);

    auto scaled = scenes;
    for (Scene& s : scaled) {
        for (Point& p : s.ground_truth) {
            p.x *= 2.0;
            p.y *= 2.0;
        }
        for (Prediction& p : *s.predictions) {
            p.point.x *= 2.0;
            p.point.y *= 2.0;
        }
    }
    const auto report = nap_evaluate(scaled, cfg);
    for (std::size_t i = 0; i < report.ap_per_delta.size(); ++i) {
        CHECK(report.ap_per_delta[i].second == base.ap_per_delta[i].second);
    }
    CHECK(report.nap_mean == base.nap_mean);
}

TEST_CASE("duplicates on a matched GT cost precision") {
    // baseline: both GT hit, one late FP far away
    Scene s = scene_with({{0, 0}, {40, 0}},
                         {{{0, 0}, 0.9}, {{40, 0}, 0.85}, {{200, 200}, 0.1}});
    const NapConfig cfg;
    const auto base = nap_evaluate({s}, cfg);

    // duplicate prediction on the first GT, ranked between the two TPs
    s.predictions->push_back({{0.5, 0}, 0.87});
    const auto with_dup = nap_evaluate({s}, cfg);
    for (std::size_t i = 0; i < base.ap_per_delta.size(); ++i) {
        CHECK(with_dup.ap_per_delta[i].second < base.ap_per_delta[i].second);
    }
}

TEST_CASE("count_scene uses a strict threshold") {
    const Scene s = scene_with({}, {{{0, 0}, 0.9}, {{1, 1}, 0.6}, {{2, 2}, 0.4}});
    CHECK(count_scene(s) == 2);
    CHECK(count_scene(s, 0.95) == 0);
    const Scene t = scene_with({}, {{{0, 0}, 0.5}});
    CHECK(count_scene(t) == 0);  // exactly 0.5 is excluded
}

TEST_CASE("mae and mse over per-scene counts") {
    CHECK(mae_mse({5, 7}, {5, 7}).mae == 0.0);
    CHECK(mae_mse({5, 7}, {5, 7}).mse == 0.0);
    CHECK(mae_mse({3}, {7}).mae == 4.0);
    CHECK(mae_mse({3}, {7}).mse == 4.0);
    const auto e = mae_mse({1, 5}, {2, 9});
    CHECK(e.mae == 2.5);
    CHECK(e.mse == doctest::Approx(std::sqrt(8.5)).epsilon(1e-12));
    CHECK_THROWS_AS(mae_mse({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(mae_mse({1}, {1, 2}), std::invalid_argument);
}

TEST_CASE("localization precision/recall/f1") {
    const NapConfig cfg;
    std::vector<Scene> scenes{perfect_scene(scene_with({{0, 0}, {50, 50}, {100, 0}}, {}))};
    auto prf = localization_prf(scenes, cfg, 0.5);
    CHECK(prf.precision == 1.0);
    CHECK(prf.recall == 1.0);
    CHECK(prf.f1 == 1.0);

    // nothing passes the threshold
    scenes[0].predictions->clear();
    scenes[0].predictions->push_back({{0, 0}, 0.2});
    prf = localization_prf(scenes, cfg, 0.5);
    CHECK(prf.precision == 0.0);
    CHECK(prf.recall == 0.0);
    CHECK(prf.f1 == 0.0);

    // half the GT hit exactly, no extras
    Scene half = scene_with({{0, 0}, {10, 0}, {0, 10}, {10, 10}},
                            {{{0, 0}, 0.9}, {{10, 0}, 0.9}});
    prf = localization_prf({half}, cfg, 0.5);
    CHECK(prf.precision == 1.0);
    CHECK(prf.recall == 0.5);
    CHECK(prf.f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("zero-GT scenes contribute false positives only") {
    // Equal confidences force the pooled tie-break: "fp-only" sorts
    // before "ok", so the FP takes rank 0 at every delta.
    const Scene empty_gt = scene_with({}, {{{5, 5}, 1.0}}, "fp-only");
    const Scene normal = perfect_scene(scene_with({{0, 0}, {60, 60}}, {}, "ok"));
    const auto report = nap_evaluate({empty_gt, normal}, NapConfig{});
    for (const auto& [delta, ap] : report.ap_per_delta) {
        CHECK(ap == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    }
}

TEST_SUITE_END();
