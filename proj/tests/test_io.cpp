#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "crowdloc/io.hpp"
#include "crowdloc/synth.hpp"
#include "oracles.hpp"

using namespace crowdloc;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("crowdloc-test-" + std::to_string(::getpid()) + "-" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    fs::path file(const std::string& name) const { return path / name; }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST_SUITE_BEGIN("io");

TEST_CASE("numbers print with six significant digits") {
    CHECK(format_number(0.8333333333333) == "0.833333");
    CHECK(format_number(5.0) == "5");
    CHECK(format_number(1234567.0) == "1.23457e+06");
    CHECK(format_number(0.05) == "0.05");
    CHECK(format_number(0.05 * 3) == "0.15");
    CHECK(format_number(0.0) == "0");
}

TEST_CASE("scenes round-trip through JSONL field-exactly") {
    TempDir dir;
    std::vector<Scene> scenes;
    for (int s = 0; s < 3; ++s) {
        SceneRecipe recipe;
        recipe.kind = RecipeKind::Uniform;
        recipe.n_points = 15;
        recipe.seed = 700 + static_cast<std::uint64_t>(s);
        recipe.id = "rt-" + std::to_string(s);
        scenes.push_back(corrupt(generate(recipe), 1.5, 0.2, 0.2, recipe.seed + 1));
    }

    {
        std::ofstream gt(dir.file("gt.jsonl"), std::ios::binary);
        write_ground_truth_jsonl(scenes, gt);
        std::ofstream pred(dir.file("pred.jsonl"), std::ios::binary);
        write_predictions_jsonl(scenes, pred);
    }

    auto loaded = read_ground_truth_jsonl(dir.file("gt.jsonl"));
    merge_predictions_jsonl(loaded, dir.file("pred.jsonl"));
    REQUIRE(loaded.size() == scenes.size());
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        CHECK(loaded[s].id == scenes[s].id);
        REQUIRE(loaded[s].ground_truth.size() == scenes[s].ground_truth.size());
        for (std::size_t i = 0; i < scenes[s].ground_truth.size(); ++i) {
            CHECK(loaded[s].ground_truth[i].x == scenes[s].ground_truth[i].x);
            CHECK(loaded[s].ground_truth[i].y == scenes[s].ground_truth[i].y);
        }
        REQUIRE(loaded[s].predictions->size() == scenes[s].predictions->size());
        for (std::size_t i = 0; i < scenes[s].predictions->size(); ++i) {
            CHECK((*loaded[s].predictions)[i].point.x == (*scenes[s].predictions)[i].point.x);
            CHECK((*loaded[s].predictions)[i].point.y == (*scenes[s].predictions)[i].point.y);
            CHECK((*loaded[s].predictions)[i].confidence ==
                  (*scenes[s].predictions)[i].confidence);
        }
    }
}

TEST_CASE("prediction ids must exist in the ground truth") {
    TempDir dir;
    write_file(dir.file("gt.jsonl"), "{\"id\": \"a\", \"points\": [[1, 2]]}\n");
    write_file(dir.file("pred.jsonl"), "{\"id\": \"b\", \"points\": [[1, 2, 0.5]]}\n");
    auto scenes = read_ground_truth_jsonl(dir.file("gt.jsonl"));
    CHECK_THROWS_AS(merge_predictions_jsonl(scenes, dir.file("pred.jsonl")), BadInputError);
}

TEST_CASE("ground truth without a prediction line means zero predictions") {
    TempDir dir;
    write_file(dir.file("gt.jsonl"),
               "{\"id\": \"a\", \"points\": [[1, 2]]}\n{\"id\": \"b\", \"points\": []}\n");
    write_file(dir.file("pred.jsonl"), "{\"id\": \"a\", \"points\": [[1, 2, 0.9]]}\n");
    auto scenes = read_ground_truth_jsonl(dir.file("gt.jsonl"));
    merge_predictions_jsonl(scenes, dir.file("pred.jsonl"));
    CHECK(scenes[0].predictions->size() == 1);
    CHECK(scenes[1].predictions->size() == 0);
}

TEST_CASE("malformed input is reported with the offending path") {
    TempDir dir;
    const fs::path missing = dir.file("missing.jsonl");
    try {
        read_ground_truth_jsonl(missing);
        FAIL("expected BadInputError");
    } catch (const BadInputError& e) {
        CHECK(std::string(e.what()).find("missing.jsonl") != std::string::npos);
    }

    write_file(dir.file("bad.jsonl"), "{\"id\": \"a\", \"points\": [[1, 2]]}\nnot json\n");
    CHECK_THROWS_AS(read_ground_truth_jsonl(dir.file("bad.jsonl")), BadInputError);

    write_file(dir.file("badpt.jsonl"), "{\"id\": \"a\", \"points\": [[1]]}\n");
    CHECK_THROWS_AS(read_ground_truth_jsonl(dir.file("badpt.jsonl")), BadInputError);

    write_file(dir.file("badconf.jsonl"), "{\"id\": \"a\", \"points\": [[1, 2]]}\n");
    write_file(dir.file("badconf_pred.jsonl"), "{\"id\": \"a\", \"points\": [[1, 2, 1.5]]}\n");
    auto scenes = read_ground_truth_jsonl(dir.file("badconf.jsonl"));
    CHECK_THROWS_AS(merge_predictions_jsonl(scenes, dir.file("badconf_pred.jsonl")),
                    BadInputError);
}

TEST_CASE("csv emitters pin their shapes") {
    NapReport report;
    report.ap_per_delta = {{0.05, 0.5}, {0.1, 2.0 / 3.0}};
    std::ostringstream ap;
    write_ap_table_csv(report, ap);
    CHECK(ap.str() == "delta,ap\n0.05,0.5\n0.1,0.666667\n");

    std::ostringstream pr;
    write_pr_curves_csv({{0.5, pr_curve({{0.9, true}, {0.8, false}}, 2)}}, pr);
    CHECK(pr.str() == "delta,recall,precision\n0.5,0.5,1\n0.5,0.5,0.5\n");

    std::ostringstream hist;
    TrainStep step;
    step.step = 1;
    step.loss = {0.5, 2.0, 0.5004};
    step.thresholded_count = 3;
    step.positive_count = 4;
    write_history_csv({{"s0", step}}, hist);
    CHECK(hist.str() == "scene,step,l_cls,l_loc,total,count,positives\ns0,1,0.5,2,0.5004,3,4\n");
}

TEST_CASE("svg output colors ground truth green and predictions red") {
    Scene s;
    s.id = "svg";
    s.ground_truth = {{10, 20}};
    s.predictions = std::vector<Prediction>{{{30, 40}, 0.9}};
    std::ostringstream out;
    write_scene_svg(s, 128, 128, out);
    const std::string svg = out.str();
    CHECK(svg.find("fill=\"green\"") != std::string::npos);
    CHECK(svg.find("fill=\"red\"") != std::string::npos);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("cx=\"10\"") != std::string::npos);
    CHECK(svg.find("cx=\"30\"") != std::string::npos);
}

TEST_SUITE_END();
