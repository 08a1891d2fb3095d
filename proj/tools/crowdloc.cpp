#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crowdloc/assignment.hpp"
#include "crowdloc/core.hpp"
#include "crowdloc/io.hpp"
#include "crowdloc/metrics.hpp"
#include "crowdloc/proposal.hpp"
#include "crowdloc/synth.hpp"
#include "crowdloc/trainer.hpp"

namespace {

using namespace crowdloc;

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitBadInput = 2;

struct RecipeFlags {
    std::string kind = "uniform";
    int n = 10;
    double width = 128.0;
    double height = 128.0;
    int clusters = 3;
    double spread = 8.0;
    std::uint64_t seed = 0;
    std::string id_prefix = "scene-";
};

void add_recipe_flags(CLI::App* cmd, RecipeFlags& r) {
    cmd->add_option("--kind", r.kind, "scene kind: uniform | clusters | gradient")
        ->check(CLI::IsMember({"uniform", "clusters", "gradient"}));
    cmd->add_option("--n", r.n, "ground-truth points per scene")->check(CLI::NonNegativeNumber);
    cmd->add_option("--width", r.width, "image width, px");
    cmd->add_option("--height", r.height, "image height, px");
    cmd->add_option("--clusters", r.clusters, "cluster count (clusters kind)");
    cmd->add_option("--spread", r.spread, "cluster standard deviation, px");
    cmd->add_option("--seed", r.seed, "base RNG seed");
    cmd->add_option("--id-prefix", r.id_prefix, "scene id prefix");
}

SceneRecipe to_recipe(const RecipeFlags& r, int index) {
    SceneRecipe recipe;
    if (r.kind == "uniform") {
        recipe.kind = RecipeKind::Uniform;
    } else if (r.kind == "clusters") {
        recipe.kind = RecipeKind::GaussianClusters;
    } else {
        recipe.kind = RecipeKind::DensityGradient;
    }
    recipe.n_points = r.n;
    recipe.width = r.width;
    recipe.height = r.height;
    recipe.cluster_count = r.clusters;
    recipe.spread = r.spread;
    // Scene i draws from base_seed + 2i; its corruption from base_seed + 2i + 1.
    recipe.seed = r.seed + 2 * static_cast<std::uint64_t>(index);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%03d", index);
    recipe.id = r.id_prefix + buf;
    return recipe;
}

struct TrainFlags {
    int stride = 8;
    int points_per_cell = 4;
    std::string layout = "grid";
    double gamma = 100.0;
    double tau = 5e-2;
    double lambda1 = 0.5;
    double lambda2 = 2e-4;
    double neg_threshold = -1.0;
    double lr = 1e-2;
    int steps = 400;
    std::string optimizer = "adam";
};

void add_train_flags(CLI::App* cmd, TrainFlags& t) {
    cmd->add_option("--stride", t.stride, "feature stride s, px per cell");
    cmd->add_option("--points-per-cell", t.points_per_cell, "reference points K per cell");
    cmd->add_option("--layout", t.layout, "reference layout: center | grid")
        ->check(CLI::IsMember({"center", "grid"}));
    cmd->add_option("--gamma", t.gamma, "offset scale");
    cmd->add_option("--tau", t.tau, "matching distance weight");
    cmd->add_option("--lambda1", t.lambda1, "negative-class reweight");
    cmd->add_option("--lambda2", t.lambda2, "regression loss weight");
    cmd->add_option("--neg-threshold", t.neg_threshold,
                    "nearest-gt negative radius, px (default stride * 1.5)");
    cmd->add_option("--lr", t.lr, "learning rate");
    cmd->add_option("--steps", t.steps, "optimizer steps")->check(CLI::PositiveNumber);
    cmd->add_option("--optimizer", t.optimizer, "adam | gd")
        ->check(CLI::IsMember({"adam", "gd"}));
}

FeatureGridSpec grid_for(const TrainFlags& t, double width, double height) {
    FeatureGridSpec spec;
    spec.stride = t.stride;
    spec.points_per_cell = t.points_per_cell;
    spec.width = static_cast<int>(std::ceil(width / t.stride));
    spec.height = static_cast<int>(std::ceil(height / t.stride));
    return spec;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // LF line endings everywhere
    if (!out) {
        throw BadInputError("cannot open output file: " + path);
    }
    return out;
}

AssignStrategy parse_strategy(const std::string& name) {
    if (name == "one2one") return AssignStrategy::OneToOne;
    if (name == "nearest-gt") return AssignStrategy::NearestGt;
    return AssignStrategy::NearestProposal;
}

int run_gen(const RecipeFlags& recipe, int scenes, const std::string& out_path,
            const std::string& pred_out, double jitter, double drop, double dup) {
    std::vector<Scene> generated;
    generated.reserve(static_cast<std::size_t>(scenes));
    for (int i = 0; i < scenes; ++i) {
        const SceneRecipe r = to_recipe(recipe, i);
        Scene scene = generate(r);
        if (!pred_out.empty()) {
            scene = corrupt(scene, jitter, drop, dup, r.seed + 1);
        }
        generated.push_back(std::move(scene));
    }
    {
        std::ofstream out = open_output(out_path);
        write_ground_truth_jsonl(generated, out);
    }
    if (!pred_out.empty()) {
        std::ofstream out = open_output(pred_out);
        write_predictions_jsonl(generated, out);
    }
    return kExitOk;
}

int run_eval(const std::string& gt_path, const std::string& pred_path, const NapConfig& cfg,
             double threshold, const std::string& csv_path, const std::string& pr_csv_path) {
    std::vector<Scene> scenes = read_ground_truth_jsonl(gt_path);
    merge_predictions_jsonl(scenes, pred_path);

    const NapReport report = nap_evaluate(scenes, cfg);
    std::vector<std::int64_t> estimates;
    std::vector<std::int64_t> truths;
    std::size_t total_gt = 0;
    for (const Scene& s : scenes) {
        estimates.push_back(static_cast<std::int64_t>(count_scene(s, threshold)));
        truths.push_back(static_cast<std::int64_t>(s.ground_truth.size()));
        total_gt += s.ground_truth.size();
    }
    const CountErrors errors = mae_mse(estimates, truths);
    const PrfSummary prf = localization_prf(scenes, cfg, threshold);

    std::cout << "scenes " << scenes.size() << '\n';
    std::cout << "total_gt " << total_gt << '\n';
    for (const auto& [delta, ap] : report.ap_per_delta) {
        std::cout << "nap delta=" << format_number(delta) << ' ' << format_number(ap) << '\n';
    }
    std::cout << "nap_mean " << format_number(report.nap_mean) << '\n';
    for (std::size_t i = 0; i < report.per_scene_counts.size(); ++i) {
        const SceneCount& c = report.per_scene_counts[i];
        std::cout << "count " << c.scene_id << ' ' << c.ground_truth << ' '
                  << count_scene(scenes[i], threshold) << '\n';
    }
    std::cout << "mae " << format_number(errors.mae) << '\n';
    std::cout << "mse " << format_number(errors.mse) << '\n';
    std::cout << "precision " << format_number(prf.precision) << '\n';
    std::cout << "recall " << format_number(prf.recall) << '\n';
    std::cout << "f1 " << format_number(prf.f1) << '\n';

    if (!csv_path.empty()) {
        std::ofstream out = open_output(csv_path);
        write_ap_table_csv(report, out);
    }
    if (!pr_csv_path.empty()) {
        std::vector<std::pair<double, PRCurve>> curves;
        for (double delta : cfg.delta_sweep) {
            curves.emplace_back(delta, pr_curve(pooled_flags(scenes, cfg, delta), total_gt));
        }
        std::ofstream out = open_output(pr_csv_path);
        write_pr_curves_csv(curves, out);
    }
    return kExitOk;
}

int run_demo(const RecipeFlags& recipe, const TrainFlags& train, const std::string& strategy_name,
             int scenes, const std::string& history_csv, const std::string& points_out,
             const std::string& svg_out) {
    const AssignStrategy strategy = parse_strategy(strategy_name);
    LossParams params;
    params.lambda1 = train.lambda1;
    params.lambda2 = train.lambda2;
    params.tau = train.tau;
    TrainConfig cfg;
    cfg.learning_rate = train.lr;
    cfg.steps = train.steps;
    cfg.optimizer = train.optimizer == "adam" ? OptimizerKind::Adam : OptimizerKind::GradientDescent;
    FitOptions options;
    options.layout = train.layout == "grid" ? LayoutKind::Grid : LayoutKind::Center;
    options.decode.gamma = train.gamma;
    options.neg_threshold = train.neg_threshold;

    std::vector<HistoryRow> rows;
    std::ofstream points_stream;
    if (!points_out.empty()) points_stream = open_output(points_out);
    std::ofstream svg_stream;
    if (!svg_out.empty()) svg_stream = open_output(svg_out);

    for (int i = 0; i < scenes; ++i) {
        const SceneRecipe r = to_recipe(recipe, i);
        const Scene scene = generate(r);
        cfg.seed = r.seed + 1;
        const FeatureGridSpec spec = grid_for(train, recipe.width, recipe.height);
        const FitResult fit = fit_scene(scene, spec, cfg, params, strategy, options);

        for (const TrainStep& step : fit.history) {
            rows.push_back({scene.id, step});
        }
        const auto decoded = decode(fit.model, options.decode);
        std::size_t count = 0;
        for (const Prediction& p : decoded) {
            if (p.confidence > 0.5) ++count;
        }
        const std::size_t positives = fit.history.empty() ? 0 : fit.history.back().positive_count;
        std::cout << "scene " << scene.id << " gt " << scene.ground_truth.size() << " count "
                  << count << " positives " << positives << '\n';

        if (points_stream.is_open()) {
            write_predictions_line(scene.id, decoded, points_stream);
        }
        if (svg_stream.is_open()) {
            Scene annotated = scene;
            annotated.predictions = decoded;
            write_scene_svg(annotated, recipe.width, recipe.height, svg_stream);
        }
    }
    if (!history_csv.empty()) {
        std::ofstream out = open_output(history_csv);
        write_history_csv(rows, out);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"point-based crowd localization toolkit"};
    app.require_subcommand(1);

    // gen
    RecipeFlags gen_recipe;
    int gen_scenes = 1;
    std::string gen_out;
    std::string gen_pred_out;
    double gen_jitter = 0.0;
    double gen_drop = 0.0;
    double gen_dup = 0.0;
    CLI::App* gen_cmd = app.add_subcommand("gen", "generate synthetic scene fixtures");
    add_recipe_flags(gen_cmd, gen_recipe);
    gen_cmd->add_option("--scenes", gen_scenes, "number of scenes")->check(CLI::PositiveNumber);
    gen_cmd->add_option("--out", gen_out, "ground-truth JSONL path")->required();
    gen_cmd->add_option("--pred-out", gen_pred_out, "corrupted predictions JSONL path");
    gen_cmd->add_option("--jitter", gen_jitter, "prediction jitter sigma, px");
    gen_cmd->add_option("--drop", gen_drop, "drop rate in [0,1]");
    gen_cmd->add_option("--dup", gen_dup, "duplicate rate in [0,1]");

    // eval
    std::string eval_gt;
    std::string eval_pred;
    NapConfig eval_cfg;
    double eval_threshold = 0.5;
    std::string eval_csv;
    std::string eval_pr_csv;
    std::vector<double> eval_sweep;
    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a prediction file");
    eval_cmd->add_option("--gt", eval_gt, "ground-truth JSONL")->required();
    eval_cmd->add_option("--pred", eval_pred, "predictions JSONL")->required();
    eval_cmd->add_option("--delta", eval_cfg.delta, "localization threshold");
    eval_cmd->add_option("--delta-sweep", eval_sweep, "sweep deltas, ascending")
        ->delimiter(',');
    eval_cmd->add_option("--k", eval_cfg.k, "density neighbor count");
    eval_cmd->add_option("--fallback-radius", eval_cfg.knn_fallback_radius,
                         "density scale for single-point scenes, px");
    eval_cmd->add_option("--threshold", eval_threshold, "counting confidence threshold");
    eval_cmd->add_option("--out-csv", eval_csv, "per-delta AP table CSV path");
    eval_cmd->add_option("--pr-csv", eval_pr_csv, "PR curve CSV path");

    // match-demo
    RecipeFlags match_recipe;
    match_recipe.kind = "clusters";
    match_recipe.n = 30;
    match_recipe.spread = 5.0;
    TrainFlags match_train;
    std::string match_strategy;
    std::string match_csv;
    CLI::App* match_cmd =
        app.add_subcommand("match-demo", "train one scene under a target-assignment strategy");
    match_cmd
        ->add_option("--strategy", match_strategy,
                     "one2one | nearest-gt | nearest-proposal")
        ->required()
        ->check(CLI::IsMember({"one2one", "nearest-gt", "nearest-proposal"}));
    add_recipe_flags(match_cmd, match_recipe);
    add_train_flags(match_cmd, match_train);
    match_cmd->add_option("--out-csv", match_csv, "per-step history CSV path");

    // train-demo
    RecipeFlags train_recipe;
    train_recipe.kind = "clusters";
    train_recipe.n = 30;
    train_recipe.spread = 5.0;
    TrainFlags train_train;
    std::string train_strategy = "one2one";
    int train_scenes = 1;
    std::string train_csv;
    std::string train_points;
    std::string train_svg;
    CLI::App* train_cmd = app.add_subcommand("train-demo", "run the desk-scale optimizer");
    train_cmd
        ->add_option("--strategy", train_strategy, "one2one | nearest-gt | nearest-proposal")
        ->check(CLI::IsMember({"one2one", "nearest-gt", "nearest-proposal"}));
    add_recipe_flags(train_cmd, train_recipe);
    add_train_flags(train_cmd, train_train);
    train_cmd->add_option("--scenes", train_scenes, "number of scenes")
        ->check(CLI::PositiveNumber);
    train_cmd->add_option("--history-csv", train_csv, "loss/count history CSV path");
    train_cmd->add_option("--points-out", train_points, "final decoded points JSONL path");
    train_cmd->add_option("--svg", train_svg, "scatter SVG path (GT green, predictions red)");

    // flat key=value config per subcommand; command-line flags win
    for (CLI::App* sub : {gen_cmd, eval_cmd, match_cmd, train_cmd}) {
        sub->set_config("--config");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadInput;
    }

    try {
        if (app.got_subcommand(gen_cmd)) {
            return run_gen(gen_recipe, gen_scenes, gen_out, gen_pred_out, gen_jitter, gen_drop,
                           gen_dup);
        }
        if (app.got_subcommand(eval_cmd)) {
            if (!eval_sweep.empty()) eval_cfg.delta_sweep = eval_sweep;
            return run_eval(eval_gt, eval_pred, eval_cfg, eval_threshold, eval_csv, eval_pr_csv);
        }
        if (app.got_subcommand(match_cmd)) {
            return run_demo(match_recipe, match_train, match_strategy, 1, match_csv, "", "");
        }
        if (app.got_subcommand(train_cmd)) {
            return run_demo(train_recipe, train_train, train_strategy, train_scenes, train_csv,
                            train_points, train_svg);
        }
    } catch (const BadInputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}
