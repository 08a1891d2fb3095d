#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "crowdloc/core.hpp"
#include "crowdloc/metrics.hpp"
#include "crowdloc/trainer.hpp"

namespace crowdloc {

// Malformed or missing input; the CLI maps it to exit code 2.
struct BadInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// printf %.6g, locale-independent; pins every number that lands in CSV
// or report output.
std::string format_number(double value);

// Shortest round-trip decimal form, used for JSONL coordinates.
std::string format_coordinate(double value);

// Ground truth JSONL: one {"id": ..., "points": [[x, y], ...]} object
// per line. Predictions JSONL carries [x, y, confidence] triples.
std::vector<Scene> read_ground_truth_jsonl(const std::filesystem::path& path);

// Attaches predictions by scene id. A prediction id absent from the
// ground truth is an error; scenes without a prediction line get an
// empty prediction set.
void merge_predictions_jsonl(std::vector<Scene>& scenes, const std::filesystem::path& path);

void write_ground_truth_jsonl(const std::vector<Scene>& scenes, std::ostream& out);
void write_predictions_jsonl(const std::vector<Scene>& scenes, std::ostream& out);
void write_predictions_line(const std::string& id, const std::vector<Prediction>& predictions,
                            std::ostream& out);

// CSV emitters (LF line endings, header row, %.6g numbers).
void write_ap_table_csv(const NapReport& report, std::ostream& out);  // delta,ap
void write_pr_curves_csv(const std::vector<std::pair<double, PRCurve>>& curves,
                         std::ostream& out);  // delta,recall,precision

struct HistoryRow {
    std::string scene_id;
    TrainStep step;
};
void write_history_csv(const std::vector<HistoryRow>& rows, std::ostream& out);

// Scatter plot of a scene: ground truth in green, predictions in red.
void write_scene_svg(const Scene& scene, double width, double height, std::ostream& out);

}  // namespace crowdloc
