#include "crowdloc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <json.hpp>

namespace crowdloc {

namespace {

using nlohmann::json;

std::string path_str(const std::filesystem::path& p) { return p.string(); }

json parse_line(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                            ": malformed JSON object");
    }
    return j;
}

std::string read_id(const json& j, const std::filesystem::path& path, std::size_t lineno) {
    if (!j.contains("id") || !j.at("id").is_string() || j.at("id").get<std::string>().empty()) {
        throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                            ": missing or empty \"id\"");
    }
    return j.at("id").get<std::string>();
}

double read_finite_number(const json& v, const std::filesystem::path& path, std::size_t lineno) {
    if (!v.is_number()) {
        throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                            ": coordinates must be numbers");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                            ": coordinates must be finite");
    }
    return x;
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw BadInputError("cannot open input file: " + path_str(path));
    }
    return in;
}

json points_array(const json& j, const std::filesystem::path& path, std::size_t lineno) {
    if (!j.contains("points") || !j.at("points").is_array()) {
        throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                            ": missing \"points\" array");
    }
    return j.at("points");
}

}  // namespace

std::string format_number(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 6);
    return std::string(buf, res.ptr);
}

std::string format_coordinate(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::vector<Scene> read_ground_truth_jsonl(const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    std::vector<Scene> scenes;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = parse_line(line, path, lineno);
        Scene scene;
        scene.id = read_id(j, path, lineno);
        for (const json& pt : points_array(j, path, lineno)) {
            if (!pt.is_array() || pt.size() != 2) {
                throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                                    ": ground-truth points must be [x, y] pairs");
            }
            scene.ground_truth.push_back({read_finite_number(pt[0], path, lineno),
                                          read_finite_number(pt[1], path, lineno)});
        }
        scenes.push_back(std::move(scene));
    }
    return scenes;
}

void merge_predictions_jsonl(std::vector<Scene>& scenes, const std::filesystem::path& path) {
    std::ifstream in = open_input(path);
    for (Scene& s : scenes) {
        s.predictions.emplace();  // absent prediction ids mean zero predictions
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const json j = parse_line(line, path, lineno);
        const std::string id = read_id(j, path, lineno);
        Scene* scene = nullptr;
        for (Scene& s : scenes) {
            if (s.id == id) {
                scene = &s;
                break;
            }
        }
        if (scene == nullptr) {
            throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                                ": prediction id \"" + id + "\" has no ground-truth scene");
        }
        for (const json& pt : points_array(j, path, lineno)) {
            if (!pt.is_array() || pt.size() != 3) {
                throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                                    ": predictions must be [x, y, confidence] triples");
            }
            const double conf = read_finite_number(pt[2], path, lineno);
            if (conf < 0.0 || conf > 1.0) {
                throw BadInputError(path_str(path) + ":" + std::to_string(lineno) +
                                    ": confidence must lie in [0, 1]");
            }
            scene->predictions->push_back({{read_finite_number(pt[0], path, lineno),
                                            read_finite_number(pt[1], path, lineno)},
                                           conf});
        }
    }
}

void write_ground_truth_jsonl(const std::vector<Scene>& scenes, std::ostream& out) {
    for (const Scene& s : scenes) {
        json points = json::array();
        for (const Point& p : s.ground_truth) {
            points.push_back(json::array({p.x, p.y}));
        }
        out << json{{"id", s.id}, {"points", points}}.dump() << '\n';
    }
}

void write_predictions_line(const std::string& id, const std::vector<Prediction>& predictions,
                            std::ostream& out) {
    json points = json::array();
    for (const Prediction& p : predictions) {
        points.push_back(json::array({p.point.x, p.point.y, p.confidence}));
    }
    out << json{{"id", id}, {"points", points}}.dump() << '\n';
}

void write_predictions_jsonl(const std::vector<Scene>& scenes, std::ostream& out) {
    for (const Scene& s : scenes) {
        write_predictions_line(s.id, s.predictions ? *s.predictions : std::vector<Prediction>{},
                               out);
    }
}

void write_ap_table_csv(const NapReport& report, std::ostream& out) {
    out << "delta,ap\n";
    for (const auto& [delta, ap] : report.ap_per_delta) {
        out << format_number(delta) << ',' << format_number(ap) << '\n';
    }
}

void write_pr_curves_csv(const std::vector<std::pair<double, PRCurve>>& curves,
                         std::ostream& out) {
    out << "delta,recall,precision\n";
    for (const auto& [delta, curve] : curves) {
        for (const PRPoint& p : curve.points) {
            out << format_number(delta) << ',' << format_number(p.recall) << ','
                << format_number(p.precision) << '\n';
        }
    }
}

void write_history_csv(const std::vector<HistoryRow>& rows, std::ostream& out) {
    out << "scene,step,l_cls,l_loc,total,count,positives\n";
    for (const HistoryRow& r : rows) {
        out << r.scene_id << ',' << r.step.step << ',' << format_number(r.step.loss.l_cls) << ','
            << format_number(r.step.loss.l_loc) << ',' << format_number(r.step.loss.total) << ','
            << r.step.thresholded_count << ',' << r.step.positive_count << '\n';
    }
}

void write_scene_svg(const Scene& scene, double width, double height, std::ostream& out) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(width)
        << "\" height=\"" << format_number(height) << "\" viewBox=\"0 0 "
        << format_number(width) << ' ' << format_number(height) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (const Point& p : scene.ground_truth) {
        out << "<circle cx=\"" << format_number(p.x) << "\" cy=\"" << format_number(p.y)
            << "\" r=\"2\" fill=\"green\"/>\n";
    }
    if (scene.predictions) {
        for (const Prediction& p : *scene.predictions) {
            out << "<circle cx=\"" << format_number(p.point.x) << "\" cy=\""
                << format_number(p.point.y) << "\" r=\"1.2\" fill=\"red\" fill-opacity=\""
                << format_number(std::min(1.0, 0.25 + 0.75 * p.confidence)) << "\"/>\n";
        }
    }
    out << "</svg>\n";
}

}  // namespace crowdloc
