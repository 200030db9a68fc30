#include "repoloc/jsonl.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

using ordered_json = nlohmann::ordered_json;

namespace repoloc::io {

std::vector<std::string> read_jsonl_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("missing_file", "cannot open " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            lines.push_back(line);
        }
    }
    return lines;
}

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("unwritable_file", "cannot write " + path.string());
    }
    for (const std::string& line : lines) {
        out << line << "\n";
    }
}

std::vector<metrics::RankedPrediction> load_predictions(const std::filesystem::path& path,
                                                        metrics::Level level) {
    std::vector<metrics::RankedPrediction> predictions;
    size_t line_number = 0;
    for (const std::string& line : read_jsonl_lines(path)) {
        ++line_number;
        ordered_json doc;
        try {
            doc = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("bad_prediction_line", path.string() + " line " +
                                                   std::to_string(line_number) +
                                                   ": not JSON: " + e.what());
        }
        metrics::RankedPrediction prediction;
        prediction.level = level;
        try {
            prediction.query_id = doc.at("query_id").get<std::string>();
            const char* key = level == metrics::Level::File ? "files" : "functions";
            std::set<std::string> seen;
            for (const ordered_json& raw : doc.value(key, ordered_json::array())) {
                std::string canonical;
                if (level == metrics::Level::File) {
                    canonical = normalize_path(raw.get<std::string>());
                } else {
                    canonical = normalize_identifier(raw.get<std::string>()).canonical();
                }
                if (!seen.insert(canonical).second) {
                    throw Error("bad_prediction_line",
                                path.string() + " line " + std::to_string(line_number) +
                                    ": duplicate item '" + canonical + "'");
                }
                prediction.items.push_back(std::move(canonical));
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error("bad_prediction_line", path.string() + " line " +
                                                   std::to_string(line_number) + ": " +
                                                   e.what());
        } catch (const MalformedIdentifier& e) {
            throw Error("bad_prediction_line", path.string() + " line " +
                                                   std::to_string(line_number) + ": " +
                                                   e.what());
        }
        predictions.push_back(std::move(prediction));
    }
    return predictions;
}

std::vector<metrics::GroundTruth> load_ground_truths(const std::filesystem::path& path) {
    std::vector<metrics::GroundTruth> truths;
    size_t line_number = 0;
    for (const std::string& line : read_jsonl_lines(path)) {
        ++line_number;
        try {
            ordered_json doc = ordered_json::parse(line);
            metrics::GroundTruth truth;
            truth.query_id = doc.at("query_id").get<std::string>();
            truth.files = doc.value("files", std::vector<std::string>{});
            for (const ordered_json& raw : doc.value("functions", ordered_json::array())) {
                NormalizedItem item = normalize_identifier(raw.get<std::string>());
                truth.functions.push_back(FunctionIdentifier{item.path, item.name});
            }
            truths.push_back(std::move(truth));
        } catch (const nlohmann::json::exception& e) {
            throw Error("bad_truth_line", path.string() + " line " +
                                              std::to_string(line_number) + ": " + e.what());
        } catch (const MalformedIdentifier& e) {
            throw Error("bad_truth_line", path.string() + " line " +
                                              std::to_string(line_number) + ": " + e.what());
        }
    }
    return truths;
}

std::vector<agent::Trajectory> load_trajectories(const std::filesystem::path& path) {
    std::vector<agent::Trajectory> trajectories;
    for (const std::string& line : read_jsonl_lines(path)) {
        trajectories.push_back(agent::trajectory_from_jsonl(line));
    }
    return trajectories;
}

void save_trajectories(const std::filesystem::path& path,
                       const std::vector<agent::Trajectory>& trajectories) {
    std::vector<std::string> lines;
    lines.reserve(trajectories.size());
    for (const agent::Trajectory& trajectory : trajectories) {
        lines.push_back(agent::trajectory_to_jsonl(trajectory));
    }
    write_lines(path, lines);
}

std::string prediction_line_from_trajectory(const agent::Trajectory& trajectory) {
    ordered_json functions = ordered_json::array();
    ordered_json files = ordered_json::array();
    if (trajectory.final_answer) {
        for (const FunctionIdentifier& fn : trajectory.final_answer->ranked_functions) {
            functions.push_back(fn.to_string());
        }
        for (const std::string& file : trajectory.final_answer->ranked_files) {
            files.push_back(file);
        }
    }
    ordered_json doc{{"query_id", trajectory.query_id},
                     {"files", std::move(files)},
                     {"functions", std::move(functions)}};
    return doc.dump();
}

} // namespace repoloc::io
