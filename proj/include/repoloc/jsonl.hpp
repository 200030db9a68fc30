#pragma once

#include "repoloc/ranking_metrics.hpp"
#include "repoloc/trajectory.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace repoloc::io {

// Non-blank lines of a JSONL file; throws repoloc::Error("missing_file")
// when the path cannot be read.
std::vector<std::string> read_jsonl_lines(const std::filesystem::path& path);

void write_lines(const std::filesystem::path& path, const std::vector<std::string>& lines);

// {"query_id": ..., "files": [...], "functions": [...]} per line.
// Prediction items are normalized on load; duplicates or malformed
// identifiers raise Error("bad_prediction_line") naming the line.
std::vector<metrics::RankedPrediction> load_predictions(const std::filesystem::path& path,
                                                        metrics::Level level);

std::vector<metrics::GroundTruth> load_ground_truths(const std::filesystem::path& path);

std::vector<agent::Trajectory> load_trajectories(const std::filesystem::path& path);
void save_trajectories(const std::filesystem::path& path,
                       const std::vector<agent::Trajectory>& trajectories);

// Ranked lists of one trajectory as a prediction line (for `evaluate`).
std::string prediction_line_from_trajectory(const agent::Trajectory& trajectory);

} // namespace repoloc::io
