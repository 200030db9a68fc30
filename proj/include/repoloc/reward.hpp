#pragma once

#include "repoloc/ranking_metrics.hpp"
#include "repoloc/trajectory.hpp"

namespace repoloc::metrics {

// Rank-quality reward for one episode: nDCG@k of the final ranked list
// against the ground truth (function level by default). Episodes without a
// final answer score 0. The score is written back into the trajectory.
double trajectory_reward(agent::Trajectory& trajectory, const GroundTruth& truth, int k = 5,
                         Level level = Level::Function);

} // namespace repoloc::metrics
