#include "repoloc/reward.hpp"

namespace repoloc::metrics {

double trajectory_reward(agent::Trajectory& trajectory, const GroundTruth& truth, int k,
                         Level level) {
    std::set<std::string> relevant =
        level == Level::File ? truth.file_set() : truth.function_set();
    if (relevant.empty()) {
        throw EmptyGroundTruth(truth.query_id);
    }
    double score = 0.0;
    if (trajectory.final_answer) {
        std::vector<std::string> items =
            level == Level::File ? trajectory.final_answer->ranked_files
                                 : trajectory.final_answer->function_items();
        score = ndcg_at_k(items, relevant, k, truth.query_id);
    }
    trajectory.reward = score;
    return score;
}

} // namespace repoloc::metrics
