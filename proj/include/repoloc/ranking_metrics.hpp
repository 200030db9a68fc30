#pragma once

#include "repoloc/error.hpp"
#include "repoloc/identifiers.hpp"

#include <set>
#include <span>
#include <string>
#include <vector>

namespace repoloc::metrics {

enum class Level { File, Function };

std::string_view level_str(Level level);
Level parse_level(std::string_view text);

class EmptyGroundTruth : public Error {
public:
    explicit EmptyGroundTruth(const std::string& query_id)
        : Error("empty_ground_truth",
                "ground truth for query '" + query_id + "' is empty at this level") {}
};

class UnmatchedQuery : public Error {
public:
    explicit UnmatchedQuery(const std::vector<std::string>& missing_ids);
};

struct GroundTruth {
    std::string query_id;
    std::vector<FunctionIdentifier> functions;
    std::vector<std::string> files;

    // canonical item sets per level; files always cover the function paths
    std::set<std::string> function_set() const;
    std::set<std::string> file_set() const;
    const std::set<std::string>& set_for(Level level, std::set<std::string>& storage) const;
};

struct RankedPrediction {
    std::string query_id;
    Level level = Level::Function;
    std::vector<std::string> items; // canonical, duplicate-free, rank order
};

// Rank-discounted hit gain over the top k of the list.
double dcg_at_k(std::span<const std::string> items, const std::set<std::string>& relevant,
                int k);

// Ideal DCG: every top slot filled with a relevant item.
double idcg_at_k(std::size_t relevant_count, int k);

double ndcg_at_k(std::span<const std::string> items, const std::set<std::string>& relevant,
                 int k, const std::string& query_id = "");

double recall_at_k(std::span<const std::string> items, const std::set<std::string>& relevant,
                   int k, const std::string& query_id = "");

double average_precision(std::span<const std::string> items,
                         const std::set<std::string>& relevant,
                         const std::string& query_id = "");

double reciprocal_rank(std::span<const std::string> items,
                       const std::set<std::string>& relevant);

struct QueryMetrics {
    std::string query_id;
    bool skipped = false; // ground truth empty at the requested level
    double recall1 = 0.0;
    double recall3 = 0.0;
    double recall5 = 0.0;
    double ap = 0.0;
    double rr = 0.0;
    double ndcg = 0.0;
};

struct MetricReport {
    Level level = Level::Function;
    int k = 5;
    std::vector<QueryMetrics> per_query;
    std::size_t query_count = 0; // queries contributing to the aggregates
    std::size_t skipped_count = 0;
    double recall1 = 0.0;
    double recall3 = 0.0;
    double recall5 = 0.0;
    double map = 0.0;
    double mrr = 0.0;
    double ndcg = 0.0;
};

MetricReport evaluate(const std::vector<RankedPrediction>& predictions,
                      const std::vector<GroundTruth>& truths, Level level, int k = 5);

std::string render_report_table(const MetricReport& report);
std::string report_to_json(const MetricReport& report);

} // namespace repoloc::metrics
