#include "repoloc/ranking_metrics.hpp"

#include "repoloc/version.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

using ordered_json = nlohmann::ordered_json;

namespace repoloc::metrics {

std::string_view level_str(Level level) {
    return level == Level::File ? "file" : "function";
}

Level parse_level(std::string_view text) {
    if (text == "file") {
        return Level::File;
    }
    if (text == "function") {
        return Level::Function;
    }
    throw Error("bad_level", "unknown level '" + std::string(text) +
                                 "' (expected 'file' or 'function')");
}

UnmatchedQuery::UnmatchedQuery(const std::vector<std::string>& missing_ids)
    : Error("unmatched_query", [&missing_ids] {
          std::string message = "predictions without ground truth:";
          for (const std::string& id : missing_ids) {
              message += " '" + id + "'";
          }
          return message;
      }()) {}

std::set<std::string> GroundTruth::function_set() const {
    std::set<std::string> out;
    for (const FunctionIdentifier& fn : functions) {
        out.insert(fn.to_string());
    }
    return out;
}

std::set<std::string> GroundTruth::file_set() const {
    std::set<std::string> out;
    for (const std::string& file : files) {
        std::string normalized = normalize_path(file);
        if (!normalized.empty()) {
            out.insert(std::move(normalized));
        }
    }
    for (const FunctionIdentifier& fn : functions) {
        out.insert(normalize_path(fn.relative_path));
    }
    return out;
}

const std::set<std::string>& GroundTruth::set_for(Level level,
                                                  std::set<std::string>& storage) const {
    storage = level == Level::File ? file_set() : function_set();
    return storage;
}

double dcg_at_k(std::span<const std::string> items, const std::set<std::string>& relevant,
                int k) {
    double sum = 0.0;
    const std::size_t limit = std::min<std::size_t>(items.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
        if (relevant.count(items[i]) > 0) {
            sum += 1.0 / std::log2(static_cast<double>(i) + 2.0);
        }
    }
    return sum;
}

double idcg_at_k(std::size_t relevant_count, int k) {
    double sum = 0.0;
    const std::size_t limit = std::min<std::size_t>(relevant_count, static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
        sum += 1.0 / std::log2(static_cast<double>(i) + 2.0);
    }
    return sum;
}

double ndcg_at_k(std::span<const std::string> items, const std::set<std::string>& relevant,
                 int k, const std::string& query_id) {
    if (relevant.empty()) {
        throw EmptyGroundTruth(query_id);
    }
    return dcg_at_k(items, relevant, k) / idcg_at_k(relevant.size(), k);
}

double recall_at_k(std::span<const std::string> items, const std::set<std::string>& relevant,
                   int k, const std::string& query_id) {
    if (relevant.empty()) {
        throw EmptyGroundTruth(query_id);
    }
    std::size_t hits = 0;
    const std::size_t limit = std::min<std::size_t>(items.size(), static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < limit; ++i) {
        if (relevant.count(items[i]) > 0) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

double average_precision(std::span<const std::string> items,
                         const std::set<std::string>& relevant,
                         const std::string& query_id) {
    if (relevant.empty()) {
        throw EmptyGroundTruth(query_id);
    }
    std::size_t hits = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (relevant.count(items[i]) > 0) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        }
    }
    return sum / static_cast<double>(relevant.size());
}

double reciprocal_rank(std::span<const std::string> items,
                       const std::set<std::string>& relevant) {
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (relevant.count(items[i]) > 0) {
            return 1.0 / static_cast<double>(i + 1);
        }
    }
    return 0.0;
}

MetricReport evaluate(const std::vector<RankedPrediction>& predictions,
                      const std::vector<GroundTruth>& truths, Level level, int k) {
    std::map<std::string, const GroundTruth*> truth_by_id;
    for (const GroundTruth& truth : truths) {
        truth_by_id.emplace(truth.query_id, &truth);
    }
    std::vector<std::string> missing;
    for (const RankedPrediction& prediction : predictions) {
        if (truth_by_id.count(prediction.query_id) == 0) {
            missing.push_back(prediction.query_id);
        }
    }
    if (!missing.empty()) {
        throw UnmatchedQuery(missing);
    }

    MetricReport report;
    report.level = level;
    report.k = k;
    double sum_r1 = 0, sum_r3 = 0, sum_r5 = 0, sum_ap = 0, sum_rr = 0, sum_ndcg = 0;
    for (const RankedPrediction& prediction : predictions) {
        const GroundTruth& truth = *truth_by_id.at(prediction.query_id);
        std::set<std::string> relevant =
            level == Level::File ? truth.file_set() : truth.function_set();

        QueryMetrics row;
        row.query_id = prediction.query_id;
        if (relevant.empty()) {
            row.skipped = true;
            ++report.skipped_count;
        } else {
            std::span<const std::string> items(prediction.items);
            row.recall1 = recall_at_k(items, relevant, 1, prediction.query_id);
            row.recall3 = recall_at_k(items, relevant, 3, prediction.query_id);
            row.recall5 = recall_at_k(items, relevant, 5, prediction.query_id);
            row.ap = average_precision(items, relevant, prediction.query_id);
            row.rr = reciprocal_rank(items, relevant);
            row.ndcg = ndcg_at_k(items, relevant, k, prediction.query_id);
            sum_r1 += row.recall1;
            sum_r3 += row.recall3;
            sum_r5 += row.recall5;
            sum_ap += row.ap;
            sum_rr += row.rr;
            sum_ndcg += row.ndcg;
            ++report.query_count;
        }
        report.per_query.push_back(std::move(row));
    }
    if (report.query_count > 0) {
        const double n = static_cast<double>(report.query_count);
        report.recall1 = sum_r1 / n;
        report.recall3 = sum_r3 / n;
        report.recall5 = sum_r5 / n;
        report.map = sum_ap / n;
        report.mrr = sum_rr / n;
        report.ndcg = sum_ndcg / n;
    }
    return report;
}

std::string render_report_table(const MetricReport& report) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4);
    out << "level: " << level_str(report.level) << "  k: " << report.k
        << "  queries: " << report.query_count << "  skipped: " << report.skipped_count
        << "\n";
    out << std::left << std::setw(24) << "query" << std::right << std::setw(9) << "R@1"
        << std::setw(9) << "R@3" << std::setw(9) << "R@5" << std::setw(9) << "AP"
        << std::setw(9) << "RR" << std::setw(9) << ("nDCG@" + std::to_string(report.k))
        << "\n";
    for (const QueryMetrics& row : report.per_query) {
        out << std::left << std::setw(24) << row.query_id << std::right;
        if (row.skipped) {
            out << std::setw(54) << "(skipped: empty ground truth)";
        } else {
            out << std::setw(9) << row.recall1 << std::setw(9) << row.recall3 << std::setw(9)
                << row.recall5 << std::setw(9) << row.ap << std::setw(9) << row.rr
                << std::setw(9) << row.ndcg;
        }
        out << "\n";
    }
    out << std::left << std::setw(24) << "MEAN" << std::right << std::setw(9)
        << report.recall1 << std::setw(9) << report.recall3 << std::setw(9) << report.recall5
        << std::setw(9) << report.map << std::setw(9) << report.mrr << std::setw(9)
        << report.ndcg << "\n";
    return out.str();
}

std::string report_to_json(const MetricReport& report) {
    ordered_json rows = ordered_json::array();
    for (const QueryMetrics& row : report.per_query) {
        if (row.skipped) {
            rows.push_back({{"query_id", row.query_id}, {"skipped", true}});
        } else {
            rows.push_back({{"query_id", row.query_id},
                            {"skipped", false},
                            {"recall@1", row.recall1},
                            {"recall@3", row.recall3},
                            {"recall@5", row.recall5},
                            {"ap", row.ap},
                            {"rr", row.rr},
                            {"ndcg", row.ndcg}});
        }
    }
    ordered_json doc{{"tool_version", std::string(kToolVersion)},
                     {"level", std::string(level_str(report.level))},
                     {"k", report.k},
                     {"query_count", report.query_count},
                     {"skipped_count", report.skipped_count},
                     {"aggregates",
                      {{"recall@1", report.recall1},
                       {"recall@3", report.recall3},
                       {"recall@5", report.recall5},
                       {"map", report.map},
                       {"mrr", report.mrr},
                       {"ndcg", report.ndcg}}},
                     {"per_query", std::move(rows)}};
    return doc.dump(2);
}

} // namespace repoloc::metrics
