#include "repoloc/dataset_builder.hpp"

#include "repoloc/version.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <ostream>

using ordered_json = nlohmann::ordered_json;

namespace repoloc::dataset {

namespace {

bool glob_match(std::string_view pattern, std::string_view text) {
    size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            mark = t;
        } else if (star != std::string_view::npos) {
            p = star + 1;
            t = ++mark;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') {
        ++p;
    }
    return p == pattern.size();
}

std::string lowercase(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

PatchRecord make_patch_record(std::string pr_id, std::string unified_diff) {
    PatchRecord record;
    record.pr_id = std::move(pr_id);
    record.changes = parse_unified_diff(unified_diff);
    record.unified_diff = std::move(unified_diff);
    return record;
}

FilterOutcome filter_repo(const RepoMeta& meta, const RepoFilterConfig& config) {
    if (config.excluded_repos.count(meta.name) > 0) {
        return {false, "leakage: repository is on the exclusion list"};
    }
    if (meta.issue_count < config.min_issues) {
        return {false, "issue_count " + std::to_string(meta.issue_count) + " < " +
                           std::to_string(config.min_issues)};
    }
    if (meta.pr_count < config.min_prs) {
        return {false, "pr_count " + std::to_string(meta.pr_count) + " < " +
                           std::to_string(config.min_prs)};
    }
    if (meta.star_count < config.min_stars) {
        return {false, "star_count " + std::to_string(meta.star_count) + " < " +
                           std::to_string(config.min_stars)};
    }
    const std::string license = lowercase(meta.license_id);
    bool allowed = false;
    for (const std::string& candidate : config.license_allow) {
        if (lowercase(candidate) == license) {
            allowed = true;
            break;
        }
    }
    if (!allowed) {
        return {false, "license '" + meta.license_id + "' not on the allow-list"};
    }
    return {true, ""};
}

FilterOutcome filter_issue(const IssueRecord& issue, const IssueFilterConfig& config) {
    if (issue.linked_pr_id.empty()) {
        return {false, "no linked pull request"};
    }
    const std::size_t length = issue.title.size() + issue.body.size();
    if (length < config.min_chars) {
        return {false, "issue text " + std::to_string(length) + " chars < " +
                           std::to_string(config.min_chars)};
    }
    return {true, ""};
}

bool SourceMatcher::matches(std::string_view relative_path) const {
    // any path segment on the exclusion list disqualifies the file
    size_t start = 0;
    while (true) {
        size_t slash = relative_path.find('/', start);
        std::string_view segment = relative_path.substr(
            start, slash == std::string_view::npos ? std::string_view::npos : slash - start);
        if (slash == std::string_view::npos) {
            break;
        }
        for (const std::string& dir : exclude_dir_names) {
            if (segment == dir) {
                return false;
            }
        }
        start = slash + 1;
    }
    std::string_view filename = relative_path;
    if (size_t slash = relative_path.rfind('/'); slash != std::string_view::npos) {
        filename = relative_path.substr(slash + 1);
    }
    for (const std::string& pattern : include_globs) {
        if (glob_match(pattern, filename)) {
            return true;
        }
    }
    return false;
}

FilterOutcome filter_patch(const PatchRecord& patch, const SourceMatcher& matcher) {
    for (const FileChange& change : patch.changes.files) {
        if (matcher.matches(change.changed_path())) {
            return {true, ""};
        }
    }
    return {false, "no changed source files (documentation/config only)"};
}

namespace {

void collect_overlaps(const index::RepoIndex& idx, const std::string& index_path,
                      const std::string& attribute_path,
                      const std::vector<LineRange>& ranges,
                      std::set<FunctionIdentifier>& out) {
    if (ranges.empty()) {
        return;
    }
    const index::SourceFileRecord* file = idx.find_file(index_path);
    if (file == nullptr) {
        throw RevisionMismatch("file '" + index_path + "' missing from the revision index");
    }
    for (const LineRange& range : ranges) {
        if (range.start > file->line_count || range.end > file->line_count) {
            throw RevisionMismatch("hunk lines " + std::to_string(range.start) + "-" +
                                   std::to_string(range.end) + " exceed '" + index_path +
                                   "' (" + std::to_string(file->line_count) + " lines)");
        }
        for (const index::CodeEntity* entity :
             index::entities_overlapping(idx, index_path, range.start, range.end)) {
            out.insert(FunctionIdentifier{attribute_path, entity->qualified_name});
        }
    }
}

} // namespace

metrics::GroundTruth ground_truth_from_diff(const index::RepoIndex& pre_index,
                                            const index::RepoIndex& post_index,
                                            const PatchRecord& patch,
                                            const SourceMatcher& matcher) {
    metrics::GroundTruth truth;
    std::set<std::string> files;
    std::set<FunctionIdentifier> functions;
    for (const FileChange& change : patch.changes.files) {
        const std::string& path = change.changed_path();
        if (!matcher.matches(path)) {
            continue;
        }
        files.insert(path);
        if (!change.is_new) {
            collect_overlaps(pre_index, change.pre_path, path, change.deleted_ranges,
                             functions);
        }
        if (!change.is_deleted) {
            collect_overlaps(post_index, change.post_path, path, change.added_ranges,
                             functions);
        }
    }
    truth.files.assign(files.begin(), files.end());
    truth.functions.assign(functions.begin(), functions.end());
    return truth;
}

std::string example_to_jsonl(const LocalizationExample& example) {
    ordered_json functions = ordered_json::array();
    for (const FunctionIdentifier& fn : example.ground_truth.functions) {
        functions.push_back(fn.to_string());
    }
    ordered_json doc{{"schema_version", kDatasetSchemaVersion},
                     {"tool_version", std::string(kToolVersion)},
                     {"query_id", example.query_id},
                     {"query", example.query},
                     {"ground_truth",
                      {{"files", example.ground_truth.files},
                       {"functions", std::move(functions)}}},
                     {"provenance",
                      {{"repo", example.repo_name},
                       {"pr_id", example.pr_id},
                       {"pre_revision", example.pre_revision},
                       {"post_revision", example.post_revision}}}};
    return doc.dump();
}

LocalizationExample example_from_jsonl(const std::string& line) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_example_line", std::string("example line is not JSON: ") + e.what());
    }
    try {
        LocalizationExample example;
        example.query_id = doc.at("query_id").get<std::string>();
        example.query = doc.at("query").get<std::string>();
        example.ground_truth.query_id = example.query_id;
        if (doc.contains("ground_truth")) {
            const ordered_json& truth = doc.at("ground_truth");
            example.ground_truth.files = truth.at("files").get<std::vector<std::string>>();
            for (const ordered_json& fn : truth.at("functions")) {
                NormalizedItem item = normalize_identifier(fn.get<std::string>());
                example.ground_truth.functions.push_back(
                    FunctionIdentifier{item.path, item.name});
            }
        }
        if (doc.contains("provenance")) {
            const ordered_json& provenance = doc.at("provenance");
            example.repo_name = provenance.value("repo", "");
            example.pr_id = provenance.value("pr_id", "");
            example.pre_revision = provenance.value("pre_revision", "");
            example.post_revision = provenance.value("post_revision", "");
        }
        return example;
    } catch (const nlohmann::json::exception& e) {
        throw Error("bad_example_line",
                    std::string("example record malformed: ") + e.what());
    }
}

RejectionPolicy parse_rejection_policy(std::string_view text) {
    if (text == "any" || text == "any-hit") {
        return RejectionPolicy::AnyHit;
    }
    if (text == "topk" || text == "top-k") {
        return RejectionPolicy::TopKHit;
    }
    if (text == "reward" || text == "reward-threshold") {
        return RejectionPolicy::RewardThreshold;
    }
    throw Error("bad_policy", "unknown rejection policy '" + std::string(text) +
                                  "' (expected any|topk|reward)");
}

std::string_view rejection_policy_str(RejectionPolicy policy) {
    switch (policy) {
    case RejectionPolicy::AnyHit: return "any";
    case RejectionPolicy::TopKHit: return "topk";
    case RejectionPolicy::RewardThreshold: return "reward";
    }
    return "any";
}

RejectionResult rejection_filter(std::span<const agent::Trajectory> trajectories,
                                 std::span<const metrics::GroundTruth> truths,
                                 const RejectionConfig& config) {
    std::map<std::string, const metrics::GroundTruth*> truth_by_id;
    for (const metrics::GroundTruth& truth : truths) {
        truth_by_id.emplace(truth.query_id, &truth);
    }
    std::vector<std::string> missing;
    for (const agent::Trajectory& trajectory : trajectories) {
        if (truth_by_id.count(trajectory.query_id) == 0) {
            missing.push_back(trajectory.query_id);
        }
    }
    if (!missing.empty()) {
        throw metrics::UnmatchedQuery(missing);
    }

    RejectionResult result;
    {
        std::string description = std::string(rejection_policy_str(config.policy));
        description += " level=" + std::string(metrics::level_str(config.level));
        if (config.policy == RejectionPolicy::TopKHit) {
            description += " k=" + std::to_string(config.k);
        } else if (config.policy == RejectionPolicy::RewardThreshold) {
            description += " k=" + std::to_string(config.k) +
                           " threshold=" + std::to_string(config.threshold);
        }
        result.policy_description = description;
    }

    for (std::size_t i = 0; i < trajectories.size(); ++i) {
        const agent::Trajectory& trajectory = trajectories[i];
        const metrics::GroundTruth& truth = *truth_by_id.at(trajectory.query_id);
        std::set<std::string> relevant = config.level == metrics::Level::File
                                             ? truth.file_set()
                                             : truth.function_set();
        RejectionVerdict verdict;
        verdict.query_id = trajectory.query_id;

        if (!trajectory.final_answer) {
            verdict.kept = false;
            verdict.reason = "no final answer";
        } else if (relevant.empty()) {
            verdict.kept = false;
            verdict.reason = "empty ground truth at this level";
        } else {
            const std::vector<std::string> items =
                config.level == metrics::Level::File
                    ? trajectory.final_answer->ranked_files
                    : trajectory.final_answer->function_items();
            switch (config.policy) {
            case RejectionPolicy::AnyHit: {
                bool hit = std::any_of(items.begin(), items.end(), [&](const std::string& x) {
                    return relevant.count(x) > 0;
                });
                verdict.kept = hit;
                verdict.reason = hit ? "" : "no ground-truth hit at any rank";
                break;
            }
            case RejectionPolicy::TopKHit: {
                bool hit = false;
                for (std::size_t r = 0;
                     r < items.size() && r < static_cast<std::size_t>(config.k); ++r) {
                    if (relevant.count(items[r]) > 0) {
                        hit = true;
                        break;
                    }
                }
                verdict.kept = hit;
                verdict.reason =
                    hit ? "" : "no ground-truth hit in top " + std::to_string(config.k);
                break;
            }
            case RejectionPolicy::RewardThreshold: {
                const double score = metrics::ndcg_at_k(items, relevant, config.k,
                                                        trajectory.query_id);
                verdict.kept = score >= config.threshold;
                if (!verdict.kept) {
                    verdict.reason = "reward " + std::to_string(score) + " below threshold " +
                                     std::to_string(config.threshold);
                }
                break;
            }
            }
        }
        if (verdict.kept) {
            result.kept_indices.push_back(i);
        }
        result.verdicts.push_back(std::move(verdict));
    }
    return result;
}

std::size_t export_sft(std::span<const agent::Trajectory> trajectories, std::ostream& out) {
    std::size_t count = 0;
    for (const agent::Trajectory& trajectory : trajectories) {
        if (!trajectory.final_answer) {
            continue; // nothing to learn from an answerless episode
        }
        ordered_json messages = ordered_json::array();
        for (const agent::ChatMessage& message : trajectory.messages) {
            messages.push_back({{"role", message.role}, {"content", message.content}});
        }
        ordered_json doc{{"schema_version", kDatasetSchemaVersion},
                         {"tool_version", std::string(kToolVersion)},
                         {"query_id", trajectory.query_id},
                         {"messages", std::move(messages)}};
        out << doc.dump() << "\n";
        ++count;
    }
    return count;
}

std::size_t export_rl(std::span<const LocalizationExample> examples, std::ostream& out) {
    std::size_t count = 0;
    for (const LocalizationExample& example : examples) {
        ordered_json functions = ordered_json::array();
        for (const FunctionIdentifier& fn : example.ground_truth.functions) {
            functions.push_back(fn.to_string());
        }
        ordered_json doc{{"schema_version", kDatasetSchemaVersion},
                         {"tool_version", std::string(kToolVersion)},
                         {"query_id", example.query_id},
                         {"query", example.query},
                         {"files", example.ground_truth.files},
                         {"functions", std::move(functions)}};
        out << doc.dump() << "\n";
        ++count;
    }
    return count;
}

} // namespace repoloc::dataset
