#pragma once

#include "repoloc/diff_parser.hpp"
#include "repoloc/ranking_metrics.hpp"
#include "repoloc/repo_index.hpp"
#include "repoloc/trajectory.hpp"

#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace repoloc::dataset {

class RevisionMismatch : public Error {
public:
    explicit RevisionMismatch(const std::string& why)
        : Error("revision_mismatch", "diff does not match the given revisions: " + why) {}
};

class SourceUnavailable : public Error {
public:
    explicit SourceUnavailable(const std::string& why)
        : Error("source_unavailable", "pair source unavailable: " + why) {}
};

class AuthFailure : public Error {
public:
    explicit AuthFailure(const std::string& why)
        : Error("auth_failure", "pair source rejected credentials: " + why) {}
};

struct RepoMeta {
    std::string name;
    long issue_count = 0;
    long pr_count = 0;
    long star_count = 0;
    std::string license_id;
};

struct IssueRecord {
    std::string issue_id;
    std::string title;
    std::string body;
    std::string linked_pr_id;
};

struct PatchRecord {
    std::string pr_id;
    std::string unified_diff;
    ParsedDiff changes; // always derived from unified_diff
};

// Parses the diff up front so the record is never inconsistent.
PatchRecord make_patch_record(std::string pr_id, std::string unified_diff);

struct FilterOutcome {
    bool keep = false;
    std::string reason; // empty when kept
};

struct RepoFilterConfig {
    long min_issues = 1000;
    long min_prs = 1000;
    long min_stars = 100;
    std::vector<std::string> license_allow = {"mit", "apache-2.0", "bsd-2-clause",
                                              "bsd-3-clause", "mpl-2.0", "isc"};
    std::set<std::string> excluded_repos; // leakage guard, operator supplied
};

FilterOutcome filter_repo(const RepoMeta& meta, const RepoFilterConfig& config = {});

struct IssueFilterConfig {
    std::size_t min_chars = 100; // over title + body
};

FilterOutcome filter_issue(const IssueRecord& issue, const IssueFilterConfig& config = {});

struct SourceMatcher {
    std::vector<std::string> include_globs = {"*.py"};
    std::vector<std::string> exclude_dir_names = {"test", "tests", "testing"};

    bool matches(std::string_view relative_path) const;
};

FilterOutcome filter_patch(const PatchRecord& patch, const SourceMatcher& matcher = {});

// Changed source files plus every function/method whose pre- or post-image
// span the diff touches, unified by (path, qualified name).
metrics::GroundTruth ground_truth_from_diff(const index::RepoIndex& pre_index,
                                            const index::RepoIndex& post_index,
                                            const PatchRecord& patch,
                                            const SourceMatcher& matcher = {});

struct LocalizationExample {
    std::string query_id;
    std::string query; // issue title + body
    metrics::GroundTruth ground_truth;
    std::string repo_name;
    std::string pr_id;
    std::string pre_revision;
    std::string post_revision;
};

std::string example_to_jsonl(const LocalizationExample& example);
LocalizationExample example_from_jsonl(const std::string& line);

enum class RejectionPolicy { AnyHit, TopKHit, RewardThreshold };

RejectionPolicy parse_rejection_policy(std::string_view text);
std::string_view rejection_policy_str(RejectionPolicy policy);

struct RejectionConfig {
    RejectionPolicy policy = RejectionPolicy::AnyHit;
    int k = 5;               // TopKHit window and RewardThreshold nDCG cutoff
    double threshold = 0.5;  // RewardThreshold only
    metrics::Level level = metrics::Level::Function;
};

struct RejectionVerdict {
    std::string query_id;
    bool kept = false;
    std::string reason;
};

struct RejectionResult {
    std::vector<RejectionVerdict> verdicts;   // one per trajectory, input order
    std::vector<std::size_t> kept_indices;    // into the input span
    std::string policy_description;           // recorded in output headers
};

RejectionResult rejection_filter(std::span<const agent::Trajectory> trajectories,
                                 std::span<const metrics::GroundTruth> truths,
                                 const RejectionConfig& config = {});

// SFT lines carry the full message transcript as training turns; RL lines
// carry the query plus ground-truth lists. Both return the line count.
std::size_t export_sft(std::span<const agent::Trajectory> trajectories, std::ostream& out);
std::size_t export_rl(std::span<const LocalizationExample> examples, std::ostream& out);

struct IngestOptions {
    std::string cache_dir;  // remote page cache; reruns replay it offline
    int per_page = 50;
    std::string token_env = "REPOLOC_API_TOKEN";
    int max_attempts = 3;
};

// `source` is either a local pairs JSONL path or an http(s) endpoint that
// serves pages of pair objects. Pairs whose diff fails to parse are skipped;
// when `skipped` is given, one reason per skipped pair is appended to it.
std::vector<std::pair<IssueRecord, PatchRecord>> ingest_issue_pr_pairs(
    const std::string& source, const IngestOptions& options = {},
    std::vector<std::string>* skipped = nullptr);

} // namespace repoloc::dataset
