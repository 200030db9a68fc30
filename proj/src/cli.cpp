#include "repoloc/cli.hpp"

#include "repoloc/agent_loop.hpp"
#include "repoloc/config.hpp"
#include "repoloc/dataset_builder.hpp"
#include "repoloc/jsonl.hpp"
#include "repoloc/reward.hpp"
#include "repoloc/version.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

using ordered_json = nlohmann::ordered_json;

namespace repoloc::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitEnvironmentFailure = 2;

int exit_code_for(const Error& error) {
    static const std::set<std::string> environment_codes = {
        "root_not_found",  "empty_repository", "missing_file",       "missing_config",
        "bad_config",      "cache_corrupt",    "cache_unwritable",   "unwritable_file",
        "backend_unavailable", "source_unavailable", "auth_failure",
    };
    return environment_codes.count(error.code()) > 0 ? kExitEnvironmentFailure
                                                     : kExitTaskFailure;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("missing_file", "cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

std::unique_ptr<agent::ModelBackend> make_backend(const RunConfig& config) {
    if (config.backend.kind == "scripted") {
        if (config.backend.script_path.empty()) {
            throw Error("bad_config", "scripted backend needs --script");
        }
        return std::make_unique<agent::ScriptedBackend>(
            agent::ScriptedBackend::from_json_file(config.backend.script_path));
    }
    if (config.backend.kind == "http") {
        if (config.backend.base_url.empty()) {
            throw Error("bad_config", "http backend needs --base-url");
        }
        agent::HttpBackendConfig http;
        http.base_url = config.backend.base_url;
        http.model = config.backend.model;
        http.temperature = config.backend.temperature;
        http.api_key_env = config.backend.api_key_env;
        return std::make_unique<agent::HttpBackend>(http);
    }
    throw Error("bad_config", "unknown backend kind '" + config.backend.kind + "'");
}

void announce(const RunConfig& config) {
    std::cerr << "repoloc " << kToolVersion << " | " << describe_config(config) << "\n";
}

void print_answer(const agent::Trajectory& trajectory) {
    std::cout << "termination: " << agent::termination_str(trajectory.termination) << "\n";
    if (!trajectory.final_answer) {
        std::cout << "no final answer\n";
        return;
    }
    std::cout << "ranked functions:\n";
    for (const FunctionIdentifier& fn : trajectory.final_answer->ranked_functions) {
        std::cout << fn.to_string() << "\n";
    }
    std::cout << "ranked files:\n";
    for (const std::string& file : trajectory.final_answer->ranked_files) {
        std::cout << file << "\n";
    }
}

struct CommonFlags {
    std::optional<std::string> config_path;
};

RunConfig effective_config(const CommonFlags& common) {
    return load_run_config(common.config_path);
}

// ---------------------------------------------------------------- index ---

int cmd_index(const std::string& repo_root, const std::string& out_path,
              const std::string& revision, const std::string& label,
              const std::vector<std::string>& includes) {
    index::IndexConfig config;
    if (!includes.empty()) {
        config.include_patterns = includes;
    }
    config.revision_tag = revision;
    config.root_label = label;
    index::RepoIndex idx = index::build_index(repo_root, config);
    index::persist_index(idx, out_path);
    std::cout << "indexed " << idx.file_count() << " files, " << idx.entity_count()
              << " entities\n";
    std::cout << "cache written to " << out_path << "\n";
    return kExitOk;
}

// ------------------------------------------------------------- localize ---

int cmd_localize(const RunConfig& config, const std::string& issue_path,
                 const std::string& index_path, const std::string& out_path,
                 const std::string& query_id) {
    const index::RepoIndex idx = index::load_index(index_path);
    std::unique_ptr<agent::ModelBackend> backend = make_backend(config);

    agent::EpisodeOptions options;
    options.query_id = query_id;
    options.budget = config.budget;
    options.seed = config.seed;
    agent::Trajectory trajectory =
        agent::run_episode(read_text_file(issue_path), idx, *backend, options);

    if (!out_path.empty()) {
        io::write_lines(out_path, {agent::trajectory_to_jsonl(trajectory)});
    }
    print_answer(trajectory);
    return kExitOk;
}

// --------------------------------------------------------------- sample ---

int cmd_sample(const RunConfig& config, const std::string& examples_path,
               const std::string& index_path, const std::string& out_path) {
    std::vector<agent::EpisodeRequest> requests;
    for (const std::string& line : io::read_jsonl_lines(examples_path)) {
        dataset::LocalizationExample example = dataset::example_from_jsonl(line);
        requests.push_back(agent::EpisodeRequest{example.query_id, example.query});
    }
    auto idx = std::make_shared<const index::RepoIndex>(index::load_index(index_path));
    std::unique_ptr<agent::ModelBackend> backend = make_backend(config);

    agent::IndexProvider provider = [idx](const agent::EpisodeRequest&) { return idx; };
    agent::BatchResult batch = agent::batch_run(requests, provider, *backend, config.budget,
                                                config.parallelism, config.seed);

    std::vector<agent::Trajectory> ok;
    for (auto& trajectory : batch.trajectories) {
        if (trajectory) {
            ok.push_back(std::move(*trajectory));
        }
    }
    io::save_trajectories(out_path, ok);
    for (const agent::BatchFailure& failure : batch.failures) {
        std::cerr << "episode '" << failure.query_id << "' failed: " << failure.error << "\n";
    }
    std::cout << "sampled " << ok.size() << " trajectories (" << batch.failures.size()
              << " failures) -> " << out_path << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- reward ---

int cmd_reward(const RunConfig& config, const std::string& trajectories_path,
               const std::string& truths_path, const std::string& out_path) {
    std::vector<agent::Trajectory> trajectories = io::load_trajectories(trajectories_path);
    std::vector<metrics::GroundTruth> truths = io::load_ground_truths(truths_path);
    std::map<std::string, const metrics::GroundTruth*> truth_by_id;
    for (const metrics::GroundTruth& truth : truths) {
        truth_by_id.emplace(truth.query_id, &truth);
    }
    const metrics::Level level = metrics::parse_level(config.level);

    std::vector<std::string> missing;
    for (const agent::Trajectory& trajectory : trajectories) {
        if (truth_by_id.count(trajectory.query_id) == 0) {
            missing.push_back(trajectory.query_id);
        }
    }
    if (!missing.empty()) {
        throw metrics::UnmatchedQuery(missing);
    }

    double sum = 0.0;
    std::size_t scored = 0;
    std::size_t skipped = 0;
    for (agent::Trajectory& trajectory : trajectories) {
        try {
            sum += metrics::trajectory_reward(trajectory,
                                              *truth_by_id.at(trajectory.query_id),
                                              config.k, level);
            ++scored;
        } catch (const metrics::EmptyGroundTruth&) {
            ++skipped;
        }
    }
    if (!out_path.empty()) {
        io::save_trajectories(out_path, trajectories);
    }
    std::cout << "rewarded " << scored << " trajectories (skipped " << skipped
              << " with empty ground truth); mean reward "
              << (scored > 0 ? sum / static_cast<double>(scored) : 0.0) << "\n";
    return kExitOk;
}

// --------------------------------------------------------------- filter ---

int cmd_filter(const RunConfig& config, const std::string& trajectories_path,
               const std::string& truths_path, const std::string& out_path,
               const std::string& audit_path) {
    std::vector<agent::Trajectory> trajectories = io::load_trajectories(trajectories_path);
    std::vector<metrics::GroundTruth> truths = io::load_ground_truths(truths_path);

    dataset::RejectionConfig rejection;
    rejection.policy = dataset::parse_rejection_policy(config.policy);
    rejection.k = config.k;
    rejection.threshold = config.reward_threshold;
    rejection.level = metrics::parse_level(config.level);

    dataset::RejectionResult result =
        dataset::rejection_filter(trajectories, truths, rejection);

    std::vector<agent::Trajectory> kept;
    for (std::size_t i : result.kept_indices) {
        kept.push_back(trajectories[i]);
    }
    io::save_trajectories(out_path, kept);

    if (!audit_path.empty()) {
        std::vector<std::string> lines;
        lines.push_back(ordered_json{{"policy", result.policy_description},
                                     {"tool_version", std::string(kToolVersion)}}
                            .dump());
        for (const dataset::RejectionVerdict& verdict : result.verdicts) {
            lines.push_back(ordered_json{{"stage", "trajectory"},
                                         {"id", verdict.query_id},
                                         {"kept", verdict.kept},
                                         {"reason", verdict.reason}}
                                .dump());
        }
        io::write_lines(audit_path, lines);
    }
    std::cout << "policy: " << result.policy_description << "\n";
    std::cout << "kept " << kept.size() << " of " << trajectories.size()
              << " trajectories -> " << out_path << "\n";
    return kExitOk;
}

// ------------------------------------------------------------- evaluate ---

int cmd_evaluate(const RunConfig& config, const std::string& predictions_path,
                 const std::string& truths_path, const std::string& json_path) {
    const metrics::Level level = metrics::parse_level(config.level);
    std::vector<metrics::RankedPrediction> predictions =
        io::load_predictions(predictions_path, level);
    std::vector<metrics::GroundTruth> truths = io::load_ground_truths(truths_path);
    metrics::MetricReport report = metrics::evaluate(predictions, truths, level, config.k);
    std::cout << metrics::render_report_table(report);
    if (!json_path.empty()) {
        std::ofstream out(json_path, std::ios::trunc);
        if (!out) {
            throw Error("unwritable_file", "cannot write " + json_path);
        }
        out << metrics::report_to_json(report) << "\n";
        std::cout << "report JSON -> " << json_path << "\n";
    }
    return kExitOk;
}

// --------------------------------------------------------- build-dataset ---

struct BuildFlags {
    std::string emit = "examples";
    std::string pairs_path;
    std::string pre_root;
    std::string post_root;
    std::string pre_revision;
    std::string post_revision;
    std::string repo_meta_path;
    std::string repo_name = "repo";
    std::string exclude_list_path;
    std::string trajectories_path;
    std::string examples_path;
    std::string out_path;
    std::string audit_path;
    std::size_t min_issue_chars = 100;
    std::vector<std::string> source_globs;
    std::vector<std::string> exclude_test_dirs;
};

void write_audit(const std::string& path, const std::vector<ordered_json>& entries) {
    if (path.empty()) {
        return;
    }
    std::vector<std::string> lines;
    lines.reserve(entries.size() + 1);
    lines.push_back(ordered_json{{"tool_version", std::string(kToolVersion)}}.dump());
    for (const ordered_json& entry : entries) {
        lines.push_back(entry.dump());
    }
    io::write_lines(path, lines);
}

int cmd_build_examples(const BuildFlags& flags) {
    std::vector<ordered_json> audit;
    dataset::SourceMatcher matcher;
    if (!flags.source_globs.empty()) {
        matcher.include_globs = flags.source_globs;
    }
    if (!flags.exclude_test_dirs.empty()) {
        matcher.exclude_dir_names = flags.exclude_test_dirs;
    }

    dataset::RepoFilterConfig repo_filter;
    if (!flags.exclude_list_path.empty()) {
        std::ifstream in(flags.exclude_list_path);
        if (!in) {
            throw Error("missing_file", "cannot open " + flags.exclude_list_path);
        }
        std::string line;
        while (std::getline(in, line)) {
            if (size_t end = line.find_last_not_of(" \t\r"); end != std::string::npos) {
                repo_filter.excluded_repos.insert(line.substr(0, end + 1));
            }
        }
    }
    if (!flags.repo_meta_path.empty()) {
        ordered_json doc = ordered_json::parse(read_text_file(flags.repo_meta_path));
        dataset::RepoMeta meta;
        meta.name = doc.value("name", flags.repo_name);
        meta.issue_count = doc.value("issue_count", 0L);
        meta.pr_count = doc.value("pr_count", 0L);
        meta.star_count = doc.value("star_count", 0L);
        meta.license_id = doc.value("license_id", "");
        dataset::FilterOutcome outcome = dataset::filter_repo(meta, repo_filter);
        audit.push_back(ordered_json{{"stage", "repo"},
                                     {"id", meta.name},
                                     {"kept", outcome.keep},
                                     {"reason", outcome.reason}});
        if (!outcome.keep) {
            write_audit(flags.audit_path, audit);
            io::write_lines(flags.out_path, {});
            std::cout << "repository dropped (" << outcome.reason << "); 0 examples\n";
            return kExitOk;
        }
    }

    index::IndexConfig pre_config;
    pre_config.revision_tag = flags.pre_revision;
    index::IndexConfig post_config;
    post_config.revision_tag = flags.post_revision;
    const index::RepoIndex pre_index = index::build_index(flags.pre_root, pre_config);
    const index::RepoIndex post_index = index::build_index(flags.post_root, post_config);

    dataset::IssueFilterConfig issue_filter;
    issue_filter.min_chars = flags.min_issue_chars;

    std::vector<std::string> skipped_pairs;
    auto pairs = dataset::ingest_issue_pr_pairs(flags.pairs_path, {}, &skipped_pairs);
    for (const std::string& why : skipped_pairs) {
        audit.push_back(
            ordered_json{{"stage", "pair"}, {"id", ""}, {"kept", false}, {"reason", why}});
    }

    std::vector<std::string> lines;
    for (const auto& [issue, patch] : pairs) {
        dataset::FilterOutcome issue_outcome = dataset::filter_issue(issue, issue_filter);
        audit.push_back(ordered_json{{"stage", "issue"},
                                     {"id", issue.issue_id},
                                     {"kept", issue_outcome.keep},
                                     {"reason", issue_outcome.reason}});
        if (!issue_outcome.keep) {
            continue;
        }
        dataset::FilterOutcome patch_outcome = dataset::filter_patch(patch, matcher);
        audit.push_back(ordered_json{{"stage", "patch"},
                                     {"id", patch.pr_id},
                                     {"kept", patch_outcome.keep},
                                     {"reason", patch_outcome.reason}});
        if (!patch_outcome.keep) {
            continue;
        }
        dataset::LocalizationExample example;
        example.query_id = issue.issue_id;
        example.query = issue.title.empty() ? issue.body : issue.title + "\n\n" + issue.body;
        try {
            example.ground_truth =
                dataset::ground_truth_from_diff(pre_index, post_index, patch, matcher);
        } catch (const dataset::RevisionMismatch& e) {
            audit.push_back(ordered_json{{"stage", "ground_truth"},
                                         {"id", patch.pr_id},
                                         {"kept", false},
                                         {"reason", e.what()}});
            continue;
        }
        example.ground_truth.query_id = example.query_id;
        if (example.ground_truth.files.empty()) {
            audit.push_back(ordered_json{{"stage", "ground_truth"},
                                         {"id", patch.pr_id},
                                         {"kept", false},
                                         {"reason", "no source file in ground truth"}});
            continue;
        }
        example.repo_name = flags.repo_name;
        example.pr_id = patch.pr_id;
        example.pre_revision = pre_index.revision_tag();
        example.post_revision = post_index.revision_tag();
        lines.push_back(dataset::example_to_jsonl(example));
    }
    io::write_lines(flags.out_path, lines);
    write_audit(flags.audit_path, audit);
    std::cout << "built " << lines.size() << " examples -> " << flags.out_path << "\n";
    return kExitOk;
}

int cmd_build_dataset(const BuildFlags& flags) {
    if (flags.emit == "examples") {
        if (flags.pairs_path.empty() || flags.pre_root.empty() || flags.post_root.empty()) {
            throw Error("bad_config",
                        "--emit examples needs --pairs, --pre-root and --post-root");
        }
        return cmd_build_examples(flags);
    }
    if (flags.emit == "sft") {
        if (flags.trajectories_path.empty()) {
            throw Error("bad_config", "--emit sft needs --trajectories");
        }
        std::vector<agent::Trajectory> trajectories =
            io::load_trajectories(flags.trajectories_path);
        std::ofstream out(flags.out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("unwritable_file", "cannot write " + flags.out_path);
        }
        std::size_t count = dataset::export_sft(trajectories, out);
        std::cout << "exported " << count << " SFT lines -> " << flags.out_path << "\n";
        return kExitOk;
    }
    if (flags.emit == "rl") {
        if (flags.examples_path.empty()) {
            throw Error("bad_config", "--emit rl needs --examples");
        }
        std::vector<dataset::LocalizationExample> examples;
        for (const std::string& line : io::read_jsonl_lines(flags.examples_path)) {
            examples.push_back(dataset::example_from_jsonl(line));
        }
        std::ofstream out(flags.out_path, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error("unwritable_file", "cannot write " + flags.out_path);
        }
        std::size_t count = dataset::export_rl(examples, out);
        std::cout << "exported " << count << " RL lines -> " << flags.out_path << "\n";
        return kExitOk;
    }
    throw Error("bad_config", "unknown --emit '" + flags.emit + "'");
}

// --------------------------------------------------------------- ingest ---

int cmd_ingest(const std::string& source, const std::string& cache_dir, int per_page,
               const std::string& out_path) {
    dataset::IngestOptions options;
    options.cache_dir = cache_dir;
    options.per_page = per_page;
    std::vector<std::string> skipped;
    auto pairs = dataset::ingest_issue_pr_pairs(source, options, &skipped);
    std::vector<std::string> lines;
    for (const auto& [issue, patch] : pairs) {
        ordered_json doc{{"issue",
                          {{"issue_id", issue.issue_id},
                           {"title", issue.title},
                           {"body", issue.body},
                           {"linked_pr_id", issue.linked_pr_id}}},
                         {"patch", {{"pr_id", patch.pr_id}, {"diff", patch.unified_diff}}}};
        lines.push_back(doc.dump());
    }
    io::write_lines(out_path, lines);
    for (const std::string& why : skipped) {
        std::cerr << "skipped pair: " << why << "\n";
    }
    std::cout << "ingested " << pairs.size() << " pairs (" << skipped.size()
              << " skipped) -> " << out_path << "\n";
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"repoloc: repository issue-localization toolkit"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    CommonFlags common;
    std::string config_flag;
    app.add_option("--config", config_flag, "JSON config file")->expected(1);

    // index
    auto* index_cmd = app.add_subcommand("index", "build and persist a repository index");
    std::string index_repo, index_out = "index.json", index_revision, index_label;
    std::vector<std::string> index_includes;
    index_cmd->add_option("repo_root", index_repo, "repository root directory")->required();
    index_cmd->add_option("-o,--out", index_out, "cache output path");
    index_cmd->add_option("--revision", index_revision, "revision tag for the snapshot");
    index_cmd->add_option("--label", index_label, "display name for the repository");
    index_cmd->add_option("--include", index_includes, "source filename globs");

    // localize
    auto* localize_cmd = app.add_subcommand("localize", "run one localization episode");
    std::string localize_issue, localize_index, localize_out, localize_query_id;
    std::string flag_backend, flag_base_url, flag_model, flag_script;
    double flag_temperature = 0.0;
    int flag_max_turns = 0;
    std::uint64_t flag_seed = 0;
    localize_cmd->add_option("--issue", localize_issue, "issue text file")->required();
    localize_cmd->add_option("--index", localize_index, "index cache path")->required();
    localize_cmd->add_option("-o,--out", localize_out, "trajectory JSONL output");
    localize_cmd->add_option("--query-id", localize_query_id, "query id for the record");
    auto* localize_backend = localize_cmd->add_option("--backend", flag_backend,
                                                      "backend kind: http|scripted");
    auto* localize_base_url = localize_cmd->add_option("--base-url", flag_base_url,
                                                       "chat-completions base URL");
    auto* localize_model = localize_cmd->add_option("--model", flag_model, "model name");
    auto* localize_temperature =
        localize_cmd->add_option("--temperature", flag_temperature, "sampling temperature");
    auto* localize_script =
        localize_cmd->add_option("--script", flag_script, "scripted backend turns file");
    auto* localize_max_turns =
        localize_cmd->add_option("--max-turns", flag_max_turns, "episode turn budget");
    auto* localize_seed = localize_cmd->add_option("--seed", flag_seed, "completion seed");

    // sample
    auto* sample_cmd = app.add_subcommand("sample", "run a batch of episodes");
    std::string sample_examples, sample_index, sample_out = "trajectories.jsonl";
    int flag_parallelism = 0;
    sample_cmd->add_option("--examples", sample_examples, "examples JSONL")->required();
    sample_cmd->add_option("--index", sample_index, "index cache path")->required();
    sample_cmd->add_option("-o,--out", sample_out, "trajectories JSONL output");
    auto* sample_backend =
        sample_cmd->add_option("--backend", flag_backend, "backend kind: http|scripted");
    auto* sample_base_url =
        sample_cmd->add_option("--base-url", flag_base_url, "chat-completions base URL");
    auto* sample_model = sample_cmd->add_option("--model", flag_model, "model name");
    auto* sample_temperature =
        sample_cmd->add_option("--temperature", flag_temperature, "sampling temperature");
    auto* sample_script =
        sample_cmd->add_option("--script", flag_script, "scripted backend turns file");
    auto* sample_max_turns =
        sample_cmd->add_option("--max-turns", flag_max_turns, "episode turn budget");
    auto* sample_seed = sample_cmd->add_option("--seed", flag_seed, "base completion seed");
    auto* sample_parallelism =
        sample_cmd->add_option("--parallelism", flag_parallelism, "episodes in flight");

    // reward
    auto* reward_cmd = app.add_subcommand("reward", "score trajectories against ground truth");
    std::string reward_trajectories, reward_truth, reward_out;
    int flag_k = 0;
    std::string flag_level;
    reward_cmd->add_option("--trajectories", reward_trajectories, "trajectories JSONL")
        ->required();
    reward_cmd->add_option("--truth", reward_truth, "ground truth JSONL")->required();
    reward_cmd->add_option("-o,--out", reward_out, "rewarded trajectories JSONL");
    auto* reward_k = reward_cmd->add_option("-k,--k", flag_k, "nDCG cutoff");
    auto* reward_level =
        reward_cmd->add_option("--level", flag_level, "reward level: function|file");

    // filter
    auto* filter_cmd = app.add_subcommand("filter", "rejection-filter trajectories");
    std::string filter_trajectories, filter_truth, filter_out = "kept.jsonl", filter_audit;
    std::string flag_policy;
    double flag_threshold = -1.0;
    filter_cmd->add_option("--trajectories", filter_trajectories, "trajectories JSONL")
        ->required();
    filter_cmd->add_option("--truth", filter_truth, "ground truth JSONL")->required();
    filter_cmd->add_option("-o,--out", filter_out, "kept trajectories JSONL");
    filter_cmd->add_option("--audit", filter_audit, "per-trajectory verdicts JSONL");
    auto* filter_policy =
        filter_cmd->add_option("--policy", flag_policy, "any|topk|reward");
    auto* filter_k = filter_cmd->add_option("-k,--k", flag_k, "top-k window / nDCG cutoff");
    auto* filter_threshold =
        filter_cmd->add_option("--threshold", flag_threshold, "reward policy threshold");
    auto* filter_level =
        filter_cmd->add_option("--level", flag_level, "hit level: function|file");

    // evaluate
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score ranked predictions");
    std::string evaluate_predictions, evaluate_truth, evaluate_json;
    evaluate_cmd->add_option("--predictions", evaluate_predictions, "predictions JSONL")
        ->required();
    evaluate_cmd->add_option("--truth", evaluate_truth, "ground truth JSONL")->required();
    evaluate_cmd->add_option("--json", evaluate_json, "machine-readable report path");
    auto* evaluate_k = evaluate_cmd->add_option("-k,--k", flag_k, "nDCG cutoff");
    auto* evaluate_level =
        evaluate_cmd->add_option("--level", flag_level, "evaluation level: function|file");

    // build-dataset
    auto* build_cmd = app.add_subcommand("build-dataset",
                                         "construct examples / SFT / RL dataset files");
    BuildFlags build;
    build_cmd->add_option("--emit", build.emit, "examples|sft|rl");
    build_cmd->add_option("--pairs", build.pairs_path, "issue/PR pairs JSONL");
    build_cmd->add_option("--pre-root", build.pre_root, "pre-revision working tree");
    build_cmd->add_option("--post-root", build.post_root, "post-revision working tree");
    build_cmd->add_option("--pre-revision", build.pre_revision, "pre-revision tag");
    build_cmd->add_option("--post-revision", build.post_revision, "post-revision tag");
    build_cmd->add_option("--repo-meta", build.repo_meta_path, "repository metadata JSON");
    build_cmd->add_option("--repo-name", build.repo_name, "repository display name");
    build_cmd->add_option("--exclude-list", build.exclude_list_path,
                          "repositories to drop (leakage guard), one per line");
    build_cmd->add_option("--min-issue-chars", build.min_issue_chars,
                          "minimum issue text length");
    build_cmd->add_option("--source-glob", build.source_globs,
                          "source filename globs for ground truth");
    build_cmd->add_option("--exclude-test-dirs", build.exclude_test_dirs,
                          "directory names excluded from ground truth");
    build_cmd->add_option("--trajectories", build.trajectories_path,
                          "kept trajectories JSONL (--emit sft)");
    build_cmd->add_option("--examples", build.examples_path,
                          "examples JSONL (--emit rl)");
    build_cmd->add_option("-o,--out", build.out_path, "output JSONL")->required();
    build_cmd->add_option("--audit", build.audit_path, "filter audit JSONL");

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "normalize issue/PR pairs");
    std::string ingest_source, ingest_cache_dir, ingest_out = "pairs.jsonl";
    int ingest_per_page = 50;
    ingest_cmd->add_option("--source", ingest_source, "pairs JSONL path or http(s) endpoint")
        ->required();
    ingest_cmd->add_option("--cache-dir", ingest_cache_dir, "page cache directory");
    ingest_cmd->add_option("--per-page", ingest_per_page, "page size for remote sources");
    ingest_cmd->add_option("-o,--out", ingest_out, "normalized pairs JSONL");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitEnvironmentFailure;
    }

    try {
        if (!config_flag.empty()) {
            common.config_path = config_flag;
        }
        RunConfig config = effective_config(common);

        auto overlay_backend_flags = [&](CLI::Option* backend, CLI::Option* base_url,
                                         CLI::Option* model, CLI::Option* temperature,
                                         CLI::Option* script, CLI::Option* max_turns,
                                         CLI::Option* seed) {
            if (backend->count() > 0) {
                config.backend.kind = flag_backend;
            }
            if (base_url->count() > 0) {
                config.backend.base_url = flag_base_url;
            }
            if (model->count() > 0) {
                config.backend.model = flag_model;
            }
            if (temperature->count() > 0) {
                config.backend.temperature = flag_temperature;
            }
            if (script->count() > 0) {
                config.backend.script_path = flag_script;
                if (backend->count() == 0) {
                    config.backend.kind = "scripted";
                }
            }
            if (max_turns->count() > 0) {
                config.budget.max_turns = flag_max_turns;
            }
            if (seed->count() > 0) {
                config.seed = flag_seed;
            }
        };

        if (*index_cmd) {
            announce(config);
            return cmd_index(index_repo, index_out, index_revision, index_label,
                             index_includes);
        }
        if (*localize_cmd) {
            overlay_backend_flags(localize_backend, localize_base_url, localize_model,
                                  localize_temperature, localize_script, localize_max_turns,
                                  localize_seed);
            announce(config);
            std::string query_id = localize_query_id;
            if (query_id.empty()) {
                query_id = std::filesystem::path(localize_issue).stem().string();
            }
            return cmd_localize(config, localize_issue, localize_index, localize_out,
                                query_id);
        }
        if (*sample_cmd) {
            overlay_backend_flags(sample_backend, sample_base_url, sample_model,
                                  sample_temperature, sample_script, sample_max_turns,
                                  sample_seed);
            if (sample_parallelism->count() > 0) {
                config.parallelism = flag_parallelism;
            }
            announce(config);
            return cmd_sample(config, sample_examples, sample_index, sample_out);
        }
        if (*reward_cmd) {
            if (reward_k->count() > 0) {
                config.k = flag_k;
            }
            if (reward_level->count() > 0) {
                config.level = flag_level;
            }
            announce(config);
            return cmd_reward(config, reward_trajectories, reward_truth, reward_out);
        }
        if (*filter_cmd) {
            if (filter_policy->count() > 0) {
                config.policy = flag_policy;
            }
            if (filter_k->count() > 0) {
                config.k = flag_k;
            }
            if (filter_threshold->count() > 0) {
                config.reward_threshold = flag_threshold;
            }
            if (filter_level->count() > 0) {
                config.level = flag_level;
            }
            announce(config);
            return cmd_filter(config, filter_trajectories, filter_truth, filter_out,
                              filter_audit);
        }
        if (*evaluate_cmd) {
            if (evaluate_k->count() > 0) {
                config.k = flag_k;
            }
            if (evaluate_level->count() > 0) {
                config.level = flag_level;
            }
            announce(config);
            return cmd_evaluate(config, evaluate_predictions, evaluate_truth, evaluate_json);
        }
        if (*build_cmd) {
            announce(config);
            return cmd_build_dataset(build);
        }
        if (*ingest_cmd) {
            announce(config);
            return cmd_ingest(ingest_source, ingest_cache_dir, ingest_per_page, ingest_out);
        }
        return kExitEnvironmentFailure;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEnvironmentFailure;
    }
}

} // namespace repoloc::cli
