#include "repoloc/dataset_builder.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace repoloc::dataset {

namespace {

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : data) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string cache_key(std::string_view url) {
    std::ostringstream out;
    out << std::hex << fnv1a64(url);
    return out.str() + ".json";
}

std::pair<IssueRecord, PatchRecord> pair_from_json(const nlohmann::json& doc) {
    const nlohmann::json& issue_json = doc.at("issue");
    IssueRecord issue;
    issue.issue_id = issue_json.at("issue_id").get<std::string>();
    issue.title = issue_json.value("title", "");
    issue.body = issue_json.value("body", "");
    issue.linked_pr_id = issue_json.value("linked_pr_id", "");

    const nlohmann::json& patch_json = doc.at("patch");
    PatchRecord patch = make_patch_record(patch_json.at("pr_id").get<std::string>(),
                                          patch_json.at("diff").get<std::string>());
    return {std::move(issue), std::move(patch)};
}

std::vector<std::pair<IssueRecord, PatchRecord>> ingest_local(
    const std::string& path, std::vector<std::string>* skipped) {
    std::ifstream in(path);
    if (!in) {
        throw SourceUnavailable("cannot open " + path);
    }
    std::vector<std::pair<IssueRecord, PatchRecord>> pairs;
    std::string line;
    size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            pairs.push_back(pair_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw SourceUnavailable("line " + std::to_string(line_number) +
                                    " is not a valid pair record: " + e.what());
        } catch (const MalformedDiff& e) {
            if (skipped != nullptr) {
                skipped->push_back("line " + std::to_string(line_number) + ": " + e.what());
            }
        }
    }
    return pairs;
}

// split "http://host:port/some/path" into client base and request path
std::pair<std::string, std::string> split_url(const std::string& url) {
    const size_t scheme = url.find("://");
    const size_t path_start = scheme == std::string::npos
                                  ? url.find('/')
                                  : url.find('/', scheme + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string fetch_page(const std::string& base, const std::string& path_and_query,
                       const IngestOptions& options, const std::string& cache_path) {
    if (!cache_path.empty() && fs::exists(cache_path)) {
        std::ifstream in(cache_path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        return buffer.str();
    }

    std::string token;
    if (const char* env = std::getenv(options.token_env.c_str())) {
        token = env;
    }
    std::string last_error = "no attempts made";
    for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
        if (attempt > 1) {
            std::this_thread::sleep_for(std::chrono::milliseconds(200 * attempt));
        }
        httplib::Client client(base);
        client.set_connection_timeout(std::chrono::seconds(10));
        client.set_read_timeout(std::chrono::seconds(60));
        httplib::Headers headers;
        if (!token.empty()) {
            headers.emplace("Authorization", "Bearer " + token);
        }
        auto response = client.Get(path_and_query, headers);
        if (!response) {
            last_error = "transport error: " + httplib::to_string(response.error());
            continue;
        }
        if (response->status == 401 || response->status == 403) {
            throw AuthFailure("HTTP " + std::to_string(response->status) + " from " + base);
        }
        if (response->status == 429) {
            // respect the server's pacing before the next attempt
            int wait_seconds = 1;
            if (response->has_header("Retry-After")) {
                wait_seconds = std::max(1, std::atoi(
                    response->get_header_value("Retry-After").c_str()));
            }
            std::this_thread::sleep_for(
                std::chrono::seconds(std::min(wait_seconds, 5)));
            last_error = "HTTP 429";
            continue;
        }
        if (response->status != 200) {
            last_error = "HTTP " + std::to_string(response->status);
            continue;
        }
        if (!cache_path.empty()) {
            fs::create_directories(fs::path(cache_path).parent_path());
            std::ofstream out(cache_path, std::ios::binary | std::ios::trunc);
            out << response->body;
        }
        return response->body;
    }
    throw SourceUnavailable(last_error);
}

std::vector<std::pair<IssueRecord, PatchRecord>> ingest_remote(
    const std::string& url, const IngestOptions& options,
    std::vector<std::string>* skipped) {
    const auto [base, path] = split_url(url);
    std::vector<std::pair<IssueRecord, PatchRecord>> pairs;
    for (int page = 1;; ++page) {
        std::string page_path = path;
        page_path += path.find('?') == std::string::npos ? "?" : "&";
        page_path += "page=" + std::to_string(page) +
                     "&per_page=" + std::to_string(options.per_page);
        std::string cache_path;
        if (!options.cache_dir.empty()) {
            cache_path = (fs::path(options.cache_dir) / cache_key(base + page_path)).string();
        }
        const std::string body = fetch_page(base, page_path, options, cache_path);
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw SourceUnavailable("page " + std::to_string(page) +
                                    " is not valid JSON: " + e.what());
        }
        if (!doc.is_array()) {
            throw SourceUnavailable("page " + std::to_string(page) + " is not a JSON array");
        }
        if (doc.empty()) {
            break;
        }
        for (const nlohmann::json& record : doc) {
            try {
                pairs.push_back(pair_from_json(record));
            } catch (const nlohmann::json::exception& e) {
                throw SourceUnavailable("malformed pair record on page " +
                                        std::to_string(page) + ": " + e.what());
            } catch (const MalformedDiff& e) {
                if (skipped != nullptr) {
                    skipped->push_back("page " + std::to_string(page) + ": " + e.what());
                }
            }
        }
    }
    return pairs;
}

} // namespace

std::vector<std::pair<IssueRecord, PatchRecord>> ingest_issue_pr_pairs(
    const std::string& source, const IngestOptions& options,
    std::vector<std::string>* skipped) {
    if (source.rfind("http://", 0) == 0 || source.rfind("https://", 0) == 0) {
        return ingest_remote(source, options, skipped);
    }
    return ingest_local(source, skipped);
}

} // namespace repoloc::dataset
