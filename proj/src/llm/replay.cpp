#include "lahar/llm/replay.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"
#include "lahar/util/digest.hpp"
#include "lahar/util/text.hpp"

namespace lahar::llm {

std::string request_key(const CompletionRequest& req) {
    char temp[32];
    std::snprintf(temp, sizeof(temp), "%.6g", req.temperature);
    std::uint64_t h = util::fnv1a64(req.model);
    h = util::fnv1a64("\x1f", h);
    h = util::fnv1a64(temp, h);
    h = util::fnv1a64("\x1f", h);
    h = util::fnv1a64(req.system, h);
    h = util::fnv1a64("\x1f", h);
    h = util::fnv1a64(req.user, h);
    return util::to_hex(h);
}

namespace {

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

std::string transcript_entry_to_json(const TranscriptEntry& entry) {
    nlohmann::ordered_json j;
    j["key"] = entry.key;
    j["model"] = entry.request.model;
    j["temperature"] = entry.request.temperature;
    j["system"] = entry.request.system;
    j["user"] = entry.request.user;
    j["response"] = entry.response;
    nlohmann::ordered_json meta;
    meta["timestamp"] = entry.meta.timestamp;
    meta["latency_ms"] = entry.meta.latency_ms;
    if (entry.meta.prompt_tokens) {
        meta["prompt_tokens"] = *entry.meta.prompt_tokens;
    }
    if (entry.meta.completion_tokens) {
        meta["completion_tokens"] = *entry.meta.completion_tokens;
    }
    j["meta"] = std::move(meta);
    return j.dump();
}

TranscriptEntry transcript_entry_from_json(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line);
    TranscriptEntry entry;
    entry.request.model = j.value("model", "");
    entry.request.temperature = j.value("temperature", 0.0);
    entry.request.system = j.value("system", "");
    entry.request.user = j.value("user", "");
    entry.response = j.value("response", "");
    entry.key = j.value("key", request_key(entry.request));
    if (j.contains("meta")) {
        const auto& meta = j["meta"];
        entry.meta.timestamp = meta.value("timestamp", "");
        entry.meta.latency_ms = meta.value("latency_ms", std::int64_t{0});
        if (meta.contains("prompt_tokens")) {
            entry.meta.prompt_tokens = meta["prompt_tokens"].get<std::int64_t>();
        }
        if (meta.contains("completion_tokens")) {
            entry.meta.completion_tokens = meta["completion_tokens"].get<std::int64_t>();
        }
    }
    return entry;
}

TranscriptWriter::TranscriptWriter(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path_.parent_path(), ec);
    }
}

void TranscriptWriter::append(const TranscriptEntry& entry) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) {
        throw Error("cannot append to transcript: " + path_.string());
    }
    out << transcript_entry_to_json(entry) << '\n';
    ++count_;
}

std::size_t TranscriptWriter::entries_written() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return count_;
}

void TranscriptStore::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot read transcript: " + path.string());
    }
    std::string line;
    while (std::getline(in, line)) {
        if (util::trim(line).empty()) {
            continue;
        }
        TranscriptEntry entry = transcript_entry_from_json(line);
        responses_[entry.key] = entry.response; // last write wins
    }
}

void TranscriptStore::load_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir, ec)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        load_file(f);
    }
}

std::optional<std::string> TranscriptStore::lookup(const std::string& key) const {
    auto it = responses_.find(key);
    if (it == responses_.end()) {
        return std::nullopt;
    }
    return it->second;
}

ReplayBackend::ReplayBackend(TranscriptStore store, BackendPtr fallback)
    : store_(std::move(store)), fallback_(std::move(fallback)) {}

std::string ReplayBackend::complete(const CompletionRequest& req) {
    const std::string key = request_key(req);
    if (auto hit = store_.lookup(key)) {
        return *hit;
    }
    if (fallback_) {
        return fallback_->complete(req);
    }
    throw BackendUnavailable("no recorded response for key " + key);
}

RecordingBackend::RecordingBackend(BackendPtr inner, std::shared_ptr<TranscriptWriter> writer)
    : inner_(std::move(inner)), writer_(std::move(writer)) {}

std::string RecordingBackend::complete(const CompletionRequest& req) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string response = inner_->complete(req);
    const auto t1 = std::chrono::steady_clock::now();

    TranscriptEntry entry;
    entry.key = request_key(req);
    entry.request = req;
    entry.response = response;
    entry.meta.timestamp = now_iso8601();
    entry.meta.latency_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
    writer_->append(entry);
    return response;
}

} // namespace lahar::llm
