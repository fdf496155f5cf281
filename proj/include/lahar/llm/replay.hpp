#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <vector>

#include "lahar/llm/backend.hpp"

namespace lahar::llm {

/// Append-only JSONL transcript; one entry per issued request. Appends are
/// serialized so concurrent chunk calls within a segment cannot interleave.
class TranscriptWriter {
public:
    explicit TranscriptWriter(std::filesystem::path path);

    void append(const TranscriptEntry& entry);
    std::size_t entries_written() const;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::size_t count_{0};
};

std::string transcript_entry_to_json(const TranscriptEntry& entry);
TranscriptEntry transcript_entry_from_json(const std::string& line);

/// In-memory key -> response map loaded from one or more JSONL transcripts.
class TranscriptStore {
public:
    TranscriptStore() = default;

    void load_file(const std::filesystem::path& path);
    void load_directory(const std::filesystem::path& dir); // every *.jsonl
    std::optional<std::string> lookup(const std::string& key) const;
    std::size_t size() const { return responses_.size(); }

private:
    std::map<std::string, std::string> responses_;
};

/// Replays recorded responses. Strict mode raises BackendUnavailable on a
/// cache miss; with a fallback backend, misses are forwarded (and the caller
/// records them), which is how reference transcripts get produced.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(TranscriptStore store, BackendPtr fallback = nullptr);

    std::string complete(const CompletionRequest& req) override;
    std::string name() const override { return fallback_ ? "record" : "replay"; }

private:
    TranscriptStore store_;
    BackendPtr fallback_;
};

/// Decorator that appends every completed call to a transcript.
class RecordingBackend : public Backend {
public:
    RecordingBackend(BackendPtr inner, std::shared_ptr<TranscriptWriter> writer);

    std::string complete(const CompletionRequest& req) override;
    std::string name() const override { return inner_->name(); }

private:
    BackendPtr inner_;
    std::shared_ptr<TranscriptWriter> writer_;
};

} // namespace lahar::llm
