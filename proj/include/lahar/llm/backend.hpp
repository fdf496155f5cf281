#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

namespace lahar::llm {

struct CompletionRequest {
    std::string model;
    double temperature{0.0};
    std::string system;
    std::string user;
    int max_output_tokens{0}; // 0 = backend default
};

/// Cache key: digest of (model, temperature, system, user). Deterministic,
/// content-addressed — positional replay would desynchronize on retries.
std::string request_key(const CompletionRequest& req);

struct TranscriptMeta {
    std::string timestamp; // ISO 8601 UTC
    std::int64_t latency_ms{0};
    std::optional<std::int64_t> prompt_tokens;
    std::optional<std::int64_t> completion_tokens;
};

struct TranscriptEntry {
    std::string key;
    CompletionRequest request;
    std::string response;
    TranscriptMeta meta;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string complete(const CompletionRequest& req) = 0;
    virtual std::string name() const = 0;
};

using BackendPtr = std::shared_ptr<Backend>;

} // namespace lahar::llm
