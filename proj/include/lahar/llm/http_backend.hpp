#pragma once

#include <string>

#include "lahar/llm/backend.hpp"

namespace lahar::llm {

struct HttpBackendConfig {
    std::string base_url;   // e.g. https://api.openai.com/v1 or http://127.0.0.1:8089/v1
    std::string api_key;    // from environment, never from config files
    int max_attempts{3};    // transient failures retried with exponential backoff
    int connect_timeout_s{10};
    int read_timeout_s{120};
    int backoff_initial_ms{1000};
};

/// OpenAI-compatible chat-completion client. Requests are sent as one system
/// and one user message; the request object is never mutated.
class HttpBackend : public Backend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    std::string complete(const CompletionRequest& req) override;
    std::string name() const override { return "live"; }

private:
    HttpBackendConfig config_;
    std::string host_;   // scheme://host[:port]
    std::string path_prefix_;
};

} // namespace lahar::llm
