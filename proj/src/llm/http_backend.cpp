#include "lahar/llm/http_backend.hpp"

#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "lahar/core/errors.hpp"
#include "lahar/llm/replay.hpp"

namespace lahar::llm {

namespace {

// splits "https://host:port/v1" into ("https://host:port", "/v1")
std::pair<std::string, std::string> split_base_url(const std::string& base_url) {
    const std::size_t scheme = base_url.find("://");
    const std::size_t path_start =
        base_url.find('/', scheme == std::string::npos ? 0 : scheme + 3);
    if (path_start == std::string::npos) {
        return {base_url, ""};
    }
    std::string prefix = base_url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    return {base_url.substr(0, path_start), prefix};
}

long parse_retry_after_ms(const httplib::Response& res) {
    if (!res.has_header("Retry-After")) {
        return 0;
    }
    const std::string v = res.get_header_value("Retry-After");
    char* end = nullptr;
    const double seconds = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || seconds < 0) {
        return 0;
    }
    return static_cast<long>(seconds * 1000.0);
}

bool looks_context_too_long(const std::string& body) {
    return body.find("context_length_exceeded") != std::string::npos ||
           body.find("maximum context length") != std::string::npos;
}

} // namespace

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty()) {
        throw ConfigError("live backend requires an endpoint URL");
    }
    auto [host, prefix] = split_base_url(config_.base_url);
    host_ = host;
    path_prefix_ = prefix;
}

std::string HttpBackend::complete(const CompletionRequest& req) {
    const std::string key_before = request_key(req);

    nlohmann::json body;
    body["model"] = req.model;
    body["temperature"] = req.temperature;
    if (req.max_output_tokens > 0) {
        body["max_tokens"] = req.max_output_tokens;
    }
    body["messages"] = nlohmann::json::array(
        {{{"role", "system"}, {"content", req.system}}, {{"role", "user"}, {"content", req.user}}});
    const std::string payload = body.dump();

    std::string last_error;
    long last_retry_after_ms = 0;
    bool last_was_rate_limit = false;

    for (int attempt = 0; attempt < config_.max_attempts; ++attempt) {
        if (attempt > 0) {
            const long backoff = config_.backoff_initial_ms << (attempt - 1);
            const long wait = std::max<long>(backoff, last_retry_after_ms);
            std::this_thread::sleep_for(std::chrono::milliseconds(wait));
        }

        httplib::Client client(host_);
        client.set_connection_timeout(config_.connect_timeout_s, 0);
        client.set_read_timeout(config_.read_timeout_s, 0);
        httplib::Headers headers;
        if (!config_.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + config_.api_key);
        }

        auto res = client.Post(path_prefix_ + "/chat/completions", headers, payload,
                               "application/json");
        if (!res) {
            last_error = "connection failed: " + httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            try {
                nlohmann::json j = nlohmann::json::parse(res->body);
                if (request_key(req) != key_before) {
                    throw BackendError("request mutated during completion");
                }
                return j.at("choices").at(0).at("message").at("content").get<std::string>();
            } catch (const nlohmann::json::exception& e) {
                throw BackendError(std::string("malformed completion response: ") + e.what());
            }
        }
        if (res->status == 400 && looks_context_too_long(res->body)) {
            throw ContextTooLong("request exceeds the model's context limit");
        }
        if (res->status == 429) {
            last_was_rate_limit = true;
            last_retry_after_ms = parse_retry_after_ms(*res);
            last_error = "HTTP 429";
            continue;
        }
        if (res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        // other 4xx: not transient
        throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    if (last_was_rate_limit) {
        throw RateLimited("rate limited after " + std::to_string(config_.max_attempts) +
                              " attempts",
                          last_retry_after_ms);
    }
    throw BackendUnavailable("backend unavailable after " +
                             std::to_string(config_.max_attempts) + " attempts (" + last_error +
                             ")");
}

} // namespace lahar::llm
