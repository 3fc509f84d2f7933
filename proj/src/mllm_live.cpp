#include "handcontact/mllm_client.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/httplib_config.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <thread>

namespace handcontact {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

struct Endpoint {
    std::string base; // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint must include a scheme: " + url);
    auto path_start = url.find('/', scheme_end + 3);
    Endpoint ep;
    if (path_start == std::string::npos) {
        ep.base = url;
        ep.path = "/";
    } else {
        ep.base = url.substr(0, path_start);
        ep.path = url.substr(path_start);
    }
    return ep;
}

// bounded in-flight + requests-per-minute gate shared by worker threads
class RequestGate {
public:
    explicit RequestGate(const BackendLimits& limits) : limits_(limits) {}

    void acquire() {
        std::unique_lock<std::mutex> lock(mutex_);
        if (limits_.max_in_flight > 0)
            cv_.wait(lock, [&] { return in_flight_ < limits_.max_in_flight; });
        ++in_flight_;
        if (limits_.requests_per_minute > 0) {
            const auto window = std::chrono::seconds(60);
            for (;;) {
                auto now = std::chrono::steady_clock::now();
                while (!sent_.empty() && now - sent_.front() > window) sent_.pop_front();
                if (static_cast<int>(sent_.size()) < limits_.requests_per_minute) {
                    sent_.push_back(now);
                    break;
                }
                auto wake = sent_.front() + window;
                lock.unlock();
                std::this_thread::sleep_until(wake);
                lock.lock();
            }
        }
    }

    void release() {
        std::lock_guard<std::mutex> lock(mutex_);
        --in_flight_;
        cv_.notify_one();
    }

private:
    BackendLimits limits_;
    std::mutex mutex_;
    std::condition_variable cv_;
    int in_flight_ = 0;
    std::deque<std::chrono::steady_clock::time_point> sent_;
};

class LiveBackend final : public MllmBackend {
public:
    explicit LiveBackend(BackendConfig config)
        : config_(std::move(config)), endpoint_(split_endpoint(config_.endpoint)), gate_(config_.limits) {}

    std::string kind() const override { return "live"; }

    MllmResponse send(const MllmRequest& request) override {
        gate_.acquire();
        struct Release {
            RequestGate& g;
            ~Release() { g.release(); }
        } release{gate_};

        const std::string body = build_body(request);
        httplib::Headers headers = build_headers();

        std::string last_error;
        const int attempts = std::max(1, config_.limits.transport_retries);
        for (int attempt = 1; attempt <= attempts; ++attempt) {
            httplib::Client client(endpoint_.base);
            client.set_connection_timeout(30, 0);
            client.set_read_timeout(300, 0);
            const auto started = std::chrono::steady_clock::now();
            httplib::Result result = client.Post(endpoint_.path, headers, body, "application/json");
            const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                     std::chrono::steady_clock::now() - started)
                                     .count();
            if (!result) {
                last_error = "connection failed (" + httplib::to_string(result.error()) + ")";
            } else if (result->status == 401 || result->status == 403) {
                throw AuthError("backend rejected credentials (HTTP " +
                                std::to_string(result->status) + ")");
            } else if (result->status == 200) {
                return parse_response(result->body, elapsed);
            } else if (result->status == 429 || result->status >= 500) {
                last_error = "HTTP " + std::to_string(result->status);
            } else {
                throw TransportError("HTTP " + std::to_string(result->status) + ": " + result->body);
            }
            if (attempt < attempts)
                std::this_thread::sleep_for(std::chrono::milliseconds(200L << (attempt - 1)));
        }
        throw TransportError("request failed after " + std::to_string(attempts) +
                             " transport attempts: " + last_error);
    }

private:
    std::string api_key() const {
        if (config_.auth_env.empty()) return "";
        const char* key = std::getenv(config_.auth_env.c_str());
        if (!key || !*key)
            throw AuthError("environment variable " + config_.auth_env + " is not set");
        return key;
    }

    httplib::Headers build_headers() const {
        httplib::Headers headers;
        const std::string key = api_key();
        if (!key.empty()) {
            if (config_.auth_scheme == "bearer")
                headers.emplace(config_.auth_header, "Bearer " + key);
            else
                headers.emplace(config_.auth_header, key);
        }
        for (const auto& [k, v] : config_.extra_headers) headers.emplace(k, v);
        return headers;
    }

    std::string build_body(const MllmRequest& request) const {
        ordered_json body;
        body["model"] = request.model;
        body["max_tokens"] = request.max_output_tokens;
        body["temperature"] = request.temperature;
        ordered_json messages = ordered_json::array();
        if (config_.dialect == "openai_chat") {
            for (std::size_t i = 0; i < request.messages.size(); ++i) {
                const auto& m = request.messages[i];
                ordered_json content = ordered_json::array();
                content.push_back(ordered_json{{"type", "text"}, {"text", m.text}});
                if (i + 1 == request.messages.size()) {
                    for (const auto& img : request.images)
                        content.push_back(ordered_json{
                            {"type", "image_url"},
                            {"image_url", ordered_json{{"url", "data:image/jpeg;base64," + img}}}});
                }
                messages.push_back(ordered_json{{"role", m.role}, {"content", std::move(content)}});
            }
        } else { // anthropic_messages
            for (std::size_t i = 0; i < request.messages.size(); ++i) {
                const auto& m = request.messages[i];
                if (m.role == "system") {
                    body["system"] = m.text;
                    continue;
                }
                ordered_json content = ordered_json::array();
                content.push_back(ordered_json{{"type", "text"}, {"text", m.text}});
                if (i + 1 == request.messages.size()) {
                    for (const auto& img : request.images)
                        content.push_back(ordered_json{
                            {"type", "image"},
                            {"source", ordered_json{{"type", "base64"},
                                                    {"media_type", "image/jpeg"},
                                                    {"data", img}}}});
                }
                messages.push_back(ordered_json{{"role", m.role}, {"content", std::move(content)}});
            }
        }
        body["messages"] = std::move(messages);
        return body.dump();
    }

    MllmResponse parse_response(const std::string& body, long latency_ms) const {
        json doc = json::parse(body, nullptr, false);
        if (doc.is_discarded()) throw BackendFormatError("response body is not JSON");
        MllmResponse response;
        response.latency_ms = latency_ms;
        try {
            if (config_.dialect == "openai_chat") {
                response.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
                if (doc.contains("usage")) {
                    response.usage.input_tokens = doc["usage"].value("prompt_tokens", 0L);
                    response.usage.output_tokens = doc["usage"].value("completion_tokens", 0L);
                }
            } else {
                const json& content = doc.at("content");
                for (const auto& block : content)
                    if (block.value("type", "") == "text")
                        response.text += block.value("text", "");
                if (doc.contains("usage")) {
                    response.usage.input_tokens = doc["usage"].value("input_tokens", 0L);
                    response.usage.output_tokens = doc["usage"].value("output_tokens", 0L);
                }
            }
        } catch (const json::exception& e) {
            throw BackendFormatError(std::string("response does not match the ") + config_.dialect +
                                     " dialect: " + e.what());
        }
        return response;
    }

    BackendConfig config_;
    Endpoint endpoint_;
    RequestGate gate_;
};

} // namespace

std::unique_ptr<MllmBackend> make_live_backend(const BackendConfig& config) {
    return std::make_unique<LiveBackend>(config);
}

} // namespace handcontact
