#pragma once

#include "handcontact/image.hpp"
#include "handcontact/prompt_engine.hpp"
#include "handcontact/types.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace handcontact {

struct MllmMessage {
    std::string role; // "system" | "user"
    std::string text;
};

/// One MLLM invocation. Images are base64 JPEG payloads referenced in order
/// ("Image 1", "Image 2") by the prompt text. `tags` carries routing metadata
/// (sample_id, stage, attempt, selected_parts) consumed by the oracle and
/// replay backends and recorded in transcripts; live backends ignore it.
struct MllmRequest {
    std::string model;
    std::vector<MllmMessage> messages;
    std::vector<std::string> images;
    int max_output_tokens = 4096;
    double temperature = 0.0;
    std::map<std::string, std::string> tags;
};

struct MllmUsage {
    long input_tokens = 0;
    long output_tokens = 0;
};

struct MllmResponse {
    std::string text;
    MllmUsage usage;
    long latency_ms = 0;
};

struct ModelPricing {
    double usd_per_1m_output_tokens = 0.0;
    std::optional<double> usd_per_1m_input_tokens;
};

struct PricingTable {
    std::map<std::string, ModelPricing> models;
};

// Output-token cost in USD; input cost is tracked separately and never mixed
// into this figure. Throws UnknownModelError.
double compute_cost(const MllmUsage& usage, const std::string& model, const PricingTable& pricing);
double compute_cost(long output_tokens, const std::string& model, const PricingTable& pricing);

// Base64 JPEG payload at the given quality; deterministic for fixed input.
std::string encode_image(const Image& image, int jpeg_quality = 90);

// ---------------------------------------------------------------------------
// Backend configuration

struct InjectionRule {
    int stage = 0;        // which stage's responses to corrupt
    int fail_attempts = 0; // attempts 1..n come back malformed
    std::string kind;      // violation kind to exhibit (see ViolationKind names)
};

struct CorruptionConfig {
    double vertex_flip_prob = 0.0; // per dense grid cell
    double part_omit_prob = 0.0;   // per ground-truth part in the part stage
    std::vector<InjectionRule> schedule;

    bool enabled() const {
        return vertex_flip_prob > 0.0 || part_omit_prob > 0.0 || !schedule.empty();
    }
};

struct BackendLimits {
    int max_in_flight = 4;
    int requests_per_minute = 0; // 0 = unlimited
    int transport_retries = 3;
};

struct BackendConfig {
    std::string kind; // "live" | "oracle" | "replay"
    std::string model;
    PricingTable pricing;
    BackendLimits limits;
    int max_output_tokens = 4096;
    double temperature = 0.0;

    // live
    std::string endpoint;
    std::string dialect = "openai_chat"; // or "anthropic_messages"
    std::string auth_env;
    std::string auth_header = "Authorization";
    std::string auth_scheme = "bearer"; // "bearer" prefixes the key, "raw" sends it as-is
    std::map<std::string, std::string> extra_headers;

    // oracle
    CorruptionConfig corruption;

    // replay
    std::string replay_path;

    static BackendConfig load(const std::filesystem::path& path);
    static BackendConfig parse(const std::string& json_text, const std::string& origin);
};

// ---------------------------------------------------------------------------
// Backends

class MllmBackend {
public:
    virtual ~MllmBackend() = default;
    virtual MllmResponse send(const MllmRequest& request) = 0;
    virtual std::string kind() const = 0;
};

/// Answers every request from ground truth, with optional corruption knobs
/// to exercise the structural retry loop deterministically. Requires tagged
/// requests (sample_id, stage, attempt; selected_parts for the dense stage).
struct OracleContext {
    const PartSegmentation* seg = nullptr;
    std::function<const ContactVector*(const std::string& sample_id)> gt_for;
    std::uint64_t seed = 0;
};

std::unique_ptr<MllmBackend> make_oracle_backend(const BackendConfig& config, OracleContext context);
std::unique_ptr<MllmBackend> make_replay_backend(const BackendConfig& config);
std::unique_ptr<MllmBackend> make_live_backend(const BackendConfig& config);

// Dispatch on config.kind. Oracle context may be empty for live/replay.
std::unique_ptr<MllmBackend> make_backend(const BackendConfig& config, OracleContext context = {});

// ---------------------------------------------------------------------------
// Request/response log (JSON lines). Records are buffered and written sorted
// by (sample_id, stage, attempt) so multi-worker runs stay byte-identical.

struct TranscriptRecord {
    std::string sample_id;
    int stage = 0;
    int attempt = 0;
    std::string model;
    int message_count = 0;
    int image_count = 0;
    std::size_t prompt_chars = 0;
    std::string prompt_hash;
    MllmResponse response;
};

class TranscriptLog {
public:
    void add(const MllmRequest& request, const MllmResponse& response);
    void write_jsonl(const std::filesystem::path& path) const;
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<TranscriptRecord> records_;
};

// Loads a JSONL transcript (for the replay backend).
std::vector<TranscriptRecord> load_transcript_jsonl(const std::filesystem::path& path);

} // namespace handcontact
