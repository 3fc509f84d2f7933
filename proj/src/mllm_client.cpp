#include "handcontact/mllm_client.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/hand_model.hpp"
#include "handcontact/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <random>
#include <sstream>

namespace handcontact {

using nlohmann::json;
using nlohmann::ordered_json;

double compute_cost(long output_tokens, const std::string& model, const PricingTable& pricing) {
    auto it = pricing.models.find(model);
    if (it == pricing.models.end())
        throw UnknownModelError("no pricing entry for model '" + model + "'");
    return static_cast<double>(output_tokens) * it->second.usd_per_1m_output_tokens / 1e6;
}

double compute_cost(const MllmUsage& usage, const std::string& model, const PricingTable& pricing) {
    return compute_cost(usage.output_tokens, model, pricing);
}

std::string encode_image(const Image& image, int jpeg_quality) {
    if (image.empty()) throw EncodeError("cannot encode an empty image");
    auto bytes = encode_jpeg(image, jpeg_quality);
    return util::base64_encode(bytes.data(), bytes.size());
}

// ---------------------------------------------------------------------------
// Config

BackendConfig BackendConfig::parse(const std::string& json_text, const std::string& origin) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw ParseError(origin + ": backend config is not valid JSON");
    BackendConfig cfg;
    cfg.kind = doc.value("kind", "");
    if (cfg.kind != "live" && cfg.kind != "oracle" && cfg.kind != "replay")
        throw ConfigError(origin + ": kind must be live, oracle or replay");
    cfg.model = doc.value("model", "");
    if (cfg.model.empty()) throw ConfigError(origin + ": model is required");

    if (doc.contains("pricing")) {
        for (const auto& [name, pj] : doc["pricing"].items()) {
            ModelPricing p;
            p.usd_per_1m_output_tokens = pj.value("usd_per_1m_output_tokens", 0.0);
            if (pj.contains("usd_per_1m_input_tokens"))
                p.usd_per_1m_input_tokens = pj["usd_per_1m_input_tokens"].get<double>();
            if (p.usd_per_1m_output_tokens < 0.0 ||
                (p.usd_per_1m_input_tokens && *p.usd_per_1m_input_tokens < 0.0))
                throw ConfigError(origin + ": pricing rates must be >= 0");
            cfg.pricing.models[name] = p;
        }
    }
    if (doc.contains("limits")) {
        const json& lj = doc["limits"];
        cfg.limits.max_in_flight = lj.value("max_in_flight", cfg.limits.max_in_flight);
        cfg.limits.requests_per_minute = lj.value("requests_per_minute", 0);
        cfg.limits.transport_retries = lj.value("transport_retries", cfg.limits.transport_retries);
    }
    cfg.max_output_tokens = doc.value("max_output_tokens", cfg.max_output_tokens);
    cfg.temperature = doc.value("temperature", 0.0);

    cfg.endpoint = doc.value("endpoint", "");
    cfg.dialect = doc.value("dialect", "openai_chat");
    if (cfg.dialect != "openai_chat" && cfg.dialect != "anthropic_messages")
        throw ConfigError(origin + ": dialect must be openai_chat or anthropic_messages");
    cfg.auth_env = doc.value("auth_env", "");
    cfg.auth_header = doc.value("auth_header", "Authorization");
    cfg.auth_scheme = doc.value("auth_scheme", "bearer");
    if (doc.contains("extra_headers"))
        for (const auto& [k, v] : doc["extra_headers"].items())
            cfg.extra_headers[k] = v.get<std::string>();

    if (doc.contains("corruption")) {
        const json& cj = doc["corruption"];
        cfg.corruption.vertex_flip_prob = cj.value("vertex_flip_prob", 0.0);
        cfg.corruption.part_omit_prob = cj.value("part_omit_prob", 0.0);
        if (cj.contains("schedule")) {
            for (const auto& sj : cj["schedule"]) {
                InjectionRule rule;
                rule.stage = sj.at("stage").get<int>();
                rule.fail_attempts = sj.at("fail_attempts").get<int>();
                rule.kind = sj.at("kind").get<std::string>();
                cfg.corruption.schedule.push_back(std::move(rule));
            }
        }
    }
    cfg.replay_path = doc.value("replay_path", "");
    if (cfg.kind == "live" && cfg.endpoint.empty())
        throw ConfigError(origin + ": live backend requires an endpoint");
    if (cfg.kind == "replay" && cfg.replay_path.empty())
        throw ConfigError(origin + ": replay backend requires replay_path");
    return cfg;
}

BackendConfig BackendConfig::load(const std::filesystem::path& path) {
    BackendConfig cfg = parse(util::read_text_file(path), path.string());
    if (cfg.kind == "replay" && !cfg.replay_path.empty()) {
        std::filesystem::path rp(cfg.replay_path);
        if (rp.is_relative()) cfg.replay_path = (path.parent_path() / rp).string();
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Shared helpers

namespace {

long estimate_tokens(std::size_t chars) { return static_cast<long>((chars + 3) / 4); }

MllmUsage synth_usage(const MllmRequest& request, const std::string& response_text) {
    MllmUsage usage;
    std::size_t prompt_chars = 0;
    for (const auto& m : request.messages) prompt_chars += m.text.size();
    usage.input_tokens = estimate_tokens(prompt_chars) +
                         64 * static_cast<long>(request.images.size());
    usage.output_tokens = estimate_tokens(response_text.size());
    return usage;
}

std::string require_tag(const MllmRequest& request, const char* key) {
    auto it = request.tags.find(key);
    if (it == request.tags.end())
        throw BackendFormatError(std::string("request is missing required tag '") + key + "'");
    return it->second;
}

std::uint64_t mix_seed(std::uint64_t seed, const std::string& sample_id, int stage, int attempt) {
    return util::fnv1a64(util::hex_u64(seed) + "|" + sample_id + "|" + std::to_string(stage) +
                         "|" + std::to_string(attempt));
}

} // namespace

// ---------------------------------------------------------------------------
// Oracle backend

namespace {

class OracleBackend final : public MllmBackend {
public:
    OracleBackend(BackendConfig config, OracleContext context)
        : config_(std::move(config)), ctx_(std::move(context)) {
        if (!ctx_.seg || !ctx_.gt_for)
            throw ConfigError("oracle backend requires a segmentation and ground-truth lookup");
    }

    std::string kind() const override { return "oracle"; }

    MllmResponse send(const MllmRequest& request) override {
        const std::string sample_id = require_tag(request, "sample_id");
        const int stage = std::stoi(require_tag(request, "stage"));
        const int attempt = std::stoi(require_tag(request, "attempt"));
        const ContactVector* gt = ctx_.gt_for(sample_id);
        if (!gt) throw BackendFormatError("oracle has no ground truth for sample '" + sample_id + "'");

        std::mt19937_64 rng(mix_seed(ctx_.seed, sample_id, stage, attempt));

        std::string text;
        if (const InjectionRule* rule = active_rule(stage, attempt)) {
            text = corrupted_response(*rule, request, *gt, rng);
        } else if (stage == 0) {
            text = describe(*gt);
        } else if (stage == 1) {
            text = part_response(*gt, rng);
        } else {
            text = dense_response(request, *gt, rng);
        }
        MllmResponse response;
        response.text = text;
        response.usage = synth_usage(request, text);
        response.latency_ms = 0;
        return response;
    }

private:
    const InjectionRule* active_rule(int stage, int attempt) const {
        for (const auto& rule : config_.corruption.schedule)
            if (rule.stage == stage && attempt <= rule.fail_attempts) return &rule;
        return nullptr;
    }

    std::vector<std::string> gt_parts(const ContactVector& gt) const {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < ctx_.seg->parts.size(); ++i) {
            const Part& p = ctx_.seg->parts[i];
            for (int v : p.vertex_ids) {
                if (gt.values[static_cast<std::size_t>(v)]) {
                    names.push_back(p.name);
                    break;
                }
            }
        }
        return names;
    }

    std::string describe(const ContactVector& gt) const {
        auto parts = gt_parts(gt);
        if (parts.empty())
            return "The right hand is visible but does not touch the object; no contact regions "
                   "are present.";
        std::string text = "The right hand grips the object. Contact is concentrated on " +
                           std::to_string(parts.size()) + " region(s): ";
        for (std::size_t i = 0; i < parts.size(); ++i) text += (i ? ", " : "") + parts[i];
        text += ". The remaining hand surface stays clear of the object.";
        return text;
    }

    std::string part_response(const ContactVector& gt, std::mt19937_64& rng) const {
        auto parts = gt_parts(gt);
        if (config_.corruption.part_omit_prob > 0.0) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::vector<std::string> kept;
            for (auto& name : parts)
                if (u(rng) >= config_.corruption.part_omit_prob) kept.push_back(name);
            parts = std::move(kept);
        }
        ordered_json obj;
        obj["contact_parts"] = parts;
        return obj.dump();
    }

    std::set<std::string> selected_parts(const MllmRequest& request) const {
        json arr = json::parse(require_tag(request, "selected_parts"), nullptr, false);
        if (arr.is_discarded() || !arr.is_array())
            throw BackendFormatError("selected_parts tag is not a JSON array");
        std::set<std::string> names;
        for (const auto& n : arr) names.insert(n.get<std::string>());
        return names;
    }

    ordered_json grids_json(const MllmRequest& request, const ContactVector& gt,
                            std::mt19937_64& rng) const {
        DenseGridPrediction grids = contact_to_grids(*ctx_.seg, gt, selected_parts(request));
        if (config_.corruption.vertex_flip_prob > 0.0) {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (auto& [name, grid] : grids.grids)
                for (auto& row : grid)
                    for (auto& cell : row)
                        if (u(rng) < config_.corruption.vertex_flip_prob) cell = cell ? 0 : 1;
        }
        ordered_json obj = ordered_json::object();
        // iterate parts in index order for deterministic key layout
        for (const auto& part : ctx_.seg->parts) {
            auto it = grids.grids.find(part.name);
            if (it == grids.grids.end()) continue;
            ordered_json grid = ordered_json::array();
            for (const auto& row : it->second) {
                ordered_json rj = ordered_json::array();
                for (auto cell : row) rj.push_back(static_cast<int>(cell));
                grid.push_back(std::move(rj));
            }
            obj[part.name] = std::move(grid);
        }
        return obj;
    }

    std::string dense_response(const MllmRequest& request, const ContactVector& gt,
                               std::mt19937_64& rng) const {
        return grids_json(request, gt, rng).dump();
    }

    // Builds a response exhibiting exactly the named structural violation.
    std::string corrupted_response(const InjectionRule& rule, const MllmRequest& request,
                                   const ContactVector& gt, std::mt19937_64& rng) const {
        const std::string& kind = rule.kind;
        if (kind == "empty_response") return "";
        if (kind == "not_json") return "I believe the contact layout is roughly {\"unterminated\": [1, 0";
        if (rule.stage == 1) {
            if (kind == "missing_key") return R"({"parts": ["something"]})";
            if (kind == "unknown_part") return R"({"contact_parts": ["__not_a_hand_part__"]})";
            if (kind == "non_text_entry") return R"({"contact_parts": [7, 11]})";
            throw ConfigError("injection kind '" + kind + "' is not valid for stage 1");
        }
        if (rule.stage == 0)
            throw ConfigError("stage 0 supports only empty_response injection");

        ordered_json obj = grids_json(request, gt, rng);
        if (obj.empty())
            return R"({"__not_a_hand_part__": [[1]]})"; // nothing selected: force an extra part
        auto first = obj.begin();
        if (kind == "missing_part") {
            obj.erase(first.key());
            return obj.dump();
        }
        if (kind == "extra_part") {
            obj["__not_a_hand_part__"] = ordered_json::array({ordered_json::array({1})});
            return obj.dump();
        }
        if (kind == "row_count_mismatch") {
            ordered_json& grid = first.value();
            if (grid.size() > 1)
                grid.erase(grid.size() - 1);
            else
                grid.push_back(ordered_json::array({0}));
            return obj.dump();
        }
        if (kind == "row_length_mismatch") {
            ordered_json& row = first.value().at(0);
            if (row.size() > 1)
                row.erase(row.size() - 1);
            else
                row.push_back(0);
            return obj.dump();
        }
        if (kind == "non_binary_value") {
            first.value().at(0).at(0) = 2;
            return obj.dump();
        }
        throw ConfigError("unknown injection kind '" + kind + "'");
    }

    BackendConfig config_;
    OracleContext ctx_;
};

} // namespace

std::unique_ptr<MllmBackend> make_oracle_backend(const BackendConfig& config, OracleContext context) {
    return std::make_unique<OracleBackend>(config, std::move(context));
}

// ---------------------------------------------------------------------------
// Replay backend

namespace {

class ReplayBackend final : public MllmBackend {
public:
    explicit ReplayBackend(const BackendConfig& config) {
        for (auto& rec : load_transcript_jsonl(config.replay_path))
            records_.emplace(key(rec.sample_id, rec.stage, rec.attempt), rec.response);
    }

    std::string kind() const override { return "replay"; }

    MllmResponse send(const MllmRequest& request) override {
        const std::string k = key(require_tag(request, "sample_id"),
                                  std::stoi(require_tag(request, "stage")),
                                  std::stoi(require_tag(request, "attempt")));
        auto it = records_.find(k);
        if (it == records_.end())
            throw BackendFormatError("replay transcript has no record for " + k);
        return it->second;
    }

private:
    static std::string key(const std::string& sample_id, int stage, int attempt) {
        return sample_id + "/stage" + std::to_string(stage) + "/attempt" + std::to_string(attempt);
    }
    std::map<std::string, MllmResponse> records_;
};

} // namespace

std::unique_ptr<MllmBackend> make_replay_backend(const BackendConfig& config) {
    return std::make_unique<ReplayBackend>(config);
}

std::unique_ptr<MllmBackend> make_backend(const BackendConfig& config, OracleContext context) {
    if (config.kind == "oracle") return make_oracle_backend(config, std::move(context));
    if (config.kind == "replay") return make_replay_backend(config);
    return make_live_backend(config);
}

// ---------------------------------------------------------------------------
// Transcript log

void TranscriptLog::add(const MllmRequest& request, const MllmResponse& response) {
    TranscriptRecord rec;
    auto tag = [&](const char* k) {
        auto it = request.tags.find(k);
        return it == request.tags.end() ? std::string() : it->second;
    };
    rec.sample_id = tag("sample_id");
    rec.stage = tag("stage").empty() ? 0 : std::stoi(tag("stage"));
    rec.attempt = tag("attempt").empty() ? 0 : std::stoi(tag("attempt"));
    rec.model = request.model;
    rec.message_count = static_cast<int>(request.messages.size());
    rec.image_count = static_cast<int>(request.images.size());
    std::string prompt;
    for (const auto& m : request.messages) prompt += m.text;
    rec.prompt_chars = prompt.size();
    rec.prompt_hash = util::hex_u64(util::fnv1a64(prompt));
    rec.response = response;
    std::lock_guard<std::mutex> lock(mutex_);
    records_.push_back(std::move(rec));
}

std::size_t TranscriptLog::size() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return records_.size();
}

void TranscriptLog::write_jsonl(const std::filesystem::path& path) const {
    std::vector<TranscriptRecord> sorted;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        sorted = records_;
    }
    std::sort(sorted.begin(), sorted.end(), [](const TranscriptRecord& a, const TranscriptRecord& b) {
        if (a.sample_id != b.sample_id) return a.sample_id < b.sample_id;
        if (a.stage != b.stage) return a.stage < b.stage;
        return a.attempt < b.attempt;
    });
    std::string out;
    for (const auto& rec : sorted) {
        ordered_json j;
        j["sample_id"] = rec.sample_id;
        j["stage"] = rec.stage;
        j["attempt"] = rec.attempt;
        j["model"] = rec.model;
        j["message_count"] = rec.message_count;
        j["image_count"] = rec.image_count;
        j["prompt_chars"] = rec.prompt_chars;
        j["prompt_hash"] = rec.prompt_hash;
        j["response"] = ordered_json{{"text", rec.response.text},
                                     {"input_tokens", rec.response.usage.input_tokens},
                                     {"output_tokens", rec.response.usage.output_tokens},
                                     {"latency_ms", rec.response.latency_ms}};
        out += j.dump() + "\n";
    }
    util::write_text_file(path, out);
}

std::vector<TranscriptRecord> load_transcript_jsonl(const std::filesystem::path& path) {
    std::istringstream in(util::read_text_file(path));
    std::vector<TranscriptRecord> records;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError(path.string() + ":" + std::to_string(lineno) + ": bad JSON line");
        TranscriptRecord rec;
        rec.sample_id = j.value("sample_id", "");
        rec.stage = j.value("stage", 0);
        rec.attempt = j.value("attempt", 0);
        rec.model = j.value("model", "");
        rec.message_count = j.value("message_count", 0);
        rec.image_count = j.value("image_count", 0);
        rec.prompt_chars = j.value("prompt_chars", std::size_t{0});
        rec.prompt_hash = j.value("prompt_hash", "");
        if (j.contains("response")) {
            const json& rj = j["response"];
            rec.response.text = rj.value("text", "");
            rec.response.usage.input_tokens = rj.value("input_tokens", 0L);
            rec.response.usage.output_tokens = rj.value("output_tokens", 0L);
            rec.response.latency_ms = rj.value("latency_ms", 0L);
        }
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace handcontact
