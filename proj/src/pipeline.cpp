#include "handcontact/pipeline.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/hand_model.hpp"
#include "handcontact/image.hpp"
#include "handcontact/util.hpp"
#include "handcontact/visual_prompt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

namespace handcontact {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Response parsing

namespace {

// first balanced top-level JSON object; live models occasionally prepend prose
std::string extract_first_object(const std::string& text) {
    std::size_t start = text.find('{');
    if (start == std::string::npos) return "";
    int depth = 0;
    bool in_string = false, escape = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (escape) {
            escape = false;
            continue;
        }
        if (c == '\\') {
            escape = true;
            continue;
        }
        if (c == '"') in_string = !in_string;
        if (in_string) continue;
        if (c == '{') ++depth;
        if (c == '}') {
            --depth;
            if (depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return "";
}

Violation make_not_json(const std::string& detail) {
    Violation v;
    v.kind = ViolationKind::NotJson;
    v.detail = detail;
    return v;
}

} // namespace

PartParseResult parse_part_response(const std::string& text, const PartSegmentation& seg) {
    PartParseResult result;
    const std::string body = extract_first_object(text);
    if (body.empty()) {
        result.violations.push_back(make_not_json("no balanced JSON object found"));
        return result;
    }
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) {
        result.violations.push_back(make_not_json("object does not parse"));
        return result;
    }
    if (!doc.contains("contact_parts") || !doc["contact_parts"].is_array()) {
        Violation v;
        v.kind = ViolationKind::MissingKey;
        v.detail = "contact_parts";
        result.violations.push_back(v);
        return result;
    }
    PartPrediction prediction;
    std::set<std::string> seen;
    int position = 0;
    for (const auto& entry : doc["contact_parts"]) {
        if (!entry.is_string()) {
            Violation v;
            v.kind = ViolationKind::NonTextEntry;
            v.detail = std::to_string(position);
            v.got = entry.dump();
            result.violations.push_back(v);
        } else {
            const std::string name = entry.get<std::string>();
            if (!seg.find_part(name)) {
                Violation v;
                v.kind = ViolationKind::UnknownPart;
                v.got = name;
                result.violations.push_back(v);
            } else if (seen.insert(name).second) {
                prediction.part_names.push_back(name); // duplicates collapse silently
            }
        }
        ++position;
    }
    if (result.violations.empty()) result.prediction = std::move(prediction);
    return result;
}

DenseParseResult parse_dense_response(const std::string& text, const GridManifest& manifest) {
    DenseParseResult result;
    const std::string body = extract_first_object(text);
    if (body.empty()) {
        result.violations.push_back(make_not_json("no balanced JSON object found"));
        return result;
    }
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
        result.violations.push_back(make_not_json("object does not parse"));
        return result;
    }

    std::set<std::string> selected;
    for (const auto& entry : manifest.entries) selected.insert(entry.part_name);
    for (const auto& [key, value] : doc.items()) {
        if (selected.find(key) == selected.end()) {
            Violation v;
            v.kind = ViolationKind::ExtraPart;
            v.part = key;
            result.violations.push_back(v);
        }
    }

    for (const auto& entry : manifest.entries) {
        if (!doc.contains(entry.part_name)) {
            Violation v;
            v.kind = ViolationKind::MissingPart;
            v.part = entry.part_name;
            result.violations.push_back(v);
            continue;
        }
        const json& grid = doc[entry.part_name];
        bool part_ok = true;
        if (!grid.is_array()) {
            Violation v;
            v.kind = ViolationKind::RowCountMismatch;
            v.part = entry.part_name;
            v.expected = std::to_string(entry.num_rows);
            v.got = "0";
            v.detail = "grid is not an array of rows";
            result.violations.push_back(v);
            continue;
        }
        if (static_cast<int>(grid.size()) != entry.num_rows) {
            Violation v;
            v.kind = ViolationKind::RowCountMismatch;
            v.part = entry.part_name;
            v.expected = std::to_string(entry.num_rows);
            v.got = std::to_string(grid.size());
            result.violations.push_back(v);
            part_ok = false;
        }
        std::vector<std::vector<std::uint8_t>> grid_values;
        const int rows_to_check =
            std::min(static_cast<int>(grid.size()), entry.num_rows); // report what we can
        for (int r = 0; r < rows_to_check; ++r) {
            const json& row = grid[static_cast<std::size_t>(r)];
            const int expected_len = entry.row_lengths[static_cast<std::size_t>(r)];
            if (!row.is_array()) {
                Violation v;
                v.kind = ViolationKind::RowLengthMismatch;
                v.part = entry.part_name;
                v.row = r;
                v.expected = std::to_string(expected_len);
                v.got = "0";
                v.detail = "row is not an array";
                result.violations.push_back(v);
                part_ok = false;
                continue;
            }
            if (static_cast<int>(row.size()) != expected_len) {
                Violation v;
                v.kind = ViolationKind::RowLengthMismatch;
                v.part = entry.part_name;
                v.row = r;
                v.expected = std::to_string(expected_len);
                v.got = std::to_string(row.size());
                result.violations.push_back(v);
                part_ok = false;
            }
            std::vector<std::uint8_t> row_values;
            const int cols = std::min(static_cast<int>(row.size()), expected_len);
            for (int c = 0; c < cols; ++c) {
                const json& cell = row[static_cast<std::size_t>(c)];
                long value = -1;
                if (cell.is_number_integer()) value = cell.get<long>();
                if (value != 0 && value != 1) {
                    Violation v;
                    v.kind = ViolationKind::NonBinaryValue;
                    v.part = entry.part_name;
                    v.row = r;
                    v.col = c;
                    v.got = cell.dump();
                    result.violations.push_back(v);
                    part_ok = false;
                } else {
                    row_values.push_back(static_cast<std::uint8_t>(value));
                }
            }
            grid_values.push_back(std::move(row_values));
        }
        if (part_ok) result.grids.grids.emplace(entry.part_name, std::move(grid_values));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Transcript serialization

namespace {

ordered_json violation_to_json(const Violation& v) {
    return ordered_json{{"kind", to_string(v.kind)}, {"part", v.part},   {"row", v.row},
                        {"col", v.col},              {"expected", v.expected},
                        {"got", v.got},              {"detail", v.detail}};
}

Violation violation_from_json(const json& j) {
    Violation v;
    const std::string kind = j.value("kind", "");
    static const std::pair<const char*, ViolationKind> kKinds[] = {
        {"not_json", ViolationKind::NotJson},
        {"missing_key", ViolationKind::MissingKey},
        {"unknown_part", ViolationKind::UnknownPart},
        {"non_text_entry", ViolationKind::NonTextEntry},
        {"missing_part", ViolationKind::MissingPart},
        {"extra_part", ViolationKind::ExtraPart},
        {"row_count_mismatch", ViolationKind::RowCountMismatch},
        {"row_length_mismatch", ViolationKind::RowLengthMismatch},
        {"non_binary_value", ViolationKind::NonBinaryValue},
        {"empty_response", ViolationKind::EmptyResponse},
    };
    for (const auto& [name, k] : kKinds)
        if (kind == name) v.kind = k;
    v.part = j.value("part", "");
    v.row = j.value("row", -1);
    v.col = j.value("col", -1);
    v.expected = j.value("expected", "");
    v.got = j.value("got", "");
    v.detail = j.value("detail", "");
    return v;
}

ordered_json stage_to_json(const StageRecord& s) {
    ordered_json attempts = ordered_json::array();
    for (const auto& a : s.attempts) {
        ordered_json vio = ordered_json::array();
        for (const auto& v : a.violations) vio.push_back(violation_to_json(v));
        attempts.push_back(ordered_json{{"attempt", a.attempt},
                                        {"prompt", a.prompt},
                                        {"response", a.response},
                                        {"violations", std::move(vio)},
                                        {"input_tokens", a.input_tokens},
                                        {"output_tokens", a.output_tokens},
                                        {"latency_ms", a.latency_ms}});
    }
    return ordered_json{{"stage", s.stage},
                        {"skipped", s.skipped},
                        {"succeeded", s.succeeded},
                        {"attempts", std::move(attempts)}};
}

StageRecord stage_from_json(const json& j) {
    StageRecord s;
    s.stage = j.value("stage", 0);
    s.skipped = j.value("skipped", false);
    s.succeeded = j.value("succeeded", false);
    if (j.contains("attempts")) {
        for (const auto& aj : j["attempts"]) {
            AttemptRecord a;
            a.attempt = aj.value("attempt", 0);
            a.prompt = aj.value("prompt", "");
            a.response = aj.value("response", "");
            if (aj.contains("violations"))
                for (const auto& vj : aj["violations"]) a.violations.push_back(violation_from_json(vj));
            a.input_tokens = aj.value("input_tokens", 0L);
            a.output_tokens = aj.value("output_tokens", 0L);
            a.latency_ms = aj.value("latency_ms", 0L);
            s.attempts.push_back(std::move(a));
        }
    }
    return s;
}

} // namespace

std::string StageTranscript::to_json() const {
    ordered_json j;
    j["sample_id"] = sample_id;
    j["model"] = model;
    j["hand"] = hand;
    j["stages"] = ordered_json::array({stage_to_json(stage0), stage_to_json(stage1),
                                       stage_to_json(stage2)});
    j["z"] = z;
    j["predicted_parts"] = predicted_parts;
    j["dense_parts"] = dense_parts;
    j["manifest_total_vertices"] = manifest_total_vertices;
    j["active_vertex_count"] = active_vertex_count;
    j["degraded"] = degraded;
    j["degraded_reason"] = degraded_reason;
    j["fallback_filled_parts"] = fallback_filled_parts;
    j["error"] = error;
    j["output_tokens_total"] = total_output_tokens();
    ordered_json contact = ordered_json::array();
    for (auto v : final_contact.values) contact.push_back(static_cast<int>(v));
    j["final_contact"] = std::move(contact);
    return j.dump(1);
}

StageTranscript StageTranscript::from_json(const std::string& text, const std::string& origin) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ParseError(origin + ": transcript is not valid JSON");
    StageTranscript t;
    t.sample_id = j.value("sample_id", "");
    t.model = j.value("model", "");
    t.hand = j.value("hand", "right");
    if (j.contains("stages") && j["stages"].is_array() && j["stages"].size() == 3) {
        t.stage0 = stage_from_json(j["stages"][0]);
        t.stage1 = stage_from_json(j["stages"][1]);
        t.stage2 = stage_from_json(j["stages"][2]);
    }
    t.z = j.value("z", "");
    if (j.contains("predicted_parts"))
        t.predicted_parts = j["predicted_parts"].get<std::vector<std::string>>();
    if (j.contains("dense_parts")) t.dense_parts = j["dense_parts"].get<std::vector<std::string>>();
    t.manifest_total_vertices = j.value("manifest_total_vertices", 0L);
    t.active_vertex_count = j.value("active_vertex_count", 0L);
    t.degraded = j.value("degraded", false);
    t.degraded_reason = j.value("degraded_reason", "");
    if (j.contains("fallback_filled_parts"))
        t.fallback_filled_parts = j["fallback_filled_parts"].get<std::vector<std::string>>();
    t.error = j.value("error", "");
    if (j.contains("final_contact"))
        for (const auto& v : j["final_contact"])
            t.final_contact.values.push_back(static_cast<std::uint8_t>(v.get<int>()));
    return t;
}

// ---------------------------------------------------------------------------
// Ablation flags

AblationFlags AblationFlags::parse(const std::string& json_text, const std::string& origin) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded()) throw ParseError(origin + ": ablation config is not valid JSON");
    AblationFlags flags;
    flags.freeform = j.value("freeform", true);
    flags.part_stage = j.value("part_stage", true);
    flags.conditioning = j.value("conditioning", true);
    flags.flatten_grids = j.value("flatten_grids", false);
    flags.segmentation = j.value("segmentation", "detailed");
    if (flags.segmentation != "detailed" && flags.segmentation != "coarse")
        throw ConfigError(origin + ": segmentation must be 'detailed' or 'coarse'");
    return flags;
}

AblationFlags AblationFlags::load(const std::filesystem::path& path) {
    return parse(util::read_text_file(path), path.string());
}

std::string AblationFlags::to_json() const {
    return ordered_json{{"freeform", freeform},
                        {"part_stage", part_stage},
                        {"conditioning", conditioning},
                        {"flatten_grids", flatten_grids},
                        {"segmentation", segmentation}}
        .dump();
}

// ---------------------------------------------------------------------------
// SamplePipeline

SamplePipeline::SamplePipeline(const PartSegmentation& seg, const PromptSet& templates,
                               MllmBackend& backend, TranscriptLog* log, PipelineOptions options,
                               std::string spart_b64, std::string sfull_b64)
    : seg_(seg), templates_(templates), backend_(backend), log_(log),
      options_(std::move(options)), spart_b64_(std::move(spart_b64)),
      sfull_b64_(std::move(sfull_b64)) {
    for (const auto& p : seg_.parts) all_part_names_.push_back(p.name);
}

std::string encode_sample_image(const std::filesystem::path& path, int jpeg_quality) {
    const std::string ext = util::to_lower(path.extension().string());
    if (ext == ".jpg" || ext == ".jpeg") {
        auto bytes = util::read_binary_file(path);
        decode_jpeg(bytes); // must be a decodable JPEG
        return util::base64_encode(bytes.data(), bytes.size());
    }
    (void)jpeg_quality;
    throw ParseError("sample images must be JPEG files: " + path.string());
}

MllmResponse SamplePipeline::send_stage(const InputSample& sample, int stage, int attempt,
                                        const std::string& prompt, const std::string& visual_b64,
                                        const std::vector<std::string>& selected,
                                        const std::string& sample_image_b64) const {
    MllmRequest request;
    request.model = options_.model;
    request.max_output_tokens = options_.max_output_tokens;
    request.temperature = options_.temperature;
    request.messages.push_back(MllmMessage{"user", prompt});
    request.images.push_back(sample_image_b64); // Image 1: the interaction photo
    if (!visual_b64.empty()) request.images.push_back(visual_b64); // Image 2: the visual prompt
    request.tags["sample_id"] = sample.id;
    request.tags["stage"] = std::to_string(stage);
    request.tags["attempt"] = std::to_string(attempt);
    if (stage == 2) {
        ordered_json arr = ordered_json::array();
        for (const auto& name : selected) arr.push_back(name);
        request.tags["selected_parts"] = arr.dump();
    }
    MllmResponse response = backend_.send(request);
    if (log_) log_->add(request, response);
    return response;
}

void SamplePipeline::run_stage0(const InputSample& sample, const std::string& image_b64,
                                StageTranscript& out) const {
    const std::string prompt = render_prompt(templates_.stage0, PromptContext{});
    for (int attempt = 1; attempt <= 2; ++attempt) {
        MllmResponse response = send_stage(sample, 0, attempt, prompt, "", {}, image_b64);
        AttemptRecord rec;
        rec.attempt = attempt;
        rec.prompt = prompt;
        rec.response = response.text;
        rec.input_tokens = response.usage.input_tokens;
        rec.output_tokens = response.usage.output_tokens;
        rec.latency_ms = response.latency_ms;
        if (response.text.empty()) {
            Violation v;
            v.kind = ViolationKind::EmptyResponse;
            rec.violations.push_back(v);
            out.stage0.attempts.push_back(std::move(rec));
            continue; // one re-send of the identical prompt
        }
        out.stage0.attempts.push_back(std::move(rec));
        out.stage0.succeeded = true;
        out.z = response.text;
        return;
    }
    out.z.clear();
    out.degraded = true;
    out.degraded_reason = "stage 0 returned empty responses; continuing with an empty description";
}

void SamplePipeline::run_stage1(const InputSample& sample, const std::string& image_b64,
                                StageTranscript& out) const {
    std::string feedback;
    for (int attempt = 1; attempt <= kPartStageMaxAttempts; ++attempt) {
        PromptContext ctx;
        ctx.z = out.z;
        ctx.part_list = all_part_names_;
        if (!feedback.empty()) ctx.feedback = feedback;
        const std::string prompt = render_prompt(templates_.stage1, ctx);
        MllmResponse response = send_stage(sample, 1, attempt, prompt, spart_b64_, {}, image_b64);
        PartParseResult parsed = parse_part_response(response.text, seg_);

        AttemptRecord rec;
        rec.attempt = attempt;
        rec.prompt = prompt;
        rec.response = response.text;
        rec.violations = parsed.violations;
        rec.input_tokens = response.usage.input_tokens;
        rec.output_tokens = response.usage.output_tokens;
        rec.latency_ms = response.latency_ms;
        out.stage1.attempts.push_back(std::move(rec));

        if (parsed.ok()) {
            out.stage1.succeeded = true;
            out.predicted_parts = parsed.prediction->part_names;
            return;
        }
        feedback = build_error_feedback(parsed.violations);
    }
    // retry budget exhausted: conservative no-contact fallback
    out.predicted_parts.clear();
    out.degraded = true;
    out.degraded_reason = "part stage exhausted its retries; falling back to no contact";
}

void SamplePipeline::run_stage2(const InputSample& sample, const std::string& image_b64,
                                StageTranscript& out, const std::vector<std::string>& selected,
                                const GridManifest& manifest, DenseGridPrediction& grids) const {
    const std::string manifest_json = manifest_to_json(manifest);
    std::string feedback;
    DenseParseResult last;
    for (int attempt = 1; attempt <= kDenseStageMaxAttempts; ++attempt) {
        PromptContext ctx;
        ctx.z = out.z;
        ctx.part_list = selected;
        ctx.grid_manifest = manifest_json;
        if (!feedback.empty()) ctx.feedback = feedback;
        const std::string prompt = render_prompt(templates_.stage2, ctx);
        MllmResponse response = send_stage(sample, 2, attempt, prompt, sfull_b64_, selected, image_b64);
        last = parse_dense_response(response.text, manifest);

        AttemptRecord rec;
        rec.attempt = attempt;
        rec.prompt = prompt;
        rec.response = response.text;
        rec.violations = last.violations;
        rec.input_tokens = response.usage.input_tokens;
        rec.output_tokens = response.usage.output_tokens;
        rec.latency_ms = response.latency_ms;
        out.stage2.attempts.push_back(std::move(rec));

        if (last.ok()) {
            out.stage2.succeeded = true;
            grids = std::move(last.grids);
            return;
        }
        feedback = build_error_feedback(last.violations);
    }
    // retry budget exhausted: keep the parts that validated in the last
    // attempt, fill the rest with all-ones grids (part-level conservative fill)
    grids = std::move(last.grids);
    for (const auto& entry : manifest.entries) {
        if (grids.grids.find(entry.part_name) != grids.grids.end()) continue;
        std::vector<std::vector<std::uint8_t>> ones;
        for (int len : entry.row_lengths)
            ones.emplace_back(static_cast<std::size_t>(len), std::uint8_t{1});
        grids.grids.emplace(entry.part_name, std::move(ones));
        out.fallback_filled_parts.push_back(entry.part_name);
    }
    out.degraded = true;
    if (!out.degraded_reason.empty()) out.degraded_reason += "; ";
    out.degraded_reason += "dense stage exhausted its retries; unparsed parts filled all-ones";
}

StageTranscript SamplePipeline::run_sample(const InputSample& sample) const {
    StageTranscript out;
    out.sample_id = sample.id;
    out.model = options_.model;
    out.hand = sample.hand;
    out.final_contact.values.assign(static_cast<std::size_t>(seg_.vertex_count), 0);

    try {
        const std::string image_b64 = encode_sample_image(sample.image_path, options_.jpeg_quality);

        // stage 0: free-form interaction description
        if (options_.ablation.freeform) {
            run_stage0(sample, image_b64, out);
        } else {
            out.stage0.skipped = true;
        }

        // stage 1: contact part prediction
        if (options_.ablation.part_stage) {
            run_stage1(sample, image_b64, out);
        } else {
            out.stage1.skipped = true;
            out.predicted_parts = all_part_names_;
        }

        // part conditioning decides the dense prediction domain
        out.dense_parts = options_.ablation.conditioning ? out.predicted_parts : all_part_names_;

        DenseGridPrediction grids;
        if (out.dense_parts.empty()) {
            out.stage2.skipped = true; // no selected parts: the result is forced
        } else {
            const std::set<std::string> selected_set(out.dense_parts.begin(), out.dense_parts.end());
            const GridManifest manifest = emit_grid_manifest(seg_, selected_set);
            out.manifest_total_vertices = manifest.total_vertices();
            run_stage2(sample, image_b64, out, out.dense_parts, manifest, grids);
        }

        const std::set<std::string> active_names(out.dense_parts.begin(), out.dense_parts.end());
        const ActiveVertexSet active = vertices_of_parts(seg_, active_names);
        out.active_vertex_count = static_cast<long>(active.size());
        out.final_contact = grids_to_contact(seg_, grids, active);
    } catch (const std::exception& e) {
        out.error = e.what();
        out.degraded = true;
        if (!out.degraded_reason.empty()) out.degraded_reason += "; ";
        out.degraded_reason += "sample failed; final contact forced to all-zero";
        out.final_contact.values.assign(static_cast<std::size_t>(seg_.vertex_count), 0);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dataset runner

RunSummary run_dataset(const RunConfig& config, const std::vector<InputSample>& samples) {
    HandMesh mesh = load_mesh(config.mesh_path);
    std::filesystem::path seg_path = config.seg_path;
    if (config.ablation.segmentation == "coarse") {
        if (!config.seg_coarse_path)
            throw ConfigError("ablation requests the coarse segmentation but no coarse file given");
        seg_path = *config.seg_coarse_path;
    }
    PartSegmentation seg = load_segmentation(seg_path, mesh);
    if (config.ablation.flatten_grids) seg = flatten_grids(seg);

    PromptSet templates = PromptSet::load_dir(config.templates_dir);
    BackendConfig backend_config = BackendConfig::load(config.backend_path);

    std::map<std::string, const ContactVector*> gt_by_id;
    for (const auto& s : samples)
        if (s.gt_contact) gt_by_id[s.id] = &*s.gt_contact;
    OracleContext oracle_ctx;
    oracle_ctx.seg = &seg;
    oracle_ctx.seed = config.seed;
    oracle_ctx.gt_for = [gt_by_id](const std::string& id) -> const ContactVector* {
        auto it = gt_by_id.find(id);
        return it == gt_by_id.end() ? nullptr : it->second;
    };
    std::unique_ptr<MllmBackend> backend = make_backend(backend_config, std::move(oracle_ctx));

    ViewConfig view_cfg;
    RenderedPrompt spart = render_part_prompt(mesh, seg, view_cfg);
    RenderedPrompt sfull = render_full_prompt(mesh, seg, view_cfg);
    const std::string spart_b64 = encode_image(spart.image, view_cfg.jpeg_quality);
    const std::string sfull_b64 = encode_image(sfull.image, view_cfg.jpeg_quality);

    PipelineOptions options;
    options.model = backend_config.model;
    options.max_output_tokens = backend_config.max_output_tokens;
    options.temperature = backend_config.temperature;
    options.ablation = config.ablation;

    TranscriptLog log;
    SamplePipeline pipeline(seg, templates, *backend, &log, options, spart_b64, sfull_b64);

    std::vector<StageTranscript> transcripts(samples.size());
    std::atomic<std::size_t> next{0};
    const int workers = std::max(1, config.workers);
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= samples.size()) return;
            transcripts[i] = pipeline.run_sample(samples[i]);
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const std::filesystem::path transcripts_dir = config.out_dir / "transcripts";
    std::filesystem::create_directories(transcripts_dir);
    RunSummary summary;
    summary.sample_count = static_cast<int>(samples.size());
    summary.out_dir = config.out_dir;
    for (const auto& t : transcripts) {
        util::write_text_file(transcripts_dir / (t.sample_id + ".json"), t.to_json() + "\n");
        summary.total_output_tokens += t.total_output_tokens();
        if (t.degraded) ++summary.degraded_count;
        if (!t.error.empty()) ++summary.error_count;
    }
    log.write_jsonl(config.out_dir / "mllm_log.jsonl");

    ordered_json manifest;
    ordered_json cfg_json;
    cfg_json["mesh"] = config.mesh_path.filename().string();
    cfg_json["segmentation"] = seg_path.filename().string();
    cfg_json["backend_kind"] = backend_config.kind;
    cfg_json["model"] = backend_config.model;
    cfg_json["seed"] = config.seed;
    cfg_json["workers"] = config.workers;
    cfg_json["ablation"] = json::parse(config.ablation.to_json());
    manifest["config_hash"] = util::hex_u64(util::fnv1a64(cfg_json.dump()));
    manifest["config"] = cfg_json;
    manifest["template_hashes"] =
        ordered_json{{"stage0", util::hex_u64(util::fnv1a64(templates.stage0.body))},
                     {"stage1", util::hex_u64(util::fnv1a64(templates.stage1.body))},
                     {"stage2", util::hex_u64(util::fnv1a64(templates.stage2.body))}};
    manifest["backend"] = ordered_json{{"kind", backend_config.kind}, {"model", backend_config.model}};
    manifest["seed"] = config.seed;
    manifest["sample_count"] = samples.size();
    manifest["part_count"] = seg.part_count();
    manifest["vertex_count"] = seg.vertex_count;
    util::write_text_file(config.out_dir / "run_manifest.json", manifest.dump(1) + "\n");
    return summary;
}

} // namespace handcontact
