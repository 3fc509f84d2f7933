#pragma once

#include "handcontact/mllm_client.hpp"
#include "handcontact/prompt_engine.hpp"
#include "handcontact/types.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace handcontact {

// attempt budgets: one initial request plus the allowed re-tries
inline constexpr int kPartStageMaxAttempts = 3;  // 1 + 2 re-tries
inline constexpr int kDenseStageMaxAttempts = 5; // 1 + 4 re-tries

struct InputSample {
    std::string id;
    std::filesystem::path image_path;
    std::optional<ContactVector> gt_contact;
    std::string hand = "right";
};

struct PartPrediction {
    std::vector<std::string> part_names; // deduplicated, first occurrence preserved

    std::size_t count() const { return part_names.size(); }
};

struct PartParseResult {
    std::optional<PartPrediction> prediction;
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Extracts the first balanced JSON object from the response text, validates
// the "contact_parts" key and part-name membership. All violations are
// collected, not fail-fast.
PartParseResult parse_part_response(const std::string& text, const PartSegmentation& seg);

struct DenseParseResult {
    DenseGridPrediction grids; // only parts whose own grid is shape-valid
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
};

// Validates one JSON object of per-part grids against the manifest shapes:
// missing/extra parts, row counts, row lengths, binary values.
DenseParseResult parse_dense_response(const std::string& text, const GridManifest& manifest);

// ---------------------------------------------------------------------------
// Transcripts

struct AttemptRecord {
    int attempt = 0;
    std::string prompt;
    std::string response;
    std::vector<Violation> violations;
    long input_tokens = 0;
    long output_tokens = 0;
    long latency_ms = 0;
};

struct StageRecord {
    StageRecord() = default;
    explicit StageRecord(int s) : stage(s) {}

    int stage = 0;
    bool skipped = false;
    bool succeeded = false;
    std::vector<AttemptRecord> attempts;

    long output_tokens() const {
        long n = 0;
        for (const auto& a : attempts) n += a.output_tokens;
        return n;
    }
};

struct StageTranscript {
    std::string sample_id;
    std::string model;
    std::string hand = "right";
    StageRecord stage0{0};
    StageRecord stage1{1};
    StageRecord stage2{2};
    std::string z;
    std::vector<std::string> predicted_parts; // stage-1 outcome
    std::vector<std::string> dense_parts;     // parts the dense stage was queried over
    long manifest_total_vertices = 0;
    long active_vertex_count = 0;
    bool degraded = false;
    std::string degraded_reason;
    std::vector<std::string> fallback_filled_parts; // dense fallback all-ones fills
    std::string error; // unexpected per-sample failure, never aborts the run
    ContactVector final_contact;

    long total_output_tokens() const {
        return stage0.output_tokens() + stage1.output_tokens() + stage2.output_tokens();
    }

    std::string to_json() const;
    static StageTranscript from_json(const std::string& text, const std::string& origin);
};

// ---------------------------------------------------------------------------
// Execution

struct AblationFlags {
    bool freeform = true;     // stage 0 on/off
    bool part_stage = true;   // stage 1 on/off (off: dense over all parts)
    bool conditioning = true; // off: dense over all parts, stage 1 still runs
    bool flatten_grids = false;
    std::string segmentation = "detailed"; // or "coarse"

    static AblationFlags parse(const std::string& json_text, const std::string& origin);
    static AblationFlags load(const std::filesystem::path& path);
    std::string to_json() const;
};

struct PipelineOptions {
    std::string model;
    int max_output_tokens = 4096;
    double temperature = 0.0;
    int jpeg_quality = 90;
    AblationFlags ablation;
};

/// Per-run immutable context executing the three reasoning stages for one
/// sample at a time. Thread-safe: all state is read-only after construction
/// except the backend/log, which synchronize internally.
class SamplePipeline {
public:
    SamplePipeline(const PartSegmentation& seg, const PromptSet& templates, MllmBackend& backend,
                   TranscriptLog* log, PipelineOptions options, std::string spart_b64,
                   std::string sfull_b64);

    // Runs stages 0 -> 1 -> 2 sequentially, applies part conditioning and
    // aggregates grids into the final contact vector. Never throws for
    // per-sample failures; they are recorded on the transcript.
    StageTranscript run_sample(const InputSample& sample) const;

private:
    MllmResponse send_stage(const InputSample& sample, int stage, int attempt,
                            const std::string& prompt, const std::string& visual_b64,
                            const std::vector<std::string>& selected,
                            const std::string& sample_image_b64) const;
    void run_stage0(const InputSample& sample, const std::string& image_b64,
                    StageTranscript& out) const;
    void run_stage1(const InputSample& sample, const std::string& image_b64,
                    StageTranscript& out) const;
    void run_stage2(const InputSample& sample, const std::string& image_b64,
                    StageTranscript& out, const std::vector<std::string>& selected,
                    const GridManifest& manifest, DenseGridPrediction& grids) const;

    const PartSegmentation& seg_;
    const PromptSet& templates_;
    MllmBackend& backend_;
    TranscriptLog* log_;
    PipelineOptions options_;
    std::string spart_b64_;
    std::string sfull_b64_;
    std::vector<std::string> all_part_names_;
};

// base64 JPEG payload for a dataset image (.jpg/.jpeg files are passed
// through byte-for-byte)
std::string encode_sample_image(const std::filesystem::path& path, int jpeg_quality);

struct RunConfig {
    std::filesystem::path mesh_path;
    std::filesystem::path seg_path;
    std::optional<std::filesystem::path> seg_coarse_path;
    std::filesystem::path templates_dir;
    std::filesystem::path backend_path;
    std::filesystem::path out_dir;
    int workers = 1;
    std::uint64_t seed = 0;
    AblationFlags ablation;
};

struct RunSummary {
    int sample_count = 0;
    int degraded_count = 0;
    int error_count = 0;
    long total_output_tokens = 0;
    std::filesystem::path out_dir;
};

// Executes the pipeline over a whole dataset with a bounded worker pool and
// writes per-sample transcripts, the request log and the run manifest under
// config.out_dir. Per-sample failures never abort the run.
RunSummary run_dataset(const RunConfig& config, const std::vector<InputSample>& samples);

} // namespace handcontact
