#pragma once

#include "handcontact/mllm_client.hpp"
#include "handcontact/pipeline.hpp"
#include "handcontact/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace handcontact {

struct DatasetManifest {
    std::vector<InputSample> samples;
    std::filesystem::path root; // manifest directory; image paths resolve against it
};

// Dataset manifest: JSON lines {id, image_path, gt_contact:[...], hand}.
// gt_contact accepts soft values in [0,1]; they binarize at the 0.5
// threshold. Unique ids, expected gt length and image existence are enforced.
DatasetManifest load_dataset(const std::filesystem::path& manifest_path, int expected_length = 778);

struct SampleMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
};

// Vertex-level precision/recall/F1 at the given threshold. Zero-denominator
// convention: a metric whose denominator is empty is 1 when both the
// predicted-positive and actual-positive sets are empty, else 0.
SampleMetrics sample_metrics(const ContactVector& pred, const ContactVector& gt,
                             double threshold = 0.5);

ContactVector binarize(const std::vector<double>& values, double threshold = 0.5);

struct MetricsAggregate {
    // macro: unweighted per-sample means (the headline figures)
    double macro_precision = 0.0, macro_recall = 0.0, macro_f1 = 0.0;
    // micro: pooled confusion counts, for diagnostics
    double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
    long tp = 0, fp = 0, fn = 0, tn = 0;
    int sample_count = 0;
};

MetricsAggregate aggregate_metrics(const std::vector<SampleMetrics>& metrics);

struct UsageRow {
    std::string sample_id;
    long stage_tokens[3] = {0, 0, 0};
    long total_tokens = 0;
    int attempts[3] = {0, 0, 0};
    double cost_usd = 0.0;
};

struct UsageLedger {
    std::vector<UsageRow> rows;
    long total_tokens = 0;
    double total_cost_usd = 0.0;
    double mean_tokens_per_sample = 0.0;
    double mean_cost_per_sample = 0.0;
};

// Per-sample output tokens summed over stages and attempts, priced per model.
UsageLedger usage_report(const std::vector<StageTranscript>& transcripts,
                         const std::string& model, const PricingTable& pricing);

struct EvalReport {
    std::vector<std::string> sample_ids;
    std::vector<SampleMetrics> metrics;
    MetricsAggregate aggregate;
    UsageLedger usage;
    int degraded_count = 0;
};

std::vector<StageTranscript> load_transcripts(const std::filesystem::path& run_dir,
                                              const DatasetManifest& dataset);

EvalReport evaluate_transcripts(const std::vector<StageTranscript>& transcripts,
                                const DatasetManifest& dataset, const std::string& model,
                                const PricingTable& pricing);

// report.json plus a plain-text table (Precision, Recall, F1, # output
// tokens, Cost).
void write_report(const EvalReport& report, const std::filesystem::path& out_dir);
std::string report_table(const EvalReport& report);

} // namespace handcontact
