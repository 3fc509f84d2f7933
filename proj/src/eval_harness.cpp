#include "handcontact/eval_harness.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace handcontact {

using nlohmann::json;
using nlohmann::ordered_json;

DatasetManifest load_dataset(const std::filesystem::path& manifest_path, int expected_length) {
    DatasetManifest dataset;
    dataset.root = manifest_path.parent_path();
    std::istringstream in(util::read_text_file(manifest_path));
    std::string line;
    int lineno = 0;
    std::set<std::string> ids;
    std::vector<std::string> missing_images;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw ParseError(manifest_path.string() + ":" + std::to_string(lineno) +
                             ": bad JSON line");
        InputSample sample;
        sample.id = j.value("id", "");
        if (sample.id.empty())
            throw ParseError(manifest_path.string() + ":" + std::to_string(lineno) + ": missing id");
        if (!ids.insert(sample.id).second)
            throw ParseError(manifest_path.string() + ": duplicate sample id '" + sample.id + "'");
        if (!j.contains("image_path"))
            throw ParseError(manifest_path.string() + ": sample '" + sample.id +
                             "' missing image_path");
        sample.image_path = dataset.root / j["image_path"].get<std::string>();
        sample.hand = j.value("hand", "right");
        if (j.contains("gt_contact")) {
            const json& gt = j["gt_contact"];
            if (!gt.is_array() || static_cast<int>(gt.size()) != expected_length)
                throw ParseError(manifest_path.string() + ": sample '" + sample.id +
                                 "' gt_contact length " + std::to_string(gt.size()) + " != " +
                                 std::to_string(expected_length));
            std::vector<double> values;
            values.reserve(gt.size());
            for (const auto& v : gt) {
                const double d = v.get<double>();
                if (d < 0.0 || d > 1.0)
                    throw ParseError(manifest_path.string() + ": sample '" + sample.id +
                                     "' gt_contact value outside [0,1]");
                values.push_back(d);
            }
            sample.gt_contact = binarize(values, 0.5);
        }
        if (!std::filesystem::exists(sample.image_path)) missing_images.push_back(sample.id);
        dataset.samples.push_back(std::move(sample));
    }
    if (!missing_images.empty()) {
        std::string ids_text;
        for (std::size_t i = 0; i < missing_images.size() && i < 8; ++i)
            ids_text += (i ? ", " : "") + missing_images[i];
        throw MissingImageError("image files missing for samples: " + ids_text);
    }
    return dataset;
}

ContactVector binarize(const std::vector<double>& values, double threshold) {
    ContactVector out;
    out.values.reserve(values.size());
    for (double v : values) out.values.push_back(v >= threshold ? 1 : 0);
    return out;
}

SampleMetrics sample_metrics(const ContactVector& pred, const ContactVector& gt, double threshold) {
    if (pred.size() != gt.size())
        throw LengthMismatchError("prediction length " + std::to_string(pred.size()) +
                                  " != ground truth length " + std::to_string(gt.size()));
    SampleMetrics m;
    for (std::size_t v = 0; v < pred.size(); ++v) {
        const bool p = static_cast<double>(pred.values[v]) >= threshold;
        const bool g = static_cast<double>(gt.values[v]) >= threshold;
        if (p && g) ++m.tp;
        else if (p && !g) ++m.fp;
        else if (!p && g) ++m.fn;
        else ++m.tn;
    }
    const bool no_pred_pos = (m.tp + m.fp) == 0;
    const bool no_true_pos = (m.tp + m.fn) == 0;
    m.precision = no_pred_pos ? (no_true_pos ? 1.0 : 0.0)
                              : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.recall = no_true_pos ? (no_pred_pos ? 1.0 : 0.0)
                           : static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

MetricsAggregate aggregate_metrics(const std::vector<SampleMetrics>& metrics) {
    if (metrics.empty()) throw EmptyDatasetError("no samples to aggregate");
    MetricsAggregate agg;
    agg.sample_count = static_cast<int>(metrics.size());
    for (const auto& m : metrics) {
        agg.macro_precision += m.precision;
        agg.macro_recall += m.recall;
        agg.macro_f1 += m.f1;
        agg.tp += m.tp;
        agg.fp += m.fp;
        agg.fn += m.fn;
        agg.tn += m.tn;
    }
    agg.macro_precision /= agg.sample_count;
    agg.macro_recall /= agg.sample_count;
    agg.macro_f1 /= agg.sample_count;

    const bool no_pred_pos = (agg.tp + agg.fp) == 0;
    const bool no_true_pos = (agg.tp + agg.fn) == 0;
    agg.micro_precision = no_pred_pos ? (no_true_pos ? 1.0 : 0.0)
                                      : static_cast<double>(agg.tp) / static_cast<double>(agg.tp + agg.fp);
    agg.micro_recall = no_true_pos ? (no_pred_pos ? 1.0 : 0.0)
                                   : static_cast<double>(agg.tp) / static_cast<double>(agg.tp + agg.fn);
    agg.micro_f1 = (agg.micro_precision + agg.micro_recall) > 0.0
                       ? 2.0 * agg.micro_precision * agg.micro_recall /
                             (agg.micro_precision + agg.micro_recall)
                       : 0.0;
    return agg;
}

UsageLedger usage_report(const std::vector<StageTranscript>& transcripts,
                         const std::string& model, const PricingTable& pricing) {
    UsageLedger ledger;
    for (const auto& t : transcripts) {
        UsageRow row;
        row.sample_id = t.sample_id;
        const StageRecord* stages[3] = {&t.stage0, &t.stage1, &t.stage2};
        for (int s = 0; s < 3; ++s) {
            row.stage_tokens[s] = stages[s]->output_tokens();
            row.attempts[s] = static_cast<int>(stages[s]->attempts.size());
            row.total_tokens += row.stage_tokens[s];
        }
        row.cost_usd = compute_cost(row.total_tokens, model, pricing);
        ledger.total_tokens += row.total_tokens;
        ledger.total_cost_usd += row.cost_usd;
        ledger.rows.push_back(std::move(row));
    }
    if (!ledger.rows.empty()) {
        ledger.mean_tokens_per_sample =
            static_cast<double>(ledger.total_tokens) / static_cast<double>(ledger.rows.size());
        ledger.mean_cost_per_sample = ledger.total_cost_usd / static_cast<double>(ledger.rows.size());
    }
    return ledger;
}

std::vector<StageTranscript> load_transcripts(const std::filesystem::path& run_dir,
                                              const DatasetManifest& dataset) {
    std::vector<StageTranscript> transcripts;
    const std::filesystem::path dir = run_dir / "transcripts";
    for (const auto& sample : dataset.samples) {
        const std::filesystem::path path = dir / (sample.id + ".json");
        if (!std::filesystem::exists(path))
            throw IoError("missing transcript for sample '" + sample.id + "': " + path.string());
        transcripts.push_back(StageTranscript::from_json(util::read_text_file(path), path.string()));
    }
    return transcripts;
}

EvalReport evaluate_transcripts(const std::vector<StageTranscript>& transcripts,
                                const DatasetManifest& dataset, const std::string& model,
                                const PricingTable& pricing) {
    if (transcripts.size() != dataset.samples.size())
        throw LengthMismatchError("transcript count does not match the dataset");
    EvalReport report;
    for (std::size_t i = 0; i < transcripts.size(); ++i) {
        const auto& t = transcripts[i];
        const auto& sample = dataset.samples[i];
        if (!sample.gt_contact)
            throw ParseError("sample '" + sample.id + "' has no ground-truth contact");
        report.sample_ids.push_back(t.sample_id);
        report.metrics.push_back(sample_metrics(t.final_contact, *sample.gt_contact));
        if (t.degraded) ++report.degraded_count;
    }
    report.aggregate = aggregate_metrics(report.metrics);
    report.usage = usage_report(transcripts, model, pricing);
    return report;
}

std::string report_table(const EvalReport& report) {
    std::ostringstream out;
    char line[256];
    out << "sample            Precision  Recall     F1         # output tokens  Cost\n";
    for (std::size_t i = 0; i < report.sample_ids.size(); ++i) {
        const auto& m = report.metrics[i];
        const auto& u = report.usage.rows[i];
        std::snprintf(line, sizeof(line), "%-17s %-10s %-10s %-10s %-16ld %s\n",
                      report.sample_ids[i].c_str(), util::format_fixed3(m.precision).c_str(),
                      util::format_fixed3(m.recall).c_str(), util::format_fixed3(m.f1).c_str(),
                      u.total_tokens, util::format_usd(u.cost_usd).c_str());
        out << line;
    }
    const auto& a = report.aggregate;
    out << "\n";
    std::snprintf(line, sizeof(line), "%-17s %-10s %-10s %-10s %-16s %s\n", "macro mean",
                  util::format_fixed3(a.macro_precision).c_str(),
                  util::format_fixed3(a.macro_recall).c_str(),
                  util::format_fixed3(a.macro_f1).c_str(),
                  util::format_fixed3(report.usage.mean_tokens_per_sample).c_str(),
                  util::format_usd(report.usage.mean_cost_per_sample).c_str());
    out << line;
    std::snprintf(line, sizeof(line), "%-17s %-10s %-10s %-10s\n", "micro (pooled)",
                  util::format_fixed3(a.micro_precision).c_str(),
                  util::format_fixed3(a.micro_recall).c_str(),
                  util::format_fixed3(a.micro_f1).c_str());
    out << line;
    std::snprintf(line, sizeof(line), "totals: %d samples, %ld output tokens, %s\n", a.sample_count,
                  report.usage.total_tokens, util::format_usd(report.usage.total_cost_usd).c_str());
    out << line;
    return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& out_dir) {
    ordered_json doc;
    ordered_json samples = ordered_json::array();
    for (std::size_t i = 0; i < report.sample_ids.size(); ++i) {
        const auto& m = report.metrics[i];
        const auto& u = report.usage.rows[i];
        samples.push_back(ordered_json{{"id", report.sample_ids[i]},
                                       {"precision", m.precision},
                                       {"recall", m.recall},
                                       {"f1", m.f1},
                                       {"tp", m.tp},
                                       {"fp", m.fp},
                                       {"fn", m.fn},
                                       {"tn", m.tn},
                                       {"output_tokens", u.total_tokens},
                                       {"stage_tokens", {u.stage_tokens[0], u.stage_tokens[1],
                                                         u.stage_tokens[2]}},
                                       {"attempts", {u.attempts[0], u.attempts[1], u.attempts[2]}},
                                       {"cost_usd", u.cost_usd},
                                       {"cost", util::format_usd(u.cost_usd)}});
    }
    doc["samples"] = std::move(samples);
    const auto& a = report.aggregate;
    doc["macro"] = ordered_json{{"precision", a.macro_precision},
                                {"recall", a.macro_recall},
                                {"f1", a.macro_f1}};
    doc["micro"] = ordered_json{{"precision", a.micro_precision},
                                {"recall", a.micro_recall},
                                {"f1", a.micro_f1},
                                {"tp", a.tp},
                                {"fp", a.fp},
                                {"fn", a.fn},
                                {"tn", a.tn}};
    doc["usage"] = ordered_json{{"total_output_tokens", report.usage.total_tokens},
                                {"total_cost_usd", report.usage.total_cost_usd},
                                {"total_cost", util::format_usd(report.usage.total_cost_usd)},
                                {"mean_output_tokens_per_sample", report.usage.mean_tokens_per_sample},
                                {"mean_cost_per_sample_usd", report.usage.mean_cost_per_sample},
                                {"mean_cost_per_sample", util::format_usd(report.usage.mean_cost_per_sample)}};
    doc["degraded_count"] = report.degraded_count;
    doc["sample_count"] = a.sample_count;
    util::write_text_file(out_dir / "report.json", doc.dump(1) + "\n");
    util::write_text_file(out_dir / "report.txt", report_table(report));
}

} // namespace handcontact
