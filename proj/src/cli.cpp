#include "handcontact/cli.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/eval_harness.hpp"
#include "handcontact/grid_builder.hpp"
#include "handcontact/hand_model.hpp"
#include "handcontact/mllm_client.hpp"
#include "handcontact/util.hpp"
#include "handcontact/visual_prompt.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <iostream>

namespace handcontact::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

int cmd_validate(const std::string& mesh_path, const std::string& seg_path) {
    HandMesh mesh = load_mesh(mesh_path);
    PartSegmentation seg = load_segmentation(seg_path, mesh);
    GridValidationReport report = validate_grids(seg, mesh);
    for (const auto& diag : report.parts) {
        if (diag.bijection_ok && diag.adjacency_warnings == 0 && diag.monotone_mean_distance &&
            diag.rows_reachable)
            continue;
        std::printf("part %3d %-24s bijection=%s adjacency_warnings=%d monotone=%s\n",
                    diag.part_index, diag.part_name.c_str(), diag.bijection_ok ? "ok" : "FAIL",
                    diag.adjacency_warnings, diag.monotone_mean_distance ? "ok" : "no");
        if (!diag.bijection_detail.empty())
            std::printf("         %s\n", diag.bijection_detail.c_str());
    }
    std::printf("%d parts, %d vertices: %d errors, %d warnings\n", seg.part_count(),
                seg.vertex_count, report.error_count, report.warning_count);
    return report.error_count == 0 ? 0 : 1;
}

int cmd_build_grids(const std::string& mesh_path, const std::string& labeling_path,
                    const std::string& hints_path, const std::string& out_path) {
    HandMesh mesh = load_mesh(mesh_path);
    std::vector<Part> parts = load_labeling(labeling_path, mesh);
    std::vector<OrientationHint> hints =
        hints_path.empty() ? std::vector<OrientationHint>{} : load_hints(hints_path);
    std::vector<RowAdjacencyWarning> warnings;
    PartSegmentation seg = build_segmentation(mesh, std::move(parts), hints, &warnings);
    save_segmentation(seg, out_path);
    for (const auto& w : warnings)
        std::printf("adjacency warning: part %d row %d gap at %d (%d -> %d, hops %d)\n",
                    w.part_index, w.row, w.position, w.vertex_a, w.vertex_b, w.hops);
    std::printf("wrote %s (%d parts, %zu adjacency warnings)\n", out_path.c_str(),
                seg.part_count(), warnings.size());
    return 0;
}

int cmd_render_prompts(const std::string& mesh_path, const std::string& seg_path,
                       const std::string& out_dir) {
    HandMesh mesh = load_mesh(mesh_path);
    PartSegmentation seg = load_segmentation(seg_path, mesh);
    ViewConfig cfg;
    std::filesystem::create_directories(out_dir);
    RenderedPrompt part = render_part_prompt(mesh, seg, cfg);
    RenderedPrompt full = render_full_prompt(mesh, seg, cfg);
    save_jpeg(part.image, std::filesystem::path(out_dir) / "part.jpg", cfg.jpeg_quality);
    save_jpeg(full.image, std::filesystem::path(out_dir) / "full.jpg", cfg.jpeg_quality);
    save_projection_sidecar(full, std::filesystem::path(out_dir) / "projected.json");
    std::printf("wrote part.jpg, full.jpg, projected.json under %s\n", out_dir.c_str());
    return 0;
}

RunConfig make_run_config(const std::string& mesh, const std::string& seg,
                          const std::string& seg_coarse, const std::string& templates,
                          const std::string& backend, const std::string& out, int workers,
                          std::uint64_t seed, const std::string& ablation_path) {
    RunConfig config;
    config.mesh_path = mesh;
    config.seg_path = seg;
    if (!seg_coarse.empty()) config.seg_coarse_path = seg_coarse;
    config.templates_dir = templates;
    config.backend_path = backend;
    config.out_dir = out;
    config.workers = workers;
    config.seed = seed;
    if (!ablation_path.empty()) config.ablation = AblationFlags::load(ablation_path);
    return config;
}

int cmd_run(const RunConfig& config, const std::string& dataset_path) {
    DatasetManifest dataset = load_dataset(dataset_path);
    RunSummary summary = run_dataset(config, dataset.samples);
    std::printf("ran %d samples (%d degraded, %d errors), %ld output tokens -> %s\n",
                summary.sample_count, summary.degraded_count, summary.error_count,
                summary.total_output_tokens, summary.out_dir.string().c_str());
    return 0;
}

int cmd_eval(const std::string& dataset_path, const std::string& backend_path,
             const std::string& run_dir, const std::string& out_dir) {
    DatasetManifest dataset = load_dataset(dataset_path);
    BackendConfig backend = BackendConfig::load(backend_path);
    std::vector<StageTranscript> transcripts = load_transcripts(run_dir, dataset);
    EvalReport report = evaluate_transcripts(transcripts, dataset, backend.model, backend.pricing);
    write_report(report, out_dir.empty() ? run_dir : out_dir);
    std::fputs(report_table(report).c_str(), stdout);
    return 0;
}

int cmd_ablate(const RunConfig& base, const std::string& dataset_path,
               const std::string& variants_path) {
    DatasetManifest dataset = load_dataset(dataset_path);
    BackendConfig backend = BackendConfig::load(base.backend_path);

    std::vector<AblationVariant> variants;
    if (!variants_path.empty()) {
        json doc = json::parse(util::read_text_file(variants_path), nullptr, false);
        if (doc.is_discarded() || !doc.contains("variants"))
            throw ParseError(variants_path + ": expected {\"variants\": [...]}");
        for (const auto& vj : doc["variants"]) {
            AblationVariant v;
            v.name = vj.at("name").get<std::string>();
            v.flags = AblationFlags::parse(vj.dump(), variants_path);
            variants.push_back(std::move(v));
        }
    } else {
        variants = default_variants(base.seg_coarse_path.has_value());
    }

    ordered_json rows = ordered_json::array();
    std::string table = "variant            Precision  Recall     F1         mean tokens  mean cost  "
                        "mean manifest vertices\n";
    for (const auto& variant : variants) {
        RunConfig config = base;
        config.ablation = variant.flags;
        config.out_dir = base.out_dir / "variants" / variant.name;
        RunSummary summary = run_dataset(config, dataset.samples);
        (void)summary;
        std::vector<StageTranscript> transcripts = load_transcripts(config.out_dir, dataset);
        EvalReport report = evaluate_transcripts(transcripts, dataset, backend.model, backend.pricing);
        write_report(report, config.out_dir);

        double mean_manifest = 0.0;
        for (const auto& t : transcripts) mean_manifest += static_cast<double>(t.manifest_total_vertices);
        mean_manifest /= static_cast<double>(transcripts.size());

        ordered_json row;
        row["variant"] = variant.name;
        row["flags"] = json::parse(variant.flags.to_json());
        row["precision"] = report.aggregate.macro_precision;
        row["recall"] = report.aggregate.macro_recall;
        row["f1"] = report.aggregate.macro_f1;
        row["mean_output_tokens"] = report.usage.mean_tokens_per_sample;
        row["mean_cost_usd"] = report.usage.mean_cost_per_sample;
        row["mean_cost"] = util::format_usd(report.usage.mean_cost_per_sample);
        row["mean_manifest_vertices"] = mean_manifest;
        row["degraded_count"] = report.degraded_count;
        rows.push_back(std::move(row));

        char line[256];
        std::snprintf(line, sizeof(line), "%-18s %-10s %-10s %-10s %-12s %-10s %.1f\n",
                      variant.name.c_str(),
                      util::format_fixed3(report.aggregate.macro_precision).c_str(),
                      util::format_fixed3(report.aggregate.macro_recall).c_str(),
                      util::format_fixed3(report.aggregate.macro_f1).c_str(),
                      util::format_fixed3(report.usage.mean_tokens_per_sample).c_str(),
                      util::format_usd(report.usage.mean_cost_per_sample).c_str(), mean_manifest);
        table += line;
    }
    ordered_json doc;
    doc["rows"] = std::move(rows);
    util::write_text_file(base.out_dir / "ablation_report.json", doc.dump(1) + "\n");
    util::write_text_file(base.out_dir / "ablation_report.txt", table);
    std::fputs(table.c_str(), stdout);
    return 0;
}

} // namespace

std::vector<AblationVariant> default_variants(bool with_coarse) {
    std::vector<AblationVariant> variants;
    auto add = [&](const std::string& name, auto mutate) {
        AblationVariant v;
        v.name = name;
        mutate(v.flags);
        variants.push_back(std::move(v));
    };
    add("full", [](AblationFlags&) {});
    add("flatten_grids", [](AblationFlags& f) { f.flatten_grids = true; });
    add("dense_only", [](AblationFlags& f) {
        f.freeform = false;
        f.part_stage = false;
    });
    add("part_dense", [](AblationFlags& f) { f.freeform = false; });
    add("freeform_dense", [](AblationFlags& f) { f.part_stage = false; });
    add("no_conditioning", [](AblationFlags& f) { f.conditioning = false; });
    if (with_coarse) add("coarse_seg", [](AblationFlags& f) { f.segmentation = "coarse"; });
    return variants;
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"dense hand contact estimation via multi-stage multimodal LLM prompting"};
    app.require_subcommand(1);

    std::string mesh, seg, seg_coarse, templates, dataset, backend, out, labeling, hints;
    std::string ablation_path, variants_path, run_dir;
    int workers = 1;
    std::uint64_t seed = 0;

    auto* validate = app.add_subcommand("validate", "check mesh and segmentation invariants");
    validate->add_option("--mesh", mesh)->required();
    validate->add_option("--seg", seg)->required();

    auto* build = app.add_subcommand("build-grids", "construct per-part vertex grids");
    build->add_option("--mesh", mesh)->required();
    build->add_option("--labeling", labeling)->required();
    build->add_option("--hints", hints);
    build->add_option("--out", out)->required();

    auto* render = app.add_subcommand("render-prompts", "render the visual prompts");
    render->add_option("--mesh", mesh)->required();
    render->add_option("--seg", seg)->required();
    render->add_option("--out", out)->required();

    auto* run = app.add_subcommand("run", "run the pipeline over a dataset");
    run->add_option("--mesh", mesh)->required();
    run->add_option("--seg", seg)->required();
    run->add_option("--seg-coarse", seg_coarse);
    run->add_option("--templates-dir", templates)->required();
    run->add_option("--dataset", dataset)->required();
    run->add_option("--backend", backend)->required();
    run->add_option("--out", out)->required();
    run->add_option("--workers", workers);
    run->add_option("--seed", seed);
    run->add_option("--ablation", ablation_path);

    auto* eval = app.add_subcommand("eval", "score a finished run");
    eval->add_option("--dataset", dataset)->required();
    eval->add_option("--backend", backend)->required();
    eval->add_option("--run-dir", run_dir)->required();
    eval->add_option("--out", out);

    auto* ablate = app.add_subcommand("ablate", "run the ablation variant matrix");
    ablate->add_option("--mesh", mesh)->required();
    ablate->add_option("--seg", seg)->required();
    ablate->add_option("--seg-coarse", seg_coarse);
    ablate->add_option("--templates-dir", templates)->required();
    ablate->add_option("--dataset", dataset)->required();
    ablate->add_option("--backend", backend)->required();
    ablate->add_option("--out", out)->required();
    ablate->add_option("--workers", workers);
    ablate->add_option("--seed", seed);
    ablate->add_option("--variants", variants_path);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*validate) return cmd_validate(mesh, seg);
        if (*build) return cmd_build_grids(mesh, labeling, hints, out);
        if (*render) return cmd_render_prompts(mesh, seg, out);
        if (*run)
            return cmd_run(make_run_config(mesh, seg, seg_coarse, templates, backend, out, workers,
                                           seed, ablation_path),
                           dataset);
        if (*eval) return cmd_eval(dataset, backend, run_dir, out);
        if (*ablate)
            return cmd_ablate(make_run_config(mesh, seg, seg_coarse, templates, backend, out,
                                              workers, seed, ablation_path),
                              dataset, variants_path);
    } catch (const Error& e) {
        std::cerr << ordered_json{{"error", e.kind()}, {"message", e.what()}}.dump() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << ordered_json{{"error", "Unexpected"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }
    return 1;
}

} // namespace handcontact::cli
