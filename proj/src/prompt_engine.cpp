#include "handcontact/prompt_engine.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace handcontact {

using nlohmann::ordered_json;

std::string to_string(ViolationKind kind) {
    switch (kind) {
        case ViolationKind::NotJson: return "not_json";
        case ViolationKind::MissingKey: return "missing_key";
        case ViolationKind::UnknownPart: return "unknown_part";
        case ViolationKind::NonTextEntry: return "non_text_entry";
        case ViolationKind::MissingPart: return "missing_part";
        case ViolationKind::ExtraPart: return "extra_part";
        case ViolationKind::RowCountMismatch: return "row_count_mismatch";
        case ViolationKind::RowLengthMismatch: return "row_length_mismatch";
        case ViolationKind::NonBinaryValue: return "non_binary_value";
        case ViolationKind::EmptyResponse: return "empty_response";
    }
    return "unknown";
}

namespace {

// marker phrases every stage template must keep
const char* required_marker(int stage) {
    switch (stage) {
        case 0: return "Output free-form text only.";
        case 1: return "output exactly one JSON object";
        case 2: return "each grid must exactly match the provided num_rows and row_lengths";
        default: return nullptr;
    }
}

bool stage_requires(int stage, const char* placeholder) {
    const std::string p = placeholder;
    if (stage == 0) return false;
    if (stage == 1) return p == "z" || p == "part_list";
    return p == "z" || p == "part_list" || p == "grid_manifest";
}

} // namespace

PromptTemplate PromptTemplate::from_text(int stage, std::string text, const std::string& origin) {
    if (stage < 0 || stage > 2) throw TemplateError("stage must be 0, 1 or 2");
    const char* marker = required_marker(stage);
    if (text.find(marker) == std::string::npos)
        throw TemplateError(origin + ": stage " + std::to_string(stage) +
                            " template is missing its required instruction: \"" + marker + "\"");
    for (const char* ph : {"z", "part_list", "grid_manifest"}) {
        const std::string token = std::string("{") + ph + "}";
        const bool present = text.find(token) != std::string::npos;
        if (stage_requires(stage, ph) && !present)
            throw TemplateError(origin + ": stage " + std::to_string(stage) +
                                " template lacks placeholder " + token);
    }
    return PromptTemplate{stage, std::move(text)};
}

PromptTemplate PromptTemplate::load(int stage, const std::filesystem::path& path) {
    return from_text(stage, util::read_text_file(path), path.string());
}

PromptSet PromptSet::load_dir(const std::filesystem::path& dir) {
    PromptSet set;
    set.stage0 = PromptTemplate::load(0, dir / "stage0_freeform.txt");
    set.stage1 = PromptTemplate::load(1, dir / "stage1_part.txt");
    set.stage2 = PromptTemplate::load(2, dir / "stage2_dense.txt");
    return set;
}

const PromptTemplate& PromptSet::stage(int i) const {
    switch (i) {
        case 0: return stage0;
        case 1: return stage1;
        default: return stage2;
    }
}

static void substitute_all(std::string& text, const std::string& token, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(token, pos)) != std::string::npos) {
        text.replace(pos, token.size(), value);
        pos += value.size();
    }
}

std::string render_prompt(const PromptTemplate& tmpl, const PromptContext& ctx) {
    std::string out = tmpl.body;

    auto need = [&](const char* name, bool have) {
        const std::string token = std::string("{") + name + "}";
        if (out.find(token) == std::string::npos) return false;
        if (!have) throw MissingContextError(std::string(name));
        return true;
    };

    if (need("z", ctx.z.has_value())) substitute_all(out, "{z}", *ctx.z);
    if (need("part_list", ctx.part_list.has_value())) {
        std::string listing;
        for (const auto& name : *ctx.part_list) listing += "- " + name + "\n";
        if (!listing.empty()) listing.pop_back();
        substitute_all(out, "{part_list}", listing);
    }
    if (need("grid_manifest", ctx.grid_manifest.has_value()))
        substitute_all(out, "{grid_manifest}", *ctx.grid_manifest);

    if (ctx.feedback && !ctx.feedback->empty()) {
        if (out.empty() || out.back() != '\n') out += '\n';
        out += "\nError feedback on the previous attempt:\n";
        out += *ctx.feedback;
        if (out.back() != '\n') out += '\n';
        out += "Correct every listed violation and answer again.\n";
    }
    return out;
}

GridManifest emit_grid_manifest(const PartSegmentation& seg, const std::set<std::string>& part_names) {
    std::vector<const Part*> selected;
    for (const auto& name : part_names) {
        const Part* p = seg.find_part(name);
        if (!p) throw UnknownPartError("unknown part name: " + name);
        selected.push_back(p);
    }
    std::sort(selected.begin(), selected.end(),
              [](const Part* a, const Part* b) { return a->index < b->index; });

    GridManifest manifest;
    for (const Part* p : selected) {
        // parts are stored index-ordered; locate the matching grid
        const GridSpec* grid = nullptr;
        for (std::size_t i = 0; i < seg.parts.size(); ++i)
            if (seg.parts[i].index == p->index) grid = &seg.grids[i];
        GridManifestEntry entry;
        entry.part_name = p->name;
        entry.part_index = p->index;
        entry.num_rows = grid->num_rows;
        entry.row_lengths = grid->row_lengths;
        entry.total_vertices = grid->total_vertices();
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

std::string manifest_to_json(const GridManifest& manifest) {
    ordered_json arr = ordered_json::array();
    for (const auto& e : manifest.entries) {
        ordered_json ej;
        ej["part_name"] = e.part_name;
        ej["part_index"] = e.part_index;
        ej["num_rows"] = e.num_rows;
        ej["row_lengths"] = e.row_lengths;
        ej["total_vertices"] = e.total_vertices;
        arr.push_back(std::move(ej));
    }
    return arr.dump();
}

std::string build_error_feedback(const std::vector<Violation>& violations) {
    std::string out;
    for (const auto& v : violations) {
        std::string line = "- " + to_string(v.kind);
        switch (v.kind) {
            case ViolationKind::NotJson:
                line += ": the response must contain exactly one JSON object";
                if (!v.detail.empty()) line += " (" + v.detail + ")";
                break;
            case ViolationKind::MissingKey:
                line += ": required key \"" + v.detail + "\" is missing or has the wrong type";
                break;
            case ViolationKind::UnknownPart:
                line += ": unknown part name \"" + v.got + "\"";
                break;
            case ViolationKind::NonTextEntry:
                line += ": entry at position " + v.detail + " is not a string (got " + v.got + ")";
                break;
            case ViolationKind::MissingPart:
                line += ": part \"" + v.part + "\" is selected but has no grid in the response";
                break;
            case ViolationKind::ExtraPart:
                line += ": part \"" + v.part + "\" is not among the selected parts";
                break;
            case ViolationKind::RowCountMismatch:
                line += ": part \"" + v.part + "\" expected " + v.expected + " rows, got " + v.got;
                break;
            case ViolationKind::RowLengthMismatch:
                line += ": part \"" + v.part + "\" row " + std::to_string(v.row) + " expected length " +
                        v.expected + ", got " + v.got;
                break;
            case ViolationKind::NonBinaryValue:
                line += ": part \"" + v.part + "\" row " + std::to_string(v.row) + " col " +
                        std::to_string(v.col) + " must be 0 or 1, got " + v.got;
                break;
            case ViolationKind::EmptyResponse:
                line += ": the response was empty";
                break;
        }
        out += line + "\n";
    }
    return out;
}

} // namespace handcontact
