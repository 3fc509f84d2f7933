#pragma once

#include "handcontact/types.hpp"

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace handcontact {

// Structural violations found while validating an MLLM response. These are
// values, not exceptions: they feed the retry feedback loop.
enum class ViolationKind {
    NotJson,
    MissingKey,
    UnknownPart,
    NonTextEntry,
    MissingPart,
    ExtraPart,
    RowCountMismatch,
    RowLengthMismatch,
    NonBinaryValue,
    EmptyResponse,
};

std::string to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    std::string part;    // part name when applicable
    int row = -1;
    int col = -1;
    std::string expected; // rendered expected value
    std::string got;      // rendered offending value
    std::string detail;   // extra context (missing key name, position, ...)
};

/// Stage text template with {z}, {part_list}, {grid_manifest} placeholders.
/// Each stage's bundled default carries a required marker phrase; load()
/// rejects templates missing it.
struct PromptTemplate {
    int stage = 0;
    std::string body;

    static PromptTemplate load(int stage, const std::filesystem::path& path);
    static PromptTemplate from_text(int stage, std::string text, const std::string& origin);
};

/// The three stage templates of one run.
struct PromptSet {
    PromptTemplate stage0;
    PromptTemplate stage1;
    PromptTemplate stage2;

    // reads stage0_freeform.txt / stage1_part.txt / stage2_dense.txt
    static PromptSet load_dir(const std::filesystem::path& dir);
    const PromptTemplate& stage(int i) const;
};

struct PromptContext {
    std::optional<std::string> z;
    std::optional<std::vector<std::string>> part_list;
    std::optional<std::string> grid_manifest; // already-serialized JSON
    std::optional<std::string> feedback;      // appended as a final section
};

// Substitutes every placeholder the stage requires (stage 0: none; stage 1:
// z, part_list; stage 2: z, part_list, grid_manifest) and appends the
// feedback section when present. Throws MissingContextError naming the first
// absent placeholder.
std::string render_prompt(const PromptTemplate& tmpl, const PromptContext& ctx);

struct GridManifestEntry {
    std::string part_name;
    int part_index = 0;
    int num_rows = 0;
    std::vector<int> row_lengths;
    int total_vertices = 0;
};

struct GridManifest {
    std::vector<GridManifestEntry> entries; // ordered by part index

    int total_vertices() const {
        int n = 0;
        for (const auto& e : entries) n += e.total_vertices;
        return n;
    }
};

// Grid specification the dense stage receives: name, index, row count, row
// lengths and vertex total per selected part. No vertex ids.
GridManifest emit_grid_manifest(const PartSegmentation& seg, const std::set<std::string>& part_names);
std::string manifest_to_json(const GridManifest& manifest);

// One line per violation, machine-stable phrasing, input order preserved.
// Every field of every violation appears in the text.
std::string build_error_feedback(const std::vector<Violation>& violations);

} // namespace handcontact
