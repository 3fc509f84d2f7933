#pragma once

#include "handcontact/geometry.hpp"
#include "handcontact/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace handcontact {

/// Where a part's grid starts and how "left to right" is defined for it.
/// `distal_seeds` supports parts whose distal boundary is a vertex set.
struct OrientationHint {
    int part_index = 0;
    std::vector<int> distal_seeds; // >= 1 seed, all inside the part
    ViewAxis view_axis = ViewAxis::Palmar;
};

struct RowAdjacencyWarning {
    int part_index = 0;
    int row = 0;
    int position = 0; // gap between row[position] and row[position+1]
    int vertex_a = 0;
    int vertex_b = 0;
    int hops = 0; // graph distance in the induced submesh (>2, or -1 if disconnected)
};

// Rows are breadth-first distance layers from the distal seed set over the
// part's induced vertex adjacency; within a row vertices are sorted by the
// left-to-right screen coordinate of the hint's view (ties by vertex index).
// Consecutive within-row vertices farther than 2 hops apart produce warnings.
GridSpec build_part_grid(const HandMesh& mesh, const Part& part, const OrientationHint& hint,
                         std::vector<RowAdjacencyWarning>* warnings = nullptr);

// Builds a full segmentation from a part labeling plus per-part hints.
// Parts missing a hint fall back to {lowest vertex id, palmar}.
PartSegmentation build_segmentation(const HandMesh& mesh, std::vector<Part> parts,
                                    const std::vector<OrientationHint>& hints,
                                    std::vector<RowAdjacencyWarning>* warnings = nullptr);

struct PartDiagnostics {
    int part_index = 0;
    std::string part_name;
    bool bijection_ok = true;
    std::string bijection_detail;
    int adjacency_warnings = 0;
    bool monotone_mean_distance = true; // mean distance from row 0 rises with row index
    bool rows_reachable = true;         // every row reachable from row 0 in the submesh
};

struct GridValidationReport {
    std::vector<PartDiagnostics> parts;
    int error_count = 0;   // bijection failures
    int warning_count = 0; // adjacency + monotonicity findings
};

// Report-only re-validation of grids against mesh topology.
GridValidationReport validate_grids(const PartSegmentation& seg, const HandMesh& mesh);

// Hints file: JSON array of {part_index, distal_seed | distal_seeds, view_axis}.
std::vector<OrientationHint> load_hints(const std::filesystem::path& path);
void save_hints(const std::vector<OrientationHint>& hints, const std::filesystem::path& path);

// Labeling file: segmentation JSON without grids ({version, part_count,
// parts:[{name, index, vertex_ids}]}).
std::vector<Part> load_labeling(const std::filesystem::path& path, const HandMesh& mesh);
void save_labeling(const std::vector<Part>& parts, const std::filesystem::path& path);

} // namespace handcontact
