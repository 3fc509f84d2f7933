#pragma once

#include "handcontact/types.hpp"

#include <filesystem>
#include <set>
#include <string>

namespace handcontact {

// Mesh I/O: ASCII OBJ subset. Only `v x y z` and triangular `f a b c` records
// (1-based indices, `a/t/n` index groups tolerated); comments and blank lines
// skipped. The mesh must be one connected component.
HandMesh load_mesh(const std::filesystem::path& path);
HandMesh parse_mesh(const std::string& obj_text, const std::string& origin);
void save_mesh(const HandMesh& mesh, const std::filesystem::path& path);

// Validates connectivity and face index bounds; throws TopologyError.
void validate_mesh(const HandMesh& mesh);

// Segmentation file: JSON {version, part_count, parts:[{name, index,
// vertex_ids, grid:{num_rows, row_lengths, row_vertex_ids}}]}, vertex ids
// 0-based. All invariants (strict partition, grid bijection) are checked.
PartSegmentation load_segmentation(const std::filesystem::path& path, const HandMesh& mesh);
PartSegmentation parse_segmentation(const std::string& json_text, const HandMesh& mesh,
                                    const std::string& origin);
void save_segmentation(const PartSegmentation& seg, const std::filesystem::path& path);

// Same checks as load_segmentation, for programmatically built segmentations.
void validate_segmentation(const PartSegmentation& seg);

// Union of the named parts' vertex sets.
ActiveVertexSet vertices_of_parts(const PartSegmentation& seg, const std::set<std::string>& part_names);

// Aggregates per-part grids into a contact vector. A vertex gets its grid
// cell value only when it lies in `active` and its part's grid is present;
// everything else is non-contact. Grids must match their GridSpec shapes.
ContactVector grids_to_contact(const PartSegmentation& seg, const DenseGridPrediction& grids,
                               const ActiveVertexSet& active);

// Inverse mapping: reads every part's grid cells from `contact`.
// grids_to_contact(contact_to_grids(c), all parts) == c.
DenseGridPrediction contact_to_grids(const PartSegmentation& seg, const ContactVector& contact);

// Restriction of contact_to_grids to a subset of parts (oracle backends).
DenseGridPrediction contact_to_grids(const PartSegmentation& seg, const ContactVector& contact,
                                     const std::set<std::string>& part_names);

// Flatten-grid ablation: every part collapsed to a single row.
PartSegmentation flatten_grids(const PartSegmentation& seg);

} // namespace handcontact
