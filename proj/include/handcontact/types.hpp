#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace handcontact {

using Vec3 = std::array<double, 3>;

/// Triangle mesh of the hand model. The standard configuration has 778
/// vertices; faces index into `vertices` (0-based).
struct HandMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;

    int vertex_count() const { return static_cast<int>(vertices.size()); }
};

/// One named semantic hand part: an ordered set of vertex indices.
struct Part {
    std::string name;
    int index = 0;
    std::vector<int> vertex_ids;
};

/// Row layout of one part's vertices. Rows run distal-to-proximal, vertices
/// within a row run left-to-right in the part's canonical view. The rows
/// flattened are a permutation of the part's vertex set.
struct GridSpec {
    int part_index = 0;
    int num_rows = 0;
    std::vector<int> row_lengths;
    std::vector<std::vector<int>> row_vertex_ids;

    int total_vertices() const {
        int n = 0;
        for (int l : row_lengths) n += l;
        return n;
    }
};

/// A full segmentation: parts form a strict partition of the mesh vertices,
/// one grid per part. `grids[i]` belongs to `parts[i]` (both index-ordered).
struct PartSegmentation {
    std::vector<Part> parts;
    std::vector<GridSpec> grids;
    int vertex_count = 0;

    int part_count() const { return static_cast<int>(parts.size()); }
    const Part* find_part(const std::string& name) const;
    // index of part owning a vertex; -1 if not covered (invalid segmentations only)
    std::vector<int> vertex_to_part() const;
};

/// Binary per-vertex contact, length = mesh vertex count.
struct ContactVector {
    std::vector<std::uint8_t> values;

    std::size_t size() const { return values.size(); }
    bool operator==(const ContactVector& other) const { return values == other.values; }
};

/// Vertices eligible for contact under part conditioning.
struct ActiveVertexSet {
    std::vector<int> vertex_ids;       // sorted ascending
    std::vector<std::uint8_t> mask;    // length = mesh vertex count

    std::size_t size() const { return vertex_ids.size(); }
    bool contains(int v) const {
        return v >= 0 && v < static_cast<int>(mask.size()) && mask[v] != 0;
    }
};

/// Per-part binary grids keyed by part name, as produced by the dense stage.
struct DenseGridPrediction {
    std::map<std::string, std::vector<std::vector<std::uint8_t>>> grids;

    bool empty() const { return grids.empty(); }
};

} // namespace handcontact
