#pragma once

#include "handcontact/geometry.hpp"
#include "handcontact/image.hpp"
#include "handcontact/types.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace handcontact {

struct ViewConfig {
    std::vector<ViewAxis> views{ViewAxis::Palmar, ViewAxis::Dorsal, ViewAxis::Radial,
                                ViewAxis::Ulnar};
    int view_width = 256;
    int view_height = 256;
    double margin = 12.0;
    Color background{255, 255, 255};
    std::uint64_t palette_seed = 0;
    int label_scale = 1;
    double dot_radius = 2.0;
    Color overlay_color{20, 20, 20};
    int jpeg_quality = 90;
};

struct ViewRect {
    int view_index = 0;
    int row = 0; // 0 = part-index strip, 1 = grid-overlay strip
    int x = 0, y = 0, width = 0, height = 0;
};

struct ProjectedVertex {
    double x = 0.0; // pixel coordinates inside the view rect (origin of the rect)
    double y = 0.0;
    double depth = 0.0;
    bool visible = false;
};

struct PartLabel {
    int part_index = 0;
    int view_index = 0;
    double x = 0.0; // placed at the centroid of the part's visible vertices
    double y = 0.0;
};

struct RowDot {
    int part_index = 0;
    int row = 0;
    int view_index = 0;
    int vertex_id = 0;
    double x = 0.0;
    double y = 0.0;
};

struct RenderedPrompt {
    Image image;
    std::map<int, Color> legend;              // part index -> palette color
    std::vector<ViewRect> layout;
    std::vector<std::vector<ProjectedVertex>> projected; // [view][vertex], rect-local
    std::vector<OrthoCamera> cameras;
    std::vector<PartLabel> labels;
    std::vector<RowDot> dots; // grid overlays only (full prompt)
};

// Part-index visual prompt: one strip of z-buffered part-colored views with
// each part's numeric index drawn in the view where it is most visible.
RenderedPrompt render_part_prompt(const HandMesh& mesh, const PartSegmentation& seg,
                                  const ViewConfig& cfg);

// Full visual prompt: the part strip plus a second strip carrying the
// part-wise vertex grid overlays (row-start dots, within-row polylines,
// row-to-row connectors). Overlays are drawn only for vertices passing the
// depth test.
RenderedPrompt render_full_prompt(const HandMesh& mesh, const PartSegmentation& seg,
                                  const ViewConfig& cfg);

Color palette_color(std::uint64_t seed, int part_index);

// Sidecar with cameras, per-vertex projections, label and dot anchors.
void save_projection_sidecar(const RenderedPrompt& prompt, const std::filesystem::path& path);

} // namespace handcontact
