#include "handcontact/visual_prompt.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace handcontact {

using nlohmann::ordered_json;

Color palette_color(std::uint64_t seed, int part_index) {
    // golden-ratio hue stepping keeps neighbouring indices apart
    std::uint64_t h = util::fnv1a64(util::hex_u64(seed) + ":" + std::to_string(part_index));
    double hue = std::fmod(static_cast<double>(h % 100000) / 100000.0 + part_index * 0.6180339887,
                           1.0) * 360.0;
    double sat = 0.45 + 0.35 * (static_cast<double>((h >> 17) % 1000) / 1000.0);
    double val = 0.55 + 0.30 * (static_cast<double>((h >> 31) % 1000) / 1000.0);

    double c = val * sat;
    double x = c * (1.0 - std::fabs(std::fmod(hue / 60.0, 2.0) - 1.0));
    double m = val - c;
    double r = 0, g = 0, b = 0;
    if (hue < 60) { r = c; g = x; }
    else if (hue < 120) { r = x; g = c; }
    else if (hue < 180) { g = c; b = x; }
    else if (hue < 240) { g = x; b = c; }
    else if (hue < 300) { r = x; b = c; }
    else { r = c; b = x; }
    auto to8 = [&](double v) { return static_cast<std::uint8_t>(std::lround((v + m) * 255.0)); };
    return {to8(r), to8(g), to8(b)};
}

namespace {

struct ViewRender {
    OrthoCamera camera;
    Image color;                      // view_width x view_height
    std::vector<double> zbuf;
    std::vector<ProjectedVertex> projected;
};

int majority_part(const std::array<int, 3>& face, const std::vector<int>& owner) {
    int a = owner[static_cast<std::size_t>(face[0])];
    int b = owner[static_cast<std::size_t>(face[1])];
    int c = owner[static_cast<std::size_t>(face[2])];
    if (a == b || a == c) return a;
    if (b == c) return b;
    return std::min({a, b, c}); // three-way tie: lowest part index
}

void rasterize(const HandMesh& mesh, const std::vector<int>& owner, std::uint64_t palette_seed,
               Color background, ViewRender& vr) {
    const int w = vr.camera.width, h = vr.camera.height;
    vr.color = make_image(w, h, background);
    vr.zbuf.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h),
                   std::numeric_limits<double>::infinity());

    std::vector<Projected> proj(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        proj[i] = project(mesh.vertices[i], vr.camera);

    for (const auto& face : mesh.faces) {
        const Projected& p0 = proj[static_cast<std::size_t>(face[0])];
        const Projected& p1 = proj[static_cast<std::size_t>(face[1])];
        const Projected& p2 = proj[static_cast<std::size_t>(face[2])];
        const double area = (p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y);
        if (area == 0.0) continue;
        const Color c = palette_color(palette_seed, majority_part(face, owner));
        int xmin = std::max(0, static_cast<int>(std::floor(std::min({p0.x, p1.x, p2.x}))));
        int xmax = std::min(w - 1, static_cast<int>(std::ceil(std::max({p0.x, p1.x, p2.x}))));
        int ymin = std::max(0, static_cast<int>(std::floor(std::min({p0.y, p1.y, p2.y}))));
        int ymax = std::min(h - 1, static_cast<int>(std::ceil(std::max({p0.y, p1.y, p2.y}))));
        for (int y = ymin; y <= ymax; ++y) {
            for (int x = xmin; x <= xmax; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                double w0 = ((p1.x - px) * (p2.y - py) - (p2.x - px) * (p1.y - py)) / area;
                double w1 = ((p2.x - px) * (p0.y - py) - (p0.x - px) * (p2.y - py)) / area;
                double w2 = 1.0 - w0 - w1;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
                double depth = w0 * p0.depth + w1 * p1.depth + w2 * p2.depth;
                std::size_t idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                                  static_cast<std::size_t>(x);
                if (depth < vr.zbuf[idx]) {
                    vr.zbuf[idx] = depth;
                    vr.color.set(x, y, c);
                }
            }
        }
    }

    // vertex visibility against the filled z-buffer
    const double eps = 1e-3 * vr.camera.bbox_diag;
    vr.projected.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        ProjectedVertex pv;
        pv.x = proj[i].x;
        pv.y = proj[i].y;
        pv.depth = proj[i].depth;
        int px = static_cast<int>(std::lround(pv.x));
        int py = static_cast<int>(std::lround(pv.y));
        if (px >= 0 && py >= 0 && px < w && py < h) {
            double z = vr.zbuf[static_cast<std::size_t>(py) * static_cast<std::size_t>(w) +
                               static_cast<std::size_t>(px)];
            pv.visible = pv.depth <= z + eps;
        }
        vr.projected[i] = pv;
    }
}

std::vector<ViewRender> render_views(const HandMesh& mesh, const PartSegmentation& seg,
                                     const ViewConfig& cfg) {
    if (cfg.views.empty()) throw RenderError("at least one view is required");
    std::vector<int> owner = seg.vertex_to_part();
    std::vector<ViewRender> views;
    views.reserve(cfg.views.size());
    for (ViewAxis axis : cfg.views) {
        ViewRender vr;
        vr.camera = fit_camera(mesh, axis, cfg.view_width, cfg.view_height, cfg.margin);
        rasterize(mesh, owner, cfg.palette_seed, cfg.background, vr);
        views.push_back(std::move(vr));
    }
    return views;
}

// one label per part, in the view with the most visible vertices
std::vector<PartLabel> place_labels(const PartSegmentation& seg,
                                    const std::vector<ViewRender>& views) {
    std::vector<PartLabel> labels;
    for (const auto& part : seg.parts) {
        int best_view = -1;
        int best_count = 0;
        for (std::size_t v = 0; v < views.size(); ++v) {
            int count = 0;
            for (int vid : part.vertex_ids)
                if (views[v].projected[static_cast<std::size_t>(vid)].visible) ++count;
            if (count > best_count) {
                best_count = count;
                best_view = static_cast<int>(v);
            }
        }
        if (best_view < 0) continue; // part not visible anywhere
        double sx = 0.0, sy = 0.0;
        for (int vid : part.vertex_ids) {
            const auto& pv = views[static_cast<std::size_t>(best_view)].projected[static_cast<std::size_t>(vid)];
            if (pv.visible) {
                sx += pv.x;
                sy += pv.y;
            }
        }
        PartLabel label;
        label.part_index = part.index;
        label.view_index = best_view;
        label.x = sx / best_count;
        label.y = sy / best_count;
        labels.push_back(label);
    }
    return labels;
}

void blit(Image& dst, const Image& src, int ox, int oy) {
    for (int y = 0; y < src.height; ++y)
        for (int x = 0; x < src.width; ++x)
            dst.set(ox + x, oy + y, src.get(x, y));
}

void assemble_common(RenderedPrompt& out, const PartSegmentation& seg,
                     const std::vector<ViewRender>& views, const ViewConfig& cfg) {
    for (const auto& p : seg.parts) out.legend[p.index] = palette_color(cfg.palette_seed, p.index);
    out.cameras.reserve(views.size());
    out.projected.reserve(views.size());
    for (const auto& vr : views) {
        out.cameras.push_back(vr.camera);
        out.projected.push_back(vr.projected);
    }
    out.labels = place_labels(seg, views);
}

void draw_labels_into(Image& strip, const std::vector<PartLabel>& labels, const ViewConfig& cfg,
                      int strip_y) {
    for (const auto& label : labels) {
        const int ox = label.view_index * cfg.view_width;
        draw_number(strip, ox + label.x, strip_y + label.y, std::to_string(label.part_index),
                    cfg.label_scale, Color{255, 255, 255}, Color{0, 0, 0});
    }
}

} // namespace

RenderedPrompt render_part_prompt(const HandMesh& mesh, const PartSegmentation& seg,
                                  const ViewConfig& cfg) {
    auto views = render_views(mesh, seg, cfg);
    RenderedPrompt out;
    out.image = make_image(cfg.view_width * static_cast<int>(views.size()), cfg.view_height,
                           cfg.background);
    for (std::size_t v = 0; v < views.size(); ++v) {
        blit(out.image, views[v].color, static_cast<int>(v) * cfg.view_width, 0);
        out.layout.push_back(ViewRect{static_cast<int>(v), 0, static_cast<int>(v) * cfg.view_width,
                                      0, cfg.view_width, cfg.view_height});
    }
    assemble_common(out, seg, views, cfg);
    draw_labels_into(out.image, out.labels, cfg, 0);
    return out;
}

RenderedPrompt render_full_prompt(const HandMesh& mesh, const PartSegmentation& seg,
                                  const ViewConfig& cfg) {
    auto views = render_views(mesh, seg, cfg);
    RenderedPrompt out;
    const int n = static_cast<int>(views.size());
    out.image = make_image(cfg.view_width * n, cfg.view_height * 2, cfg.background);
    for (int v = 0; v < n; ++v) {
        blit(out.image, views[static_cast<std::size_t>(v)].color, v * cfg.view_width, 0);
        blit(out.image, views[static_cast<std::size_t>(v)].color, v * cfg.view_width, cfg.view_height);
        out.layout.push_back(ViewRect{v, 0, v * cfg.view_width, 0, cfg.view_width, cfg.view_height});
        out.layout.push_back(ViewRect{v, 1, v * cfg.view_width, cfg.view_height, cfg.view_width,
                                      cfg.view_height});
    }
    assemble_common(out, seg, views, cfg);
    draw_labels_into(out.image, out.labels, cfg, 0);

    // grid overlays in the second strip
    for (int v = 0; v < n; ++v) {
        const auto& vr = views[static_cast<std::size_t>(v)];
        const int ox = v * cfg.view_width;
        const int oy = cfg.view_height;
        for (int pi = 0; pi < seg.part_count(); ++pi) {
            const GridSpec& grid = seg.grids[static_cast<std::size_t>(pi)];
            // visible vertices per row, grid order preserved
            std::vector<std::vector<int>> vis_rows(grid.row_vertex_ids.size());
            for (std::size_t r = 0; r < grid.row_vertex_ids.size(); ++r)
                for (int vid : grid.row_vertex_ids[r])
                    if (vr.projected[static_cast<std::size_t>(vid)].visible)
                        vis_rows[r].push_back(vid);

            auto pt = [&](int vid) {
                const auto& pv = vr.projected[static_cast<std::size_t>(vid)];
                return std::pair<double, double>{ox + pv.x, oy + pv.y};
            };
            const int last_row = static_cast<int>(vis_rows.size());
            for (int r = 0; r < last_row; ++r) {
                const auto& row = vis_rows[static_cast<std::size_t>(r)];
                if (row.empty()) continue;
                auto [dx, dy] = pt(row.front());
                draw_disc(out.image, dx, dy, cfg.dot_radius, cfg.overlay_color);
                out.dots.push_back(RowDot{seg.parts[static_cast<std::size_t>(pi)].index, r, v,
                                          row.front(),
                                          vr.projected[static_cast<std::size_t>(row.front())].x,
                                          vr.projected[static_cast<std::size_t>(row.front())].y});
                for (std::size_t c = 0; c + 1 < row.size(); ++c) {
                    auto [ax, ay] = pt(row[c]);
                    auto [bx, by] = pt(row[c + 1]);
                    draw_line(out.image, ax, ay, bx, by, cfg.overlay_color);
                }
                // link the row end to the start of the next row
                if (r + 1 < last_row && !vis_rows[static_cast<std::size_t>(r + 1)].empty()) {
                    auto [ax, ay] = pt(row.back());
                    auto [bx, by] = pt(vis_rows[static_cast<std::size_t>(r + 1)].front());
                    draw_line(out.image, ax, ay, bx, by, cfg.overlay_color);
                }
            }
        }
    }
    return out;
}

void save_projection_sidecar(const RenderedPrompt& prompt, const std::filesystem::path& path) {
    ordered_json doc;
    doc["views"] = ordered_json::array();
    for (std::size_t v = 0; v < prompt.cameras.size(); ++v) {
        const OrthoCamera& cam = prompt.cameras[v];
        ordered_json vj;
        vj["view_index"] = v;
        vj["axis"] = to_string(cam.axis);
        vj["width"] = cam.width;
        vj["height"] = cam.height;
        ordered_json verts = ordered_json::array();
        for (const auto& pv : prompt.projected[v]) {
            verts.push_back(ordered_json{{"x", pv.x}, {"y", pv.y}, {"depth", pv.depth},
                                         {"visible", pv.visible}});
        }
        vj["projected"] = std::move(verts);
        doc["views"].push_back(std::move(vj));
    }
    doc["layout"] = ordered_json::array();
    for (const auto& rect : prompt.layout)
        doc["layout"].push_back(ordered_json{{"view_index", rect.view_index},
                                             {"row", rect.row},
                                             {"x", rect.x},
                                             {"y", rect.y},
                                             {"width", rect.width},
                                             {"height", rect.height}});
    doc["labels"] = ordered_json::array();
    for (const auto& label : prompt.labels)
        doc["labels"].push_back(ordered_json{{"part_index", label.part_index},
                                             {"view_index", label.view_index},
                                             {"x", label.x},
                                             {"y", label.y}});
    doc["dots"] = ordered_json::array();
    for (const auto& dot : prompt.dots)
        doc["dots"].push_back(ordered_json{{"part_index", dot.part_index},
                                           {"row", dot.row},
                                           {"view_index", dot.view_index},
                                           {"vertex_id", dot.vertex_id},
                                           {"x", dot.x},
                                           {"y", dot.y}});
    util::write_text_file(path, doc.dump(1) + "\n");
}

} // namespace handcontact
