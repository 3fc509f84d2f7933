#include "handcontact/geometry.hpp"

#include "handcontact/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace handcontact {

ViewAxis view_axis_from_string(const std::string& name) {
    if (name == "palmar") return ViewAxis::Palmar;
    if (name == "dorsal") return ViewAxis::Dorsal;
    if (name == "radial") return ViewAxis::Radial;
    if (name == "ulnar") return ViewAxis::Ulnar;
    throw ParseError("unknown view axis '" + name + "'");
}

std::string to_string(ViewAxis axis) {
    switch (axis) {
        case ViewAxis::Palmar: return "palmar";
        case ViewAxis::Dorsal: return "dorsal";
        case ViewAxis::Radial: return "radial";
        case ViewAxis::Ulnar: return "ulnar";
    }
    return "palmar";
}

static Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

ViewBasis view_basis(ViewAxis axis) {
    Vec3 forward{};
    switch (axis) {
        case ViewAxis::Palmar: forward = {0, 0, -1}; break; // camera at +z
        case ViewAxis::Dorsal: forward = {0, 0, 1}; break;  // camera at -z
        case ViewAxis::Radial: forward = {-1, 0, 0}; break; // camera at +x
        case ViewAxis::Ulnar: forward = {1, 0, 0}; break;   // camera at -x
    }
    const Vec3 up{0, 1, 0};
    return ViewBasis{cross(forward, up), up, forward};
}

OrthoCamera fit_camera(const HandMesh& mesh, ViewAxis axis, int width, int height, double margin) {
    if (width <= 0 || height <= 0) throw RenderError("view dimensions must be positive");
    if (2 * margin >= width || 2 * margin >= height)
        throw RenderError("margin leaves no drawable area");

    OrthoCamera cam;
    cam.axis = axis;
    cam.basis = view_basis(axis);
    cam.width = width;
    cam.height = height;
    cam.margin = margin;

    double u_min = std::numeric_limits<double>::max(), u_max = -u_min;
    double w_min = u_min, w_max = -u_min;
    Vec3 lo{u_min, u_min, u_min}, hi{-u_min, -u_min, -u_min};
    for (const auto& v : mesh.vertices) {
        const double u = dot(v, cam.basis.right);
        const double w = dot(v, cam.basis.up);
        u_min = std::min(u_min, u);
        u_max = std::max(u_max, u);
        w_min = std::min(w_min, w);
        w_max = std::max(w_max, w);
        for (int i = 0; i < 3; ++i) {
            lo[static_cast<std::size_t>(i)] = std::min(lo[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i)]);
            hi[static_cast<std::size_t>(i)] = std::max(hi[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i)]);
        }
    }
    const double du = u_max - u_min;
    const double dw = w_max - w_min;
    if (du <= 0.0 && dw <= 0.0) throw RenderError("degenerate camera: mesh has no in-plane extent");
    const double su = du > 0.0 ? (width - 2.0 * margin) / du : std::numeric_limits<double>::max();
    const double sw = dw > 0.0 ? (height - 2.0 * margin) / dw : std::numeric_limits<double>::max();
    cam.scale = std::min(su, sw);
    cam.u_center = 0.5 * (u_min + u_max);
    cam.w_center = 0.5 * (w_min + w_max);
    cam.bbox_diag = std::sqrt((hi[0] - lo[0]) * (hi[0] - lo[0]) + (hi[1] - lo[1]) * (hi[1] - lo[1]) +
                              (hi[2] - lo[2]) * (hi[2] - lo[2]));
    return cam;
}

Projected project(const Vec3& position, const OrthoCamera& cam) {
    const double u = dot(position, cam.basis.right);
    const double w = dot(position, cam.basis.up);
    Projected p;
    p.x = cam.width / 2.0 + (u - cam.u_center) * cam.scale;
    p.y = cam.height / 2.0 - (w - cam.w_center) * cam.scale; // pixel y grows downward
    p.depth = dot(position, cam.basis.forward);
    return p;
}

} // namespace handcontact
