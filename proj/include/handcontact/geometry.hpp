#pragma once

#include "handcontact/types.hpp"

#include <string>

namespace handcontact {

// Canonical hand surface orientations. The hand model is assumed oriented
// with +y distal (fingertips), palm facing +z, thumb side at +x.
enum class ViewAxis { Palmar, Dorsal, Radial, Ulnar };

ViewAxis view_axis_from_string(const std::string& name);
std::string to_string(ViewAxis axis);

struct ViewBasis {
    Vec3 right;   // +x in screen space
    Vec3 up;      // +y in screen space (before the pixel-space flip)
    Vec3 forward; // camera look direction; smaller dot(v, forward) = closer
};

// right = forward x up with world up (0,1,0); all four axes are horizontal
// so the basis never degenerates.
ViewBasis view_basis(ViewAxis axis);

inline double dot(const Vec3& a, const Vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

// Orthographic camera fitted to a mesh: in-plane coordinates are mapped
// affinely into a [width x height] pixel rectangle minus a margin, preserving
// aspect ratio; depth is the out-of-plane coordinate.
struct OrthoCamera {
    ViewAxis axis = ViewAxis::Palmar;
    ViewBasis basis{};
    int width = 0;
    int height = 0;
    double margin = 0.0;
    double scale = 0.0;
    double u_center = 0.0; // in-plane center, right axis
    double w_center = 0.0; // in-plane center, up axis
    double bbox_diag = 0.0;
};

struct Projected {
    double x = 0.0;
    double y = 0.0;
    double depth = 0.0;
};

// Fits the camera to the mesh bounding box. Throws RenderError when the mesh
// has no in-plane extent.
OrthoCamera fit_camera(const HandMesh& mesh, ViewAxis axis, int width, int height, double margin);

Projected project(const Vec3& position, const OrthoCamera& cam);

} // namespace handcontact
