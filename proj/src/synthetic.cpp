#include "handcontact/synthetic.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/hand_model.hpp"
#include "handcontact/image.hpp"
#include "handcontact/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

namespace handcontact {
namespace synthetic {

using nlohmann::ordered_json;

namespace {
constexpr int kRings = 97;
constexpr int kSegments = 8;
constexpr int kTipPole = 0;                              // index of the distal pole vertex
constexpr int kWristPole = 1 + kRings * kSegments;       // index of the proximal pole vertex

int ring_vertex(int ring, int segment) { return 1 + ring * kSegments + (segment % kSegments); }
} // namespace

HandMesh make_fixture_mesh() {
    HandMesh mesh;
    mesh.vertices.reserve(2 + kRings * kSegments);
    // Ellipsoid with its long (distal) axis tilted away from vertical so the
    // pole regions stay visible from the four horizontal canonical views.
    const Vec3 axis{0.5, 0.72, 0.48};
    const double axis_len = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    const Vec3 a{axis[0] / axis_len, axis[1] / axis_len, axis[2] / axis_len};
    // perpendicular frame
    Vec3 u{a[1] * 1.0 - a[2] * 0.0, a[2] * 0.0 - a[0] * 1.0, a[0] * 0.0 - a[1] * 0.0}; // a x z
    {
        const double n = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        u = {u[0] / n, u[1] / n, u[2] / n};
    }
    const Vec3 w{a[1] * u[2] - a[2] * u[1], a[2] * u[0] - a[0] * u[2], a[0] * u[1] - a[1] * u[0]};
    auto place = [&](double lu, double la, double lw) {
        return Vec3{lu * u[0] + la * a[0] + lw * w[0], lu * u[1] + la * a[1] + lw * w[1],
                    lu * u[2] + la * a[2] + lw * w[2]};
    };

    // poles protrude past the ring profile so the cap vertices stay clear of
    // the adjacent bulge in screen space
    mesh.vertices.push_back(place(0.0, 1.75, 0.0)); // distal pole
    for (int r = 0; r < kRings; ++r) {
        const double theta = M_PI * (r + 1) / (kRings + 1);
        const double height = 1.6 * std::cos(theta);
        const double radius = 0.5 * std::sin(theta);
        for (int s = 0; s < kSegments; ++s) {
            const double phi = 2.0 * M_PI * s / kSegments;
            mesh.vertices.push_back(place(radius * std::cos(phi), height, radius * std::sin(phi)));
        }
    }
    mesh.vertices.push_back(place(0.0, -1.75, 0.0));

    for (int s = 0; s < kSegments; ++s)
        mesh.faces.push_back({kTipPole, ring_vertex(0, s + 1), ring_vertex(0, s)});
    for (int r = 0; r + 1 < kRings; ++r) {
        for (int s = 0; s < kSegments; ++s) {
            const int a = ring_vertex(r, s);
            const int b = ring_vertex(r, s + 1);
            const int c = ring_vertex(r + 1, s);
            const int d = ring_vertex(r + 1, s + 1);
            mesh.faces.push_back({a, b, c});
            mesh.faces.push_back({b, d, c});
        }
    }
    for (int s = 0; s < kSegments; ++s)
        mesh.faces.push_back({kWristPole, ring_vertex(kRings - 1, s), ring_vertex(kRings - 1, s + 1)});
    validate_mesh(mesh);
    return mesh;
}

std::vector<Part> make_detailed_labeling() {
    std::vector<Part> parts;
    int index = 0;
    char name[64];

    Part tip;
    tip.name = "tip_cap";
    tip.index = index++;
    tip.vertex_ids = {kTipPole};
    parts.push_back(std::move(tip));

    // four rings split into halves so single-ring and half-ring layouts both occur
    const std::array<int, 4> split_rings{20, 40, 60, 80};
    for (int r = 0; r < kRings; ++r) {
        const bool split =
            std::find(split_rings.begin(), split_rings.end(), r) != split_rings.end();
        if (!split) {
            Part p;
            std::snprintf(name, sizeof(name), "band_%03d", r);
            p.name = name;
            p.index = index++;
            for (int s = 0; s < kSegments; ++s) p.vertex_ids.push_back(ring_vertex(r, s));
            parts.push_back(std::move(p));
        } else {
            Part radial;
            std::snprintf(name, sizeof(name), "band_%03d_radial", r);
            radial.name = name;
            radial.index = index++;
            for (int s = 0; s < kSegments / 2; ++s) radial.vertex_ids.push_back(ring_vertex(r, s));
            parts.push_back(std::move(radial));

            Part ulnar;
            std::snprintf(name, sizeof(name), "band_%03d_ulnar", r);
            ulnar.name = name;
            ulnar.index = index++;
            for (int s = kSegments / 2; s < kSegments; ++s) ulnar.vertex_ids.push_back(ring_vertex(r, s));
            parts.push_back(std::move(ulnar));
        }
    }

    Part wrist;
    wrist.name = "wrist_cap";
    wrist.index = index++;
    wrist.vertex_ids = {kWristPole};
    parts.push_back(std::move(wrist));
    return parts;
}

std::vector<Part> make_coarse_labeling() {
    std::vector<Part> parts;
    char name[64];
    // 16 bands: tip cap + first 6 rings, fourteen 6-ring bands, last 7 rings + wrist cap
    Part tip;
    tip.name = "coarse_tip";
    tip.index = 0;
    tip.vertex_ids = {kTipPole};
    for (int r = 0; r < 6; ++r)
        for (int s = 0; s < kSegments; ++s) tip.vertex_ids.push_back(ring_vertex(r, s));
    parts.push_back(std::move(tip));

    for (int band = 0; band < 14; ++band) {
        Part p;
        std::snprintf(name, sizeof(name), "coarse_band_%02d", band + 1);
        p.name = name;
        p.index = band + 1;
        for (int r = 6 + band * 6; r < 6 + (band + 1) * 6; ++r)
            for (int s = 0; s < kSegments; ++s) p.vertex_ids.push_back(ring_vertex(r, s));
        parts.push_back(std::move(p));
    }

    Part wrist;
    wrist.name = "coarse_wrist";
    wrist.index = 15;
    for (int r = 90; r < kRings; ++r)
        for (int s = 0; s < kSegments; ++s) wrist.vertex_ids.push_back(ring_vertex(r, s));
    wrist.vertex_ids.push_back(kWristPole);
    parts.push_back(std::move(wrist));
    return parts;
}

std::vector<OrientationHint> make_hints(const HandMesh& mesh, const std::vector<Part>& parts) {
    std::vector<OrientationHint> hints;
    for (const auto& part : parts) {
        OrientationHint hint;
        hint.part_index = part.index;
        hint.view_axis = ViewAxis::Palmar;
        int best = part.vertex_ids.front();
        for (int v : part.vertex_ids) {
            const double y = mesh.vertices[static_cast<std::size_t>(v)][1];
            const double best_y = mesh.vertices[static_cast<std::size_t>(best)][1];
            if (y > best_y || (y == best_y && v < best)) best = v;
        }
        hint.distal_seeds = {best};
        hints.push_back(std::move(hint));
    }
    return hints;
}

namespace {

Image make_sample_image(int size, std::uint64_t seed, int sample_index) {
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (sample_index + 1)));
    auto byte = [&]() { return static_cast<std::uint8_t>(rng() % 200 + 28); };
    Image img = make_image(size, size, Color{byte(), byte(), byte()});
    const Color fg{byte(), byte(), byte()};
    const int cx = static_cast<int>(rng() % static_cast<std::uint64_t>(size / 2)) + size / 4;
    const int cy = static_cast<int>(rng() % static_cast<std::uint64_t>(size / 2)) + size / 4;
    const int radius = static_cast<int>(rng() % static_cast<std::uint64_t>(size / 4)) + size / 8;
    draw_disc(img, cx, cy, radius, fg);
    const Color bar{byte(), byte(), byte()};
    for (int x = 4; x < size - 4; ++x)
        for (int t = 0; t < 3; ++t) img.set(x, size / 5 + t, bar);
    return img;
}

} // namespace

std::vector<GeneratedSample> make_dataset(const PartSegmentation& seg, const DatasetSpec& spec,
                                          const std::filesystem::path& images_dir) {
    std::filesystem::create_directories(images_dir);
    std::vector<GeneratedSample> out;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int i = 0; i < spec.sample_count; ++i) {
        GeneratedSample gen;
        char id[32];
        std::snprintf(id, sizeof(id), "s%03d", i);
        gen.sample.id = id;
        gen.sample.hand = "right";
        gen.gt_values.assign(static_cast<std::size_t>(seg.vertex_count), 0.0);

        if (i != 0) { // sample 0 stays contact-free
            const int part_count = 1 + static_cast<int>(rng() % spec.max_contact_parts);
            std::set<int> chosen;
            while (static_cast<int>(chosen.size()) < part_count)
                chosen.insert(static_cast<int>(rng() % static_cast<std::uint64_t>(seg.part_count())));
            for (int pi : chosen) {
                const Part& part = seg.parts[static_cast<std::size_t>(pi)];
                bool any = false;
                for (int v : part.vertex_ids) {
                    if (unit(rng) < 0.7) {
                        gen.gt_values[static_cast<std::size_t>(v)] = 1.0;
                        any = true;
                    }
                }
                if (!any) gen.gt_values[static_cast<std::size_t>(part.vertex_ids.front())] = 1.0;
            }
        }

        Image img = make_sample_image(spec.image_size, spec.seed, i);
        const std::filesystem::path image_path = images_dir / (gen.sample.id + std::string(".jpg"));
        save_jpeg(img, image_path, 90);
        gen.sample.image_path = image_path;
        ContactVector gt;
        gt.values.reserve(gen.gt_values.size());
        for (double v : gen.gt_values) gt.values.push_back(v >= 0.5 ? 1 : 0);
        gen.sample.gt_contact = std::move(gt);
        out.push_back(std::move(gen));
    }
    return out;
}

void write_fixtures(const std::filesystem::path& root) {
    const std::filesystem::path fixture_dir = root / "fixture";
    const std::filesystem::path dataset_dir = root / "dataset";
    std::filesystem::create_directories(fixture_dir);
    std::filesystem::create_directories(dataset_dir);

    HandMesh mesh = make_fixture_mesh();
    save_mesh(mesh, fixture_dir / "hand.obj");

    auto detailed_parts = make_detailed_labeling();
    auto detailed_hints = make_hints(mesh, detailed_parts);
    save_labeling(detailed_parts, fixture_dir / "labeling_detailed.json");
    save_hints(detailed_hints, fixture_dir / "hints_detailed.json");
    PartSegmentation detailed = build_segmentation(mesh, detailed_parts, detailed_hints);
    save_segmentation(detailed, fixture_dir / "segmentation_detailed.json");

    auto coarse_parts = make_coarse_labeling();
    auto coarse_hints = make_hints(mesh, coarse_parts);
    save_labeling(coarse_parts, fixture_dir / "labeling_coarse.json");
    save_hints(coarse_hints, fixture_dir / "hints_coarse.json");
    PartSegmentation coarse = build_segmentation(mesh, coarse_parts, coarse_hints);
    save_segmentation(coarse, fixture_dir / "segmentation_coarse.json");

    DatasetSpec spec;
    auto samples = make_dataset(detailed, spec, dataset_dir / "images");
    std::string manifest;
    for (const auto& gen : samples) {
        ordered_json j;
        j["id"] = gen.sample.id;
        j["image_path"] = "images/" + gen.sample.id + ".jpg";
        ordered_json gt = ordered_json::array();
        for (double v : gen.gt_values) gt.push_back(static_cast<int>(v >= 0.5 ? 1 : 0));
        j["gt_contact"] = std::move(gt);
        j["hand"] = gen.sample.hand;
        manifest += j.dump() + "\n";
    }
    util::write_text_file(dataset_dir / "manifest.jsonl", manifest);
}

} // namespace synthetic
} // namespace handcontact
