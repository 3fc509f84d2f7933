#pragma once

#include "handcontact/grid_builder.hpp"
#include "handcontact/pipeline.hpp"
#include "handcontact/types.hpp"

#include <filesystem>
#include <vector>

namespace handcontact {
namespace synthetic {

// Closed ellipsoid standing in for a hand mesh: 97 rings of 8 vertices plus
// two poles = 778 vertices, elongated along +y (distal) with palm at +z.
HandMesh make_fixture_mesh();

// 103 parts: a one-vertex cap at each pole, one part per ring, four rings
// split into radial/ulnar halves.
std::vector<Part> make_detailed_labeling();

// 16 coarse bands along the distal-proximal axis.
std::vector<Part> make_coarse_labeling();

// Distal-most vertex (ties: lowest id) per part, palmar view for everything.
std::vector<OrientationHint> make_hints(const HandMesh& mesh, const std::vector<Part>& parts);

struct DatasetSpec {
    int sample_count = 20;
    std::uint64_t seed = 20240710;
    int image_size = 64;
    int max_contact_parts = 5;
};

struct GeneratedSample {
    InputSample sample;
    std::vector<double> gt_values;
};

// Deterministic synthetic dataset: per sample a small JPEG plus a ground
// truth touching 0..max_contact_parts parts (sample 0 is contact-free).
std::vector<GeneratedSample> make_dataset(const PartSegmentation& seg, const DatasetSpec& spec,
                                          const std::filesystem::path& images_dir);

// Writes mesh, labelings, hints, built segmentations and the dataset
// manifest + images under `root` (the layout committed in assets/).
void write_fixtures(const std::filesystem::path& root);

} // namespace synthetic
} // namespace handcontact
