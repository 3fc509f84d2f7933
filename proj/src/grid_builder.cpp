#include "handcontact/grid_builder.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/hand_model.hpp"
#include "handcontact/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace handcontact {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// adjacency restricted to the part's vertices, keyed by local index
struct InducedSubmesh {
    std::vector<int> local_to_global;
    std::map<int, int> global_to_local;
    std::vector<std::vector<int>> adj;
};

InducedSubmesh induced_submesh(const HandMesh& mesh, const Part& part) {
    InducedSubmesh sub;
    sub.local_to_global = part.vertex_ids;
    for (std::size_t i = 0; i < sub.local_to_global.size(); ++i)
        sub.global_to_local[sub.local_to_global[i]] = static_cast<int>(i);
    sub.adj.assign(sub.local_to_global.size(), {});
    for (const auto& f : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            int a = f[static_cast<std::size_t>(e)];
            int b = f[static_cast<std::size_t>((e + 1) % 3)];
            auto ia = sub.global_to_local.find(a);
            auto ib = sub.global_to_local.find(b);
            if (ia == sub.global_to_local.end() || ib == sub.global_to_local.end()) continue;
            sub.adj[static_cast<std::size_t>(ia->second)].push_back(ib->second);
            sub.adj[static_cast<std::size_t>(ib->second)].push_back(ia->second);
        }
    }
    for (auto& n : sub.adj) {
        std::sort(n.begin(), n.end());
        n.erase(std::unique(n.begin(), n.end()), n.end());
    }
    return sub;
}

std::vector<int> bfs_distances(const InducedSubmesh& sub, const std::vector<int>& seed_locals) {
    std::vector<int> dist(sub.local_to_global.size(), -1);
    std::queue<int> q;
    for (int s : seed_locals) {
        if (dist[static_cast<std::size_t>(s)] == -1) {
            dist[static_cast<std::size_t>(s)] = 0;
            q.push(s);
        }
    }
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int w : sub.adj[static_cast<std::size_t>(v)]) {
            if (dist[static_cast<std::size_t>(w)] == -1) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                q.push(w);
            }
        }
    }
    return dist;
}

// hop distance between two part vertices, capped; -1 when farther than cap
int hop_distance(const InducedSubmesh& sub, int from_local, int to_local, int cap) {
    if (from_local == to_local) return 0;
    std::vector<int> frontier{from_local};
    std::set<int> seen{from_local};
    for (int d = 1; d <= cap; ++d) {
        std::vector<int> next;
        for (int v : frontier) {
            for (int w : sub.adj[static_cast<std::size_t>(v)]) {
                if (w == to_local) return d;
                if (seen.insert(w).second) next.push_back(w);
            }
        }
        frontier = std::move(next);
        if (frontier.empty()) break;
    }
    return -1;
}

} // namespace

GridSpec build_part_grid(const HandMesh& mesh, const Part& part, const OrientationHint& hint,
                         std::vector<RowAdjacencyWarning>* warnings) {
    if (hint.distal_seeds.empty())
        throw SeedNotInPartError("part '" + part.name + "': no distal seed given");
    InducedSubmesh sub = induced_submesh(mesh, part);

    std::vector<int> seed_locals;
    for (int seed : hint.distal_seeds) {
        auto it = sub.global_to_local.find(seed);
        if (it == sub.global_to_local.end())
            throw SeedNotInPartError("seed vertex " + std::to_string(seed) + " is not in part '" +
                                     part.name + "'");
        seed_locals.push_back(it->second);
    }

    std::vector<int> dist = bfs_distances(sub, seed_locals);
    int max_dist = 0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] == -1)
            throw DisconnectedPartError("part '" + part.name + "' is disconnected: vertex " +
                                        std::to_string(sub.local_to_global[i]) +
                                        " unreachable from the distal seed");
        max_dist = std::max(max_dist, dist[i]);
    }

    const ViewBasis basis = view_basis(hint.view_axis);
    GridSpec grid;
    grid.part_index = part.index;
    grid.num_rows = max_dist + 1;
    grid.row_vertex_ids.assign(static_cast<std::size_t>(grid.num_rows), {});
    for (std::size_t i = 0; i < dist.size(); ++i)
        grid.row_vertex_ids[static_cast<std::size_t>(dist[i])].push_back(sub.local_to_global[i]);

    for (auto& row : grid.row_vertex_ids) {
        std::sort(row.begin(), row.end(), [&](int a, int b) {
            const double sa = dot(mesh.vertices[static_cast<std::size_t>(a)], basis.right);
            const double sb = dot(mesh.vertices[static_cast<std::size_t>(b)], basis.right);
            if (sa != sb) return sa < sb;
            return a < b;
        });
        grid.row_lengths.push_back(static_cast<int>(row.size()));
    }

    if (warnings) {
        for (int r = 0; r < grid.num_rows; ++r) {
            const auto& row = grid.row_vertex_ids[static_cast<std::size_t>(r)];
            for (std::size_t c = 0; c + 1 < row.size(); ++c) {
                int a = sub.global_to_local.at(row[c]);
                int b = sub.global_to_local.at(row[c + 1]);
                int hops = hop_distance(sub, a, b, 2);
                if (hops == -1 || hops > 2) {
                    warnings->push_back(RowAdjacencyWarning{part.index, r, static_cast<int>(c),
                                                            row[c], row[c + 1], hops});
                }
            }
        }
    }
    return grid;
}

PartSegmentation build_segmentation(const HandMesh& mesh, std::vector<Part> parts,
                                    const std::vector<OrientationHint>& hints,
                                    std::vector<RowAdjacencyWarning>* warnings) {
    std::map<int, const OrientationHint*> by_index;
    for (const auto& h : hints) by_index[h.part_index] = &h;

    std::sort(parts.begin(), parts.end(),
              [](const Part& a, const Part& b) { return a.index < b.index; });

    PartSegmentation seg;
    seg.vertex_count = mesh.vertex_count();
    for (auto& part : parts) {
        OrientationHint hint;
        auto it = by_index.find(part.index);
        if (it != by_index.end()) {
            hint = *it->second;
        } else {
            hint.part_index = part.index;
            hint.distal_seeds = {*std::min_element(part.vertex_ids.begin(), part.vertex_ids.end())};
            hint.view_axis = ViewAxis::Palmar;
        }
        seg.grids.push_back(build_part_grid(mesh, part, hint, warnings));
        seg.parts.push_back(std::move(part));
    }
    validate_segmentation(seg);
    return seg;
}

GridValidationReport validate_grids(const PartSegmentation& seg, const HandMesh& mesh) {
    GridValidationReport report;
    for (int i = 0; i < seg.part_count(); ++i) {
        const Part& part = seg.parts[static_cast<std::size_t>(i)];
        const GridSpec& grid = seg.grids[static_cast<std::size_t>(i)];
        PartDiagnostics diag;
        diag.part_index = part.index;
        diag.part_name = part.name;

        std::set<int> part_set(part.vertex_ids.begin(), part.vertex_ids.end());
        std::set<int> grid_set;
        bool dup = false;
        for (const auto& row : grid.row_vertex_ids)
            for (int v : row)
                if (!grid_set.insert(v).second) dup = true;
        if (dup) {
            diag.bijection_ok = false;
            diag.bijection_detail = "duplicate vertex in grid";
        } else if (grid_set != part_set) {
            diag.bijection_ok = false;
            std::vector<int> missing;
            std::set_difference(part_set.begin(), part_set.end(), grid_set.begin(), grid_set.end(),
                                std::back_inserter(missing));
            std::vector<int> extra;
            std::set_difference(grid_set.begin(), grid_set.end(), part_set.begin(), part_set.end(),
                                std::back_inserter(extra));
            diag.bijection_detail = "missing " + std::to_string(missing.size()) + ", extra " +
                                    std::to_string(extra.size()) + " vertices";
        }

        InducedSubmesh sub = induced_submesh(mesh, part);
        if (diag.bijection_ok) {
            // row 0 holds the seed layer by construction, so distances from it
            // should rise with the row index
            std::vector<int> seeds;
            for (int v : grid.row_vertex_ids[0]) seeds.push_back(sub.global_to_local.at(v));
            std::vector<int> dist = bfs_distances(sub, seeds);
            double prev_mean = -1.0;
            for (const auto& row : grid.row_vertex_ids) {
                double mean = 0.0;
                for (int v : row) {
                    int d = dist[static_cast<std::size_t>(sub.global_to_local.at(v))];
                    if (d == -1) {
                        diag.rows_reachable = false;
                        d = 0;
                    }
                    mean += d;
                }
                mean /= static_cast<double>(row.size());
                if (mean <= prev_mean) diag.monotone_mean_distance = false;
                prev_mean = mean;
            }
            for (int r = 0; r < grid.num_rows; ++r) {
                const auto& row = grid.row_vertex_ids[static_cast<std::size_t>(r)];
                for (std::size_t c = 0; c + 1 < row.size(); ++c) {
                    int hops = hop_distance(sub, sub.global_to_local.at(row[c]),
                                            sub.global_to_local.at(row[c + 1]), 2);
                    if (hops == -1 || hops > 2) ++diag.adjacency_warnings;
                }
            }
        }

        if (!diag.bijection_ok) ++report.error_count;
        report.warning_count += diag.adjacency_warnings;
        if (!diag.monotone_mean_distance || !diag.rows_reachable) ++report.warning_count;
        report.parts.push_back(std::move(diag));
    }
    return report;
}

std::vector<OrientationHint> load_hints(const std::filesystem::path& path) {
    json doc = json::parse(util::read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw ParseError(path.string() + ": hints file must be a JSON array");
    std::vector<OrientationHint> hints;
    for (const auto& hj : doc) {
        OrientationHint h;
        if (!hj.contains("part_index")) throw ParseError(path.string() + ": hint missing part_index");
        h.part_index = hj["part_index"].get<int>();
        if (hj.contains("distal_seed"))
            h.distal_seeds = {hj["distal_seed"].get<int>()};
        else if (hj.contains("distal_seeds"))
            h.distal_seeds = hj["distal_seeds"].get<std::vector<int>>();
        else
            throw ParseError(path.string() + ": hint for part " + std::to_string(h.part_index) +
                             " missing distal_seed(s)");
        h.view_axis = view_axis_from_string(hj.value("view_axis", "palmar"));
        hints.push_back(std::move(h));
    }
    return hints;
}

void save_hints(const std::vector<OrientationHint>& hints, const std::filesystem::path& path) {
    ordered_json doc = ordered_json::array();
    for (const auto& h : hints) {
        ordered_json hj;
        hj["part_index"] = h.part_index;
        if (h.distal_seeds.size() == 1)
            hj["distal_seed"] = h.distal_seeds[0];
        else
            hj["distal_seeds"] = h.distal_seeds;
        hj["view_axis"] = to_string(h.view_axis);
        doc.push_back(std::move(hj));
    }
    util::write_text_file(path, doc.dump(1) + "\n");
}

std::vector<Part> load_labeling(const std::filesystem::path& path, const HandMesh& mesh) {
    json doc = json::parse(util::read_text_file(path), nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("parts"))
        throw ParseError(path.string() + ": labeling must be a JSON object with 'parts'");
    std::vector<Part> parts;
    for (const auto& pj : doc["parts"]) {
        Part p;
        p.name = pj.at("name").get<std::string>();
        p.index = pj.at("index").get<int>();
        p.vertex_ids = pj.at("vertex_ids").get<std::vector<int>>();
        for (int v : p.vertex_ids)
            if (v < 0 || v >= mesh.vertex_count())
                throw ParseError(path.string() + ": part '" + p.name + "' vertex " +
                                 std::to_string(v) + " out of range");
        parts.push_back(std::move(p));
    }
    return parts;
}

void save_labeling(const std::vector<Part>& parts, const std::filesystem::path& path) {
    ordered_json doc;
    doc["version"] = 1;
    doc["part_count"] = parts.size();
    doc["parts"] = ordered_json::array();
    for (const auto& p : parts) {
        ordered_json pj;
        pj["name"] = p.name;
        pj["index"] = p.index;
        pj["vertex_ids"] = p.vertex_ids;
        doc["parts"].push_back(std::move(pj));
    }
    util::write_text_file(path, doc.dump(1) + "\n");
}

} // namespace handcontact
