#include "handcontact/hand_model.hpp"

#include "handcontact/errors.hpp"
#include "handcontact/util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <queue>
#include <sstream>

namespace handcontact {

using nlohmann::json;
using nlohmann::ordered_json;

const Part* PartSegmentation::find_part(const std::string& name) const {
    for (const auto& p : parts)
        if (p.name == name) return &p;
    return nullptr;
}

std::vector<int> PartSegmentation::vertex_to_part() const {
    std::vector<int> owner(static_cast<std::size_t>(vertex_count), -1);
    for (const auto& p : parts)
        for (int v : p.vertex_ids)
            if (v >= 0 && v < vertex_count) owner[static_cast<std::size_t>(v)] = p.index;
    return owner;
}

// ---------------------------------------------------------------------------
// Mesh

HandMesh parse_mesh(const std::string& obj_text, const std::string& origin) {
    HandMesh mesh;
    std::istringstream in(obj_text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag)) continue;
        if (tag[0] == '#') continue;
        auto fail = [&](const std::string& what) {
            throw ParseError(origin + ":" + std::to_string(lineno) + ": " + what);
        };
        if (tag == "v") {
            Vec3 v{};
            if (!(ls >> v[0] >> v[1] >> v[2])) fail("malformed vertex record");
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::array<int, 3> f{};
            std::string tok;
            int n = 0;
            while (ls >> tok) {
                if (n >= 3) fail("non-triangular face");
                // accept a, a/t, a/t/n, a//n; only the vertex index is used
                std::size_t slash = tok.find('/');
                std::string head = slash == std::string::npos ? tok : tok.substr(0, slash);
                int idx = 0;
                auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
                if (ec != std::errc() || p != head.data() + head.size())
                    fail("malformed face index '" + tok + "'");
                f[static_cast<std::size_t>(n++)] = idx - 1; // OBJ is 1-based
            }
            if (n != 3) fail("non-triangular face");
            mesh.faces.push_back(f);
        } else if (tag == "vn" || tag == "vt" || tag == "o" || tag == "g" ||
                   tag == "s" || tag == "usemtl" || tag == "mtllib") {
            continue; // tolerated and ignored
        } else {
            fail("unsupported record '" + tag + "'");
        }
    }
    if (mesh.vertices.empty()) throw ParseError(origin + ": no vertices");
    validate_mesh(mesh);
    return mesh;
}

HandMesh load_mesh(const std::filesystem::path& path) {
    return parse_mesh(util::read_text_file(path), path.string());
}

void save_mesh(const HandMesh& mesh, const std::filesystem::path& path) {
    std::string out;
    out.reserve(mesh.vertices.size() * 40 + mesh.faces.size() * 20);
    char buf[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(buf, sizeof(buf), "v %.9g %.9g %.9g\n", v[0], v[1], v[2]);
        out += buf;
    }
    for (const auto& f : mesh.faces) {
        std::snprintf(buf, sizeof(buf), "f %d %d %d\n", f[0] + 1, f[1] + 1, f[2] + 1);
        out += buf;
    }
    util::write_text_file(path, out);
}

void validate_mesh(const HandMesh& mesh) {
    const int n = mesh.vertex_count();
    for (const auto& f : mesh.faces)
        for (int idx : f)
            if (idx < 0 || idx >= n)
                throw TopologyError("face index " + std::to_string(idx) +
                                    " out of range [0, " + std::to_string(n) + ")");
    // single connected component, via BFS over face edges
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& f : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            int a = f[static_cast<std::size_t>(e)];
            int b = f[static_cast<std::size_t>((e + 1) % 3)];
            adj[static_cast<std::size_t>(a)].push_back(b);
            adj[static_cast<std::size_t>(b)].push_back(a);
        }
    }
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(n), 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!q.empty()) {
        int v = q.front();
        q.pop();
        for (int w : adj[static_cast<std::size_t>(v)]) {
            if (!seen[static_cast<std::size_t>(w)]) {
                seen[static_cast<std::size_t>(w)] = 1;
                ++reached;
                q.push(w);
            }
        }
    }
    if (reached != n)
        throw TopologyError("mesh is not a single connected component (" +
                            std::to_string(n - reached) + " unreachable vertices)");
}

// ---------------------------------------------------------------------------
// Segmentation

void validate_segmentation(const PartSegmentation& seg) {
    const int v_count = seg.vertex_count;
    const int k = seg.part_count();
    if (static_cast<int>(seg.grids.size()) != k)
        throw GridMismatchError("expected one grid per part");

    std::set<std::string> names;
    std::vector<std::uint8_t> index_seen(static_cast<std::size_t>(k), 0);
    std::vector<int> owner(static_cast<std::size_t>(v_count), -1);
    std::vector<int> overlaps;

    for (int i = 0; i < k; ++i) {
        const Part& p = seg.parts[static_cast<std::size_t>(i)];
        if (p.vertex_ids.empty())
            throw PartitionError("part '" + p.name + "' has no vertices");
        if (!names.insert(p.name).second)
            throw PartitionError("duplicate part name '" + p.name + "'");
        if (p.index < 0 || p.index >= k)
            throw PartitionError("part index " + std::to_string(p.index) +
                                 " outside [0, " + std::to_string(k) + ")");
        if (index_seen[static_cast<std::size_t>(p.index)])
            throw PartitionError("duplicate part index " + std::to_string(p.index));
        index_seen[static_cast<std::size_t>(p.index)] = 1;

        std::set<int> uniq;
        for (int v : p.vertex_ids) {
            if (v < 0 || v >= v_count)
                throw PartitionError("part '" + p.name + "' has out-of-range vertex " +
                                     std::to_string(v));
            if (!uniq.insert(v).second)
                throw PartitionError("part '" + p.name + "' repeats vertex " + std::to_string(v));
            if (owner[static_cast<std::size_t>(v)] != -1)
                overlaps.push_back(v);
            else
                owner[static_cast<std::size_t>(v)] = p.index;
        }
    }
    if (!overlaps.empty()) {
        std::string ids;
        for (std::size_t i = 0; i < overlaps.size() && i < 8; ++i)
            ids += (i ? ", " : "") + std::to_string(overlaps[i]);
        throw PartitionError("vertices assigned to more than one part: {" + ids + "}");
    }
    std::vector<int> uncovered;
    for (int v = 0; v < v_count; ++v)
        if (owner[static_cast<std::size_t>(v)] == -1) uncovered.push_back(v);
    if (!uncovered.empty()) {
        std::string ids;
        for (std::size_t i = 0; i < uncovered.size() && i < 8; ++i)
            ids += (i ? ", " : "") + std::to_string(uncovered[i]);
        throw PartitionError("vertices not covered by any part: {" + ids + "}");
    }

    // grid bijection per part
    for (int i = 0; i < k; ++i) {
        const Part& p = seg.parts[static_cast<std::size_t>(i)];
        const GridSpec& g = seg.grids[static_cast<std::size_t>(i)];
        if (g.part_index != p.index)
            throw GridMismatchError("grid part_index " + std::to_string(g.part_index) +
                                    " does not match part '" + p.name + "'");
        if (g.num_rows < 1 || static_cast<int>(g.row_lengths.size()) != g.num_rows ||
            static_cast<int>(g.row_vertex_ids.size()) != g.num_rows)
            throw GridMismatchError("part '" + p.name + "': row count fields disagree");
        int total = 0;
        for (int r = 0; r < g.num_rows; ++r) {
            const auto& row = g.row_vertex_ids[static_cast<std::size_t>(r)];
            if (static_cast<int>(row.size()) != g.row_lengths[static_cast<std::size_t>(r)])
                throw GridMismatchError("part '" + p.name + "': row " + std::to_string(r) +
                                        " length " + std::to_string(row.size()) +
                                        " != declared " +
                                        std::to_string(g.row_lengths[static_cast<std::size_t>(r)]));
            total += static_cast<int>(row.size());
        }
        if (total != static_cast<int>(p.vertex_ids.size()))
            throw GridMismatchError("part '" + p.name + "': grid covers " + std::to_string(total) +
                                    " vertices, part has " + std::to_string(p.vertex_ids.size()));
        std::set<int> part_set(p.vertex_ids.begin(), p.vertex_ids.end());
        std::set<int> grid_set;
        for (const auto& row : g.row_vertex_ids)
            for (int v : row)
                if (!grid_set.insert(v).second)
                    throw GridMismatchError("part '" + p.name + "': vertex " + std::to_string(v) +
                                            " appears twice in grid");
        if (grid_set != part_set)
            throw GridMismatchError("part '" + p.name +
                                    "': grid vertices are not a permutation of the part");
    }
}

PartSegmentation parse_segmentation(const std::string& json_text, const HandMesh& mesh,
                                    const std::string& origin) {
    json doc = json::parse(json_text, nullptr, false);
    if (doc.is_discarded()) throw ParseError(origin + ": not valid JSON");
    if (!doc.is_object() || !doc.contains("parts") || !doc["parts"].is_array())
        throw ParseError(origin + ": missing 'parts' array");

    PartSegmentation seg;
    seg.vertex_count = mesh.vertex_count();
    auto get_int = [&](const json& j, const char* key) -> int {
        if (!j.contains(key) || !j[key].is_number_integer())
            throw ParseError(origin + ": missing integer field '" + key + "'");
        return j[key].get<int>();
    };
    const int declared = get_int(doc, "part_count");
    for (const auto& pj : doc["parts"]) {
        Part p;
        if (!pj.contains("name") || !pj["name"].is_string())
            throw ParseError(origin + ": part without a name");
        p.name = pj["name"].get<std::string>();
        p.index = get_int(pj, "index");
        if (!pj.contains("vertex_ids") || !pj["vertex_ids"].is_array())
            throw ParseError(origin + ": part '" + p.name + "' missing vertex_ids");
        for (const auto& v : pj["vertex_ids"]) p.vertex_ids.push_back(v.get<int>());

        GridSpec g;
        g.part_index = p.index;
        if (!pj.contains("grid") || !pj["grid"].is_object())
            throw ParseError(origin + ": part '" + p.name + "' missing grid");
        const json& gj = pj["grid"];
        g.num_rows = get_int(gj, "num_rows");
        if (!gj.contains("row_lengths") || !gj["row_lengths"].is_array())
            throw ParseError(origin + ": part '" + p.name + "' grid missing row_lengths");
        for (const auto& l : gj["row_lengths"]) g.row_lengths.push_back(l.get<int>());
        if (!gj.contains("row_vertex_ids") || !gj["row_vertex_ids"].is_array())
            throw ParseError(origin + ": part '" + p.name + "' grid missing row_vertex_ids");
        for (const auto& row : gj["row_vertex_ids"]) {
            std::vector<int> r;
            for (const auto& v : row) r.push_back(v.get<int>());
            g.row_vertex_ids.push_back(std::move(r));
        }
        seg.parts.push_back(std::move(p));
        seg.grids.push_back(std::move(g));
    }
    if (declared != seg.part_count())
        throw ParseError(origin + ": part_count " + std::to_string(declared) + " but " +
                         std::to_string(seg.part_count()) + " parts listed");

    // keep parts index-ordered so iteration order is deterministic
    std::vector<std::size_t> order(seg.parts.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return seg.parts[a].index < seg.parts[b].index;
    });
    PartSegmentation sorted;
    sorted.vertex_count = seg.vertex_count;
    for (std::size_t i : order) {
        sorted.parts.push_back(std::move(seg.parts[i]));
        sorted.grids.push_back(std::move(seg.grids[i]));
    }
    validate_segmentation(sorted);
    return sorted;
}

PartSegmentation load_segmentation(const std::filesystem::path& path, const HandMesh& mesh) {
    return parse_segmentation(util::read_text_file(path), mesh, path.string());
}

void save_segmentation(const PartSegmentation& seg, const std::filesystem::path& path) {
    ordered_json doc;
    doc["version"] = 1;
    doc["part_count"] = seg.part_count();
    doc["parts"] = ordered_json::array();
    for (int i = 0; i < seg.part_count(); ++i) {
        const Part& p = seg.parts[static_cast<std::size_t>(i)];
        const GridSpec& g = seg.grids[static_cast<std::size_t>(i)];
        ordered_json pj;
        pj["name"] = p.name;
        pj["index"] = p.index;
        pj["vertex_ids"] = p.vertex_ids;
        ordered_json gj;
        gj["num_rows"] = g.num_rows;
        gj["row_lengths"] = g.row_lengths;
        gj["row_vertex_ids"] = g.row_vertex_ids;
        pj["grid"] = std::move(gj);
        doc["parts"].push_back(std::move(pj));
    }
    util::write_text_file(path, doc.dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Mappings

ActiveVertexSet vertices_of_parts(const PartSegmentation& seg, const std::set<std::string>& part_names) {
    ActiveVertexSet active;
    active.mask.assign(static_cast<std::size_t>(seg.vertex_count), 0);
    for (const auto& name : part_names) {
        const Part* p = seg.find_part(name);
        if (!p) throw UnknownPartError("unknown part name: " + name);
        for (int v : p->vertex_ids) active.mask[static_cast<std::size_t>(v)] = 1;
    }
    for (int v = 0; v < seg.vertex_count; ++v)
        if (active.mask[static_cast<std::size_t>(v)]) active.vertex_ids.push_back(v);
    return active;
}

ContactVector grids_to_contact(const PartSegmentation& seg, const DenseGridPrediction& grids,
                               const ActiveVertexSet& active) {
    ContactVector contact;
    contact.values.assign(static_cast<std::size_t>(seg.vertex_count), 0);
    for (int i = 0; i < seg.part_count(); ++i) {
        const Part& p = seg.parts[static_cast<std::size_t>(i)];
        auto it = grids.grids.find(p.name);
        if (it == grids.grids.end()) continue; // absent grid: stays non-contact
        const GridSpec& spec = seg.grids[static_cast<std::size_t>(i)];
        const auto& grid = it->second;
        if (static_cast<int>(grid.size()) != spec.num_rows)
            throw ShapeError("part '" + p.name + "': grid has " + std::to_string(grid.size()) +
                             " rows, spec requires " + std::to_string(spec.num_rows));
        for (int r = 0; r < spec.num_rows; ++r) {
            const auto& row = grid[static_cast<std::size_t>(r)];
            const auto& ids = spec.row_vertex_ids[static_cast<std::size_t>(r)];
            if (row.size() != ids.size())
                throw ShapeError("part '" + p.name + "': row " + std::to_string(r) +
                                 " length mismatch");
            for (std::size_t c = 0; c < row.size(); ++c) {
                int v = ids[c];
                if (row[c] && active.contains(v))
                    contact.values[static_cast<std::size_t>(v)] = 1;
            }
        }
    }
    return contact;
}

DenseGridPrediction contact_to_grids(const PartSegmentation& seg, const ContactVector& contact,
                                     const std::set<std::string>& part_names) {
    if (static_cast<int>(contact.size()) != seg.vertex_count)
        throw LengthMismatchError("contact length " + std::to_string(contact.size()) +
                                  " != vertex count " + std::to_string(seg.vertex_count));
    DenseGridPrediction out;
    for (int i = 0; i < seg.part_count(); ++i) {
        const Part& p = seg.parts[static_cast<std::size_t>(i)];
        if (part_names.find(p.name) == part_names.end()) continue;
        const GridSpec& spec = seg.grids[static_cast<std::size_t>(i)];
        std::vector<std::vector<std::uint8_t>> grid;
        grid.reserve(static_cast<std::size_t>(spec.num_rows));
        for (const auto& ids : spec.row_vertex_ids) {
            std::vector<std::uint8_t> row;
            row.reserve(ids.size());
            for (int v : ids) row.push_back(contact.values[static_cast<std::size_t>(v)]);
            grid.push_back(std::move(row));
        }
        out.grids.emplace(p.name, std::move(grid));
    }
    return out;
}

DenseGridPrediction contact_to_grids(const PartSegmentation& seg, const ContactVector& contact) {
    std::set<std::string> all;
    for (const auto& p : seg.parts) all.insert(p.name);
    return contact_to_grids(seg, contact, all);
}

PartSegmentation flatten_grids(const PartSegmentation& seg) {
    PartSegmentation flat = seg;
    for (std::size_t i = 0; i < flat.grids.size(); ++i) {
        GridSpec& g = flat.grids[i];
        std::vector<int> merged;
        for (const auto& row : g.row_vertex_ids)
            merged.insert(merged.end(), row.begin(), row.end());
        g.num_rows = 1;
        g.row_lengths = {static_cast<int>(merged.size())};
        g.row_vertex_ids = {std::move(merged)};
    }
    validate_segmentation(flat);
    return flat;
}

} // namespace handcontact
