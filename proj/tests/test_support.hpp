#pragma once

#include "handcontact/types.hpp"

#include <atomic>
#include <filesystem>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace testsupport {

inline std::filesystem::path source_dir() { return HANDCONTACT_SOURCE_DIR; }
inline std::filesystem::path assets_dir() { return source_dir() / "assets"; }

// unique scratch directory, removed on destruction
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("handcontact_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// m x n planar vertex grid triangulated with anti-diagonals, so the corner
// vertices (0,0) and (m-1,n-1) touch no diagonal and BFS layers from them
// follow manhattan distance. Vertex (i,j) -> index i*n + j; position (j,i,0).
inline handcontact::HandMesh grid_patch_mesh(int m, int n) {
    handcontact::HandMesh mesh;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            mesh.vertices.push_back(handcontact::Vec3{static_cast<double>(j),
                                                      static_cast<double>(i), 0.0});
    auto at = [n](int i, int j) { return i * n + j; };
    for (int i = 0; i + 1 < m; ++i) {
        for (int j = 0; j + 1 < n; ++j) {
            // anti-diagonal (i+1,j)-(i,j+1)
            mesh.faces.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
            mesh.faces.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    }
    return mesh;
}

// independent connectivity oracle
class UnionFind {
public:
    explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    int find(int x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }
    void unite(int a, int b) { parent_[find(a)] = find(b); }
    int components() {
        int count = 0;
        for (int i = 0; i < static_cast<int>(parent_.size()); ++i)
            if (find(i) == i) ++count;
        return count;
    }

private:
    std::vector<int> parent_;
};

inline int component_count(const handcontact::HandMesh& mesh) {
    UnionFind uf(mesh.vertex_count());
    for (const auto& f : mesh.faces) {
        uf.unite(f[0], f[1]);
        uf.unite(f[1], f[2]);
    }
    return uf.components();
}

inline handcontact::ContactVector random_contact(std::mt19937_64& rng, int length,
                                                 double p_one = 0.5) {
    handcontact::ContactVector c;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < length; ++i) c.values.push_back(unit(rng) < p_one ? 1 : 0);
    return c;
}

} // namespace testsupport
