#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "curvflow/common.hpp"

namespace curvflow {

using Vec3 = Eigen::Vector3d;

/// Closed oriented triangle mesh immersed in 3-space. Faces wind
/// counterclockwise as seen from outside, so face normals point outward.
/// Treated as immutable once built; flows work on their own copies.
struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::map<std::string, std::vector<double>> vertex_data; // optional per-vertex metadata

    int vertex_count() const { return static_cast<int>(vertices.size()); }
    int face_count() const { return static_cast<int>(faces.size()); }

    double bounding_box_diagonal() const {
        if (vertices.empty()) return 0.0;
        Vec3 lo = vertices[0], hi = vertices[0];
        for (const Vec3& v : vertices) {
            lo = lo.cwiseMin(v);
            hi = hi.cwiseMax(v);
        }
        return (hi - lo).norm();
    }
};

inline double face_area(const Mesh& m, int f) {
    const auto& t = m.faces[f];
    return 0.5 * (m.vertices[t[1]] - m.vertices[t[0]])
                     .cross(m.vertices[t[2]] - m.vertices[t[0]])
                     .norm();
}

inline double min_edge_length(const Mesh& m) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& t : m.faces)
        for (int c = 0; c < 3; ++c)
            best = std::min(best, (m.vertices[t[(c + 1) % 3]] - m.vertices[t[c]]).squaredNorm());
    return m.faces.empty() ? 0.0 : std::sqrt(best);
}

struct MeshQualityReport {
    double min_edge_length = 0.0;
    double max_edge_length = 0.0;
    double min_face_area = 0.0;
    int euler_characteristic = 0;
    int genus = -1; // 1 - chi/2; -1 when chi is not even (invalid surface)
    bool manifold = false;
    bool orientation_consistent = false;
    bool indices_in_range = false;
    bool has_degenerate_face = false;
    std::vector<std::string> problems; // human-readable, each naming the offending simplex

    bool all_good() const {
        return manifold && orientation_consistent && indices_in_range && !has_degenerate_face;
    }
};

// Faces are rejected as degenerate below this fraction of the squared
// bounding-box diagonal; it guards the cotangent weights downstream.
inline constexpr double kDegenerateAreaFraction = 1e-14;

namespace detail {
inline std::uint64_t edge_key(int a, int b) {
    const std::uint32_t lo = static_cast<std::uint32_t>(a < b ? a : b);
    const std::uint32_t hi = static_cast<std::uint32_t>(a < b ? b : a);
    return (static_cast<std::uint64_t>(lo) << 32) | hi;
}
} // namespace detail

/// Connectivity and geometry audit. Problems are reported, never thrown.
inline MeshQualityReport validate(const Mesh& mesh) {
    MeshQualityReport rep;
    const int nv = mesh.vertex_count();
    const int nf = mesh.face_count();

    rep.indices_in_range = true;
    for (int f = 0; f < nf; ++f) {
        for (int c = 0; c < 3; ++c) {
            const int v = mesh.faces[f][c];
            if (v < 0 || v >= nv) {
                rep.indices_in_range = false;
                rep.problems.push_back("face " + std::to_string(f) + " references vertex " +
                                       std::to_string(v) + " out of range [0," +
                                       std::to_string(nv) + ")");
            }
        }
        const auto& t = mesh.faces[f];
        if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
            rep.indices_in_range = false;
            rep.problems.push_back("face " + std::to_string(f) + " repeats a vertex index");
        }
    }
    if (!rep.indices_in_range) return rep;

    const double diag = mesh.bounding_box_diagonal();
    const double area_floor = kDegenerateAreaFraction * diag * diag;
    double min_e = std::numeric_limits<double>::infinity(), max_e = 0.0;
    double min_a = std::numeric_limits<double>::infinity();
    for (int f = 0; f < nf; ++f) {
        const auto& t = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            const double e = (mesh.vertices[t[(c + 1) % 3]] - mesh.vertices[t[c]]).norm();
            min_e = std::min(min_e, e);
            max_e = std::max(max_e, e);
        }
        const double a = face_area(mesh, f);
        min_a = std::min(min_a, a);
        if (a <= area_floor) {
            rep.has_degenerate_face = true;
            rep.problems.push_back("face " + std::to_string(f) + " is degenerate (area " +
                                   format_double(a) + ")");
        }
    }
    rep.min_edge_length = nf ? min_e : 0.0;
    rep.max_edge_length = nf ? max_e : 0.0;
    rep.min_face_area = nf ? min_a : 0.0;

    // Each undirected edge must carry exactly one half-edge per direction.
    struct EdgeUse {
        int forward = 0, backward = 0, face = -1;
    };
    std::unordered_map<std::uint64_t, EdgeUse> edges;
    edges.reserve(static_cast<std::size_t>(nf) * 3);
    rep.manifold = true;
    rep.orientation_consistent = true;
    for (int f = 0; f < nf; ++f) {
        const auto& t = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            const int a = t[c], b = t[(c + 1) % 3];
            EdgeUse& use = edges[detail::edge_key(a, b)];
            int& dir = (a < b) ? use.forward : use.backward;
            if (++dir > 1 && rep.orientation_consistent) {
                rep.orientation_consistent = false;
                rep.problems.push_back("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                       ") traversed twice in the same direction; face " +
                                       std::to_string(f) + " is inconsistently oriented");
            }
            use.face = f;
        }
    }
    for (const auto& [key, use] : edges) {
        const int total = use.forward + use.backward;
        if (total != 2) {
            rep.manifold = false;
            const int a = static_cast<int>(key >> 32), b = static_cast<int>(key & 0xffffffffu);
            rep.problems.push_back("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                   ") borders " + std::to_string(total) +
                                   " half-edges (face " + std::to_string(use.face) + ")" +
                                   (total == 1 ? " - open boundary" : " - non-manifold"));
        }
    }

    const int ne = static_cast<int>(edges.size());
    rep.euler_characteristic = nv - ne + nf;
    if (rep.euler_characteristic % 2 == 0) rep.genus = 1 - rep.euler_characteristic / 2;
    return rep;
}

/// Throws MeshError if the mesh violates any closed-surface invariant.
inline void require_valid(const Mesh& mesh) {
    const MeshQualityReport rep = validate(mesh);
    if (!rep.all_good())
        throw MeshError("invalid mesh: " + (rep.problems.empty() ? std::string("unknown defect")
                                                                 : rep.problems.front()));
}

/// Static adjacency built once per connectivity (positions may move freely).
struct Adjacency {
    // vertex -> incident (face, corner) pairs, CSR layout
    std::vector<int> vf_offset;
    std::vector<int> vf_face;
    std::vector<std::uint8_t> vf_corner;
    // vertex -> distinct 1-ring neighbours, CSR layout
    std::vector<int> vv_offset;
    std::vector<int> vv_index;

    static Adjacency build(const Mesh& mesh) {
        Adjacency adj;
        const int nv = mesh.vertex_count();
        const int nf = mesh.face_count();
        std::vector<int> count(nv, 0);
        for (const auto& t : mesh.faces)
            for (int c = 0; c < 3; ++c) ++count[t[c]];
        adj.vf_offset.assign(nv + 1, 0);
        for (int v = 0; v < nv; ++v) adj.vf_offset[v + 1] = adj.vf_offset[v] + count[v];
        adj.vf_face.resize(adj.vf_offset[nv]);
        adj.vf_corner.resize(adj.vf_offset[nv]);
        std::vector<int> cursor(adj.vf_offset.begin(), adj.vf_offset.end() - 1);
        for (int f = 0; f < nf; ++f)
            for (int c = 0; c < 3; ++c) {
                const int v = mesh.faces[f][c];
                adj.vf_face[cursor[v]] = f;
                adj.vf_corner[cursor[v]] = static_cast<std::uint8_t>(c);
                ++cursor[v];
            }

        adj.vv_offset.assign(nv + 1, 0);
        std::vector<int> ring;
        std::vector<std::vector<int>> rings(nv);
        for (int v = 0; v < nv; ++v) {
            ring.clear();
            for (int k = adj.vf_offset[v]; k < adj.vf_offset[v + 1]; ++k) {
                const auto& t = mesh.faces[adj.vf_face[k]];
                for (int c = 0; c < 3; ++c)
                    if (t[c] != v) ring.push_back(t[c]);
            }
            std::sort(ring.begin(), ring.end());
            ring.erase(std::unique(ring.begin(), ring.end()), ring.end());
            rings[v] = ring;
            adj.vv_offset[v + 1] = adj.vv_offset[v] + static_cast<int>(ring.size());
        }
        adj.vv_index.resize(adj.vv_offset[nv]);
        for (int v = 0; v < nv; ++v)
            std::copy(rings[v].begin(), rings[v].end(), adj.vv_index.begin() + adj.vv_offset[v]);
        return adj;
    }

    /// Distinct vertices within two edge hops of v, excluding v itself.
    std::vector<int> two_ring(int v) const {
        std::vector<int> out;
        for (int k = vv_offset[v]; k < vv_offset[v + 1]; ++k) {
            const int u = vv_index[k];
            out.push_back(u);
            for (int j = vv_offset[u]; j < vv_offset[u + 1]; ++j) out.push_back(vv_index[j]);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        out.erase(std::remove(out.begin(), out.end(), v), out.end());
        return out;
    }
};

} // namespace curvflow
