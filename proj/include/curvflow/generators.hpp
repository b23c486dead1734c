#pragma once

#include <cmath>
#include <numbers>
#include <unordered_map>

#include "curvflow/mesh.hpp"

namespace curvflow {

/// Icosahedron subdivided `subdivisions` times, every vertex projected to the
/// sphere of the given radius about the origin. F = 20 * 4^subdivisions.
inline Mesh make_icosphere(double radius, int subdivisions) {
    if (!(radius > 0.0)) throw ConfigError("icosphere radius must be positive");
    if (subdivisions < 0) throw ConfigError("icosphere subdivisions must be >= 0");

    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    Mesh mesh;
    mesh.vertices = {
        {-1, phi, 0}, {1, phi, 0},   {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi},   {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1},   {-phi, 0, -1}, {-phi, 0, 1},
    };
    mesh.faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };
    for (Vec3& v : mesh.vertices) v *= radius / v.norm();

    for (int level = 0; level < subdivisions; ++level) {
        std::unordered_map<std::uint64_t, int> midpoint;
        midpoint.reserve(mesh.faces.size() * 3 / 2);
        auto mid = [&](int a, int b) {
            const auto key = detail::edge_key(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            Vec3 p = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
            p *= radius / p.norm();
            const int idx = mesh.vertex_count();
            mesh.vertices.push_back(p);
            midpoint.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> refined;
        refined.reserve(mesh.faces.size() * 4);
        for (const auto& t : mesh.faces) {
            const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
            refined.push_back({t[0], ab, ca});
            refined.push_back({t[1], bc, ab});
            refined.push_back({t[2], ca, bc});
            refined.push_back({ab, bc, ca});
        }
        mesh.faces = std::move(refined);
    }
    return mesh;
}

/// Torus of revolution about the z axis: tube radius `minor_radius` around a
/// circle of radius `major_radius`, sampled on a res_major x res_minor grid.
inline Mesh make_torus(double major_radius, double minor_radius, int res_major, int res_minor) {
    if (!(major_radius > minor_radius) || !(minor_radius > 0.0))
        throw ConfigError("torus radii must satisfy major > minor > 0");
    if (res_major < 3 || res_minor < 3) throw ConfigError("torus resolutions must be >= 3");

    const double tau = 2.0 * std::numbers::pi;
    Mesh mesh;
    mesh.vertices.reserve(static_cast<std::size_t>(res_major) * res_minor);
    for (int i = 0; i < res_major; ++i) {
        const double u = tau * i / res_major;
        for (int j = 0; j < res_minor; ++j) {
            const double v = tau * j / res_minor;
            const double ring = major_radius + minor_radius * std::cos(v);
            mesh.vertices.push_back(
                Vec3(ring * std::cos(u), ring * std::sin(u), minor_radius * std::sin(v)));
        }
    }
    auto at = [&](int i, int j) { return (i % res_major) * res_minor + (j % res_minor); };
    mesh.faces.reserve(static_cast<std::size_t>(res_major) * res_minor * 2);
    for (int i = 0; i < res_major; ++i)
        for (int j = 0; j < res_minor; ++j) {
            // winding follows du x dv, which points outward
            mesh.faces.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1)});
            mesh.faces.push_back({at(i, j), at(i + 1, j + 1), at(i, j + 1)});
        }
    return mesh;
}

} // namespace curvflow
