#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "curvflow/generators.hpp"
#include "curvflow/mesh_io.hpp"

using namespace curvflow;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / name;
}

double total_area(const Mesh& m) {
    double a = 0.0;
    for (int f = 0; f < m.face_count(); ++f) a += face_area(m, f);
    return a;
}

double signed_volume(const Mesh& m) {
    double v = 0.0;
    for (const auto& t : m.faces)
        v += m.vertices[t[0]].dot(m.vertices[t[1]].cross(m.vertices[t[2]])) / 6.0;
    return v;
}

} // namespace

TEST_CASE("icosphere base case is the projected icosahedron") {
    const Mesh m = make_icosphere(1.0, 0);
    CHECK(m.vertex_count() == 12);
    CHECK(m.face_count() == 20);
    const MeshQualityReport rep = validate(m);
    CHECK(rep.all_good());
    CHECK(rep.genus == 0);
    CHECK(rep.euler_characteristic == 2);
    CHECK(signed_volume(m) > 0.0); // outward orientation
}

TEST_CASE("icosphere subdivision counts and radius") {
    const Mesh m = make_icosphere(1.0, 3);
    CHECK(m.face_count() == 1280); // 20 * 4^3
    for (const Vec3& v : m.vertices) CHECK(v.norm() == Catch::Approx(1.0).margin(1e-14));
    CHECK(validate(m).all_good());
}

TEST_CASE("icosphere area approaches the closed form from below") {
    // oracle: surface area of the round sphere, 4 pi r^2
    const double r = 2.5;
    const double exact = 4.0 * std::numbers::pi * r * r;
    const double a2 = total_area(make_icosphere(r, 2));
    const double a3 = total_area(make_icosphere(r, 3));
    const double a4 = total_area(make_icosphere(r, 4));
    CHECK(a2 < exact); // inscribed
    CHECK(a3 < exact);
    CHECK(a4 < exact);
    CHECK(exact - a3 < exact - a2);
    CHECK(exact - a4 < exact - a3);
    CHECK(a4 == Catch::Approx(exact).epsilon(2e-3));
}

TEST_CASE("icosphere rejects bad parameters") {
    CHECK_THROWS_AS(make_icosphere(-1.0, 1), ConfigError);
    CHECK_THROWS_AS(make_icosphere(0.0, 1), ConfigError);
    CHECK_THROWS_AS(make_icosphere(1.0, -1), ConfigError);
}

TEST_CASE("torus generator topology") {
    const Mesh m = make_torus(std::sqrt(2.0), 1.0, 64, 32);
    CHECK(m.vertex_count() == 64 * 32);
    const MeshQualityReport rep = validate(m);
    CHECK(rep.all_good());
    CHECK(rep.genus == 1);
    CHECK(rep.euler_characteristic == 0);
}

TEST_CASE("torus minimal resolution and parameter validation") {
    const Mesh m = make_torus(2.0, 1.0, 3, 3);
    CHECK(m.vertex_count() == 9);
    CHECK(validate(m).genus == 1);
    CHECK_THROWS_AS(make_torus(1.0, 2.0, 16, 16), ConfigError);
    CHECK_THROWS_AS(make_torus(2.0, 1.0, 2, 16), ConfigError);
}

TEST_CASE("validate flags a duplicated face as non-manifold") {
    Mesh m = make_icosphere(1.0, 1);
    m.faces.push_back(m.faces.front());
    const MeshQualityReport rep = validate(m);
    CHECK_FALSE(rep.manifold);
    CHECK_FALSE(rep.all_good());
}

TEST_CASE("Euler characteristic invariance across generator grids") {
    for (int s = 0; s <= 3; ++s) {
        const MeshQualityReport rep = validate(make_icosphere(1.0, s));
        CHECK(rep.all_good());
        CHECK(rep.genus == 0);
    }
    for (int res : {3, 8, 16}) {
        const MeshQualityReport rep = validate(make_torus(2.0, 1.0, res, res));
        CHECK(rep.all_good());
        CHECK(rep.genus == 1);
    }
}

TEST_CASE("OFF round trip is exact on connectivity and coordinates") {
    const Mesh m = make_icosphere(1.0, 2);
    const auto path = temp_file("curvflow_roundtrip.off");
    save_mesh(m, path.string(), MeshFormat::OFF);
    const Mesh back = load_mesh(path.string(), MeshFormat::OFF);
    REQUIRE(back.vertex_count() == m.vertex_count());
    REQUIRE(back.faces == m.faces);
    double worst = 0.0;
    for (int i = 0; i < m.vertex_count(); ++i)
        worst = std::max(worst, (m.vertices[i] - back.vertices[i]).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-10);
    std::filesystem::remove(path);
}

TEST_CASE("OBJ round trip preserves the mesh") {
    const Mesh m = make_torus(2.0, 0.5, 12, 8);
    const auto path = temp_file("curvflow_roundtrip.obj");
    save_mesh(m, path.string(), MeshFormat::OBJ);
    const Mesh back = load_mesh(path.string(), MeshFormat::OBJ);
    REQUIRE(back.faces == m.faces);
    for (int i = 0; i < m.vertex_count(); ++i)
        CHECK((m.vertices[i] - back.vertices[i]).norm() < 1e-12);
    std::filesystem::remove(path);
}

TEST_CASE("regular icosahedron OFF file loads with the expected counts") {
    const Mesh ico = make_icosphere(1.0, 0);
    const auto path = temp_file("curvflow_ico.off");
    save_mesh(ico, path.string(), MeshFormat::OFF);
    const Mesh m = load_mesh(path.string(), MeshFormat::OFF);
    CHECK(m.vertex_count() == 12);
    CHECK(m.face_count() == 20);
    const MeshQualityReport rep = validate(m);
    CHECK(rep.euler_characteristic == 2); // V - E + F = 12 - 30 + 20
    CHECK(rep.genus == 0);
    std::filesystem::remove(path);
}

TEST_CASE("OBJ face index beyond the vertex count is rejected") {
    const auto path = temp_file("curvflow_bad.obj");
    {
        std::ofstream out(path);
        out << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 99\n";
    }
    CHECK_THROWS_WITH(load_mesh(path.string(), MeshFormat::OBJ),
                      Catch::Matchers::ContainsSubstring("out of range"));
    std::filesystem::remove(path);
}

TEST_CASE("cube OFF with one flipped face names the inconsistency") {
    // cube = 8 vertices, 12 triangles; flip the winding of the last one
    Mesh cube;
    cube.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                     {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
    cube.faces = {{0, 2, 1}, {0, 3, 2}, {4, 5, 6}, {4, 6, 7}, {0, 1, 5}, {0, 5, 4},
                  {1, 2, 6}, {1, 6, 5}, {2, 3, 7}, {2, 7, 6}, {3, 0, 4}, {3, 4, 7}};
    REQUIRE(validate(cube).all_good());
    std::swap(cube.faces.back()[1], cube.faces.back()[2]);
    const MeshQualityReport rep = validate(cube);
    CHECK_FALSE(rep.orientation_consistent);
    REQUIRE_FALSE(rep.problems.empty());
    CHECK(rep.problems.front().find("oriented") != std::string::npos);

    const auto path = temp_file("curvflow_flipped.off");
    save_mesh(cube, path.string(), MeshFormat::OFF);
    CHECK_THROWS_AS(load_mesh(path.string(), MeshFormat::OFF), MeshError);
    std::filesystem::remove(path);
}

TEST_CASE("degenerate faces are reported") {
    Mesh m = make_icosphere(1.0, 1);
    const int dup = m.faces[0][0];
    m.vertices.push_back(m.vertices[dup]); // coincident vertex
    m.faces[0][1] = m.vertex_count() - 1;  // zero-area sliver
    const MeshQualityReport rep = validate(m);
    CHECK(rep.has_degenerate_face);
}

TEST_CASE("unsupported format tag and unwritable path") {
    CHECK_THROWS_AS(mesh_format_from_string("stl"), ConfigError);
    const Mesh m = make_icosphere(1.0, 0);
    CHECK_THROWS_AS(save_mesh(m, "/nonexistent_dir_xyz/mesh.off", MeshFormat::OFF), ParseError);
}

TEST_CASE("malformed OFF header is a parse error") {
    const auto path = temp_file("curvflow_malformed.off");
    {
        std::ofstream out(path);
        out << "OFZ\n3 1 3\n";
    }
    CHECK_THROWS_AS(load_mesh(path.string(), MeshFormat::OFF), ParseError);
    std::filesystem::remove(path);
}
