#include <catch2/catch_amalgamated.hpp>

#include <numbers>
#include <sstream>

#include "curvflow/parametric.hpp"

using namespace curvflow;

namespace {

// principal curvatures = eigenvalues of g^-1 A (2x2, symmetric packing)
std::pair<double, double> principal_curvatures(const std::array<double, 3>& g,
                                               const std::array<double, 3>& A) {
    const double det = g[0] * g[2] - g[1] * g[1];
    const double m00 = (g[2] * A[0] - g[1] * A[1]) / det;
    const double m01 = (g[2] * A[1] - g[1] * A[2]) / det;
    const double m10 = (-g[1] * A[0] + g[0] * A[1]) / det;
    const double m11 = (-g[1] * A[1] + g[0] * A[2]) / det;
    const double tr = m00 + m11, dd = m00 * m11 - m01 * m10;
    const double disc = std::sqrt(std::max(tr * tr / 4.0 - dd, 0.0));
    return {tr / 2.0 - disc, tr / 2.0 + disc};
}

} // namespace

TEST_CASE("sphere fundamental forms satisfy A = -g/r pointwise") {
    for (double r : {1.0, 2.0}) {
        const auto charts = fundamental_forms(ParametricSurface::sphere(r), 64);
        REQUIRE(charts.size() == 2);
        double worst = 0.0;
        for (const auto& ct : charts)
            for (int i = ct.band_lo; i <= ct.band_hi; ++i)
                for (int j = 0; j < ct.nt; ++j)
                    for (int c = 0; c < 3; ++c)
                        worst = std::max(worst,
                                         std::abs(ct.A.at(i, j)[c] + ct.g.at(i, j)[c] / r));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("sphere normals are unit and H = -2/r") {
    const double r = 1.5;
    const auto charts = fundamental_forms(ParametricSurface::sphere(r), 64);
    for (const auto& ct : charts)
        for (int i = ct.band_lo; i <= ct.band_hi; ++i)
            for (int j = 0; j < ct.nt; ++j) {
                CHECK(ct.H.at(i, j)[0] == Catch::Approx(-2.0 / r).margin(1e-8));
                CHECK(ct.normal(i, j).norm() == Catch::Approx(1.0).margin(1e-12));
            }
}

TEST_CASE("torus outer equator has principal curvatures -1 and -1/3") {
    // torus(2,1): tube curvature -1/a, ring curvature -cos v/(R + a cos v)
    const auto charts = fundamental_forms(ParametricSurface::torus(2.0, 1.0), 128);
    REQUIRE(charts.size() == 1);
    const auto& ct = charts[0];
    // column with t = 0 is the outer equator
    for (int i = 0; i < ct.ns; i += 16) {
        const auto [k1, k2] = principal_curvatures(ct.g.at(i, 0), ct.A.at(i, 0));
        CHECK(k1 == Catch::Approx(-1.0).margin(1e-8));
        CHECK(k2 == Catch::Approx(-1.0 / 3.0).margin(1e-8));
    }
}

TEST_CASE("ellipsoid with equal axes reproduces the sphere") {
    const auto sph = fundamental_forms(ParametricSurface::sphere(1.0), 64);
    const auto ell = fundamental_forms(ParametricSurface::ellipsoid(1.0, 1.0, 1.0), 64);
    REQUIRE(sph.size() == ell.size());
    for (std::size_t c = 0; c < sph.size(); ++c) {
        double worst = 0.0;
        for (int i = sph[c].band_lo; i <= sph[c].band_hi; ++i)
            for (int j = 0; j < sph[c].nt; ++j)
                for (int k = 0; k < 3; ++k) {
                    worst = std::max(worst, std::abs(sph[c].g.at(i, j)[k] - ell[c].g.at(i, j)[k]));
                    worst = std::max(worst, std::abs(sph[c].A.at(i, j)[k] - ell[c].A.at(i, j)[k]));
                }
        CHECK(worst < 1e-10);
    }
}

TEST_CASE("Codazzi residual is pure discretization error") {
    SECTION("sphere at 64^2") {
        CHECK(codazzi_residual(ParametricSurface::sphere(1.0), 64) < 1e-7);
    }
    SECTION("torus at 128^2") {
        CHECK(codazzi_residual(ParametricSurface::torus(std::sqrt(2.0), 1.0), 128) < 1e-6);
    }
    SECTION("sphere residual drops at least 8x per grid doubling") {
        const double r64 = codazzi_residual(ParametricSurface::sphere(1.0), 64);
        const double r128 = codazzi_residual(ParametricSurface::sphere(1.0), 128);
        CHECK(r64 / r128 >= 8.0);
    }
}

TEST_CASE("Simons identity residual vanishes with the expected rates") {
    SECTION("sphere: both sides vanish identically") {
        CHECK(simons_residual(ParametricSurface::sphere(1.0), 128) < 1e-8);
        CHECK(simons_residual(ParametricSurface::sphere(2.0), 128) < 1e-8);
    }
    SECTION("torus value and order over 64 -> 128 -> 256") {
        const auto tor = ParametricSurface::torus(2.0, 1.0);
        const double s64 = simons_residual(tor, 64);
        const double s128 = simons_residual(tor, 128);
        const double s256 = simons_residual(tor, 256);
        CHECK(s128 < 1e-5);
        CHECK(std::log2(s64 / s128) >= 3.0);
        CHECK(std::log2(s128 / s256) >= 3.0);
    }
    SECTION("ellipsoid shows the same convergence behaviour") {
        const auto ell = ParametricSurface::ellipsoid(1.5, 1.0, 0.8);
        const double s128 = simons_residual(ell, 128);
        const double s192 = simons_residual(ell, 192);
        CHECK(s128 < 2.5e-4);
        CHECK(s192 < 1e-4);
        CHECK(std::log2(s128 / s192) / std::log2(192.0 / 128.0) >= 3.0);
    }
}

TEST_CASE("covariant Hessian of H is symmetric to FD tolerance") {
    CHECK(hessian_H_antisymmetry(ParametricSurface::sphere(1.0), 64) < 1e-10);
    CHECK(hessian_H_antisymmetry(ParametricSurface::torus(2.0, 1.0), 128) < 1e-10);
    CHECK(hessian_H_antisymmetry(ParametricSurface::ellipsoid(1.5, 1.0, 0.8), 96) < 1e-8);
}

TEST_CASE("exact Willmore energies") {
    const double four_pi = 4.0 * std::numbers::pi;
    SECTION("sphere energy is 4 pi, independent of radius") {
        const double w1 = willmore_energy_exact(ParametricSurface::sphere(1.0), 256);
        const double w25 = willmore_energy_exact(ParametricSurface::sphere(2.5), 256);
        CHECK(w1 == Catch::Approx(four_pi).epsilon(1e-4));
        CHECK(std::abs(w1 - w25) < 1e-10 * four_pi); // exact scale invariance
    }
    SECTION("the sqrt(2) torus gives 4 pi^2") {
        const double w = willmore_energy_exact(ParametricSurface::torus(std::sqrt(2.0), 1.0), 256);
        CHECK(w == Catch::Approx(4.0 * std::numbers::pi * std::numbers::pi).epsilon(1e-9));
    }
    SECTION("other revolution ratios exceed 4 pi^2") {
        // 1-D reduction oracle: W(rho) = 2 pi^2 rho^2 / sqrt(rho^2 - 1), minimized at sqrt(2)
        const double w21 = willmore_energy_exact(ParametricSurface::torus(2.0, 1.0), 256);
        const double oracle = 2.0 * std::numbers::pi * std::numbers::pi * 4.0 / std::sqrt(3.0);
        CHECK(w21 == Catch::Approx(oracle).epsilon(1e-9));
        CHECK(w21 > 4.0 * std::numbers::pi * std::numbers::pi);
    }
}

TEST_CASE("residual CSV dump has the plotting schema") {
    std::ostringstream out;
    dump_residual_csv(ParametricSurface::torus(2.0, 1.0), 16, ResidualKind::Codazzi, out);
    std::istringstream in(out.str());
    std::string header;
    std::getline(in, header);
    CHECK(header == "u,v,residual");
    int rows = 0;
    std::string line;
    while (std::getline(in, line)) {
        CHECK(std::count(line.begin(), line.end(), ',') == 2);
        ++rows;
    }
    CHECK(rows == 16 * 16);
}

TEST_CASE("catalogue preconditions") {
    CHECK_THROWS_AS(ParametricSurface::sphere(-1.0), ConfigError);
    CHECK_THROWS_AS(ParametricSurface::torus(1.0, 2.0), ConfigError);
    CHECK_THROWS_AS(ParametricSurface::ellipsoid(1.0, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(codazzi_residual(ParametricSurface::sphere(1.0), 32), ConfigError);
    CHECK_THROWS_AS(codazzi_residual(ParametricSurface::torus(2.0, 1.0), 8), ConfigError);
}
