#pragma once

#include <cmath>
#include <numbers>
#include <ostream>

#include "curvflow/mesh.hpp"

namespace curvflow {

/// Fixed catalogue of closed-form charts. The three surfaces cover constant,
/// sign-varying and generic curvature. Charts are oriented so the computed
/// unit normal points outward.
///
/// Sphere and ellipsoid use two overlapping polar charts (poles on the z and
/// x axes); residuals are reported over the interior band |cos s| <= 0.95 of
/// each chart, whose union covers the surface. The torus chart is doubly
/// periodic and needs no band.
class ParametricSurface {
public:
    enum class Kind { Sphere, Torus, Ellipsoid };

    static ParametricSurface sphere(double r) {
        if (!(r > 0.0)) throw ConfigError("sphere radius must be positive");
        return ParametricSurface(Kind::Sphere, r, r, r);
    }
    static ParametricSurface torus(double major, double minor) {
        if (!(major > minor) || !(minor > 0.0))
            throw ConfigError("torus radii must satisfy major > minor > 0");
        return ParametricSurface(Kind::Torus, major, minor, 0.0);
    }
    static ParametricSurface ellipsoid(double a, double b, double c) {
        if (!(a > 0.0) || !(b > 0.0) || !(c > 0.0))
            throw ConfigError("ellipsoid semi-axes must be positive");
        return ParametricSurface(Kind::Ellipsoid, a, b, c);
    }

    Kind kind() const { return kind_; }
    int chart_count() const { return kind_ == Kind::Torus ? 1 : 2; }
    bool s_periodic() const { return kind_ == Kind::Torus; }

    Vec3 position(int chart, double s, double t) const {
        switch (kind_) {
        case Kind::Torus: {
            const double ring = p0_ + p1_ * std::cos(t);
            return Vec3(ring * std::cos(s), ring * std::sin(s), p1_ * std::sin(t));
        }
        case Kind::Sphere:
        case Kind::Ellipsoid:
            if (chart == 0)
                return Vec3(p0_ * std::sin(s) * std::cos(t), p1_ * std::sin(s) * std::sin(t),
                            p2_ * std::cos(s));
            return Vec3(p0_ * std::cos(s), p1_ * std::sin(s) * std::cos(t),
                        p2_ * std::sin(s) * std::sin(t));
        }
        return Vec3::Zero();
    }

    double param(int i) const { return i == 0 ? p0_ : (i == 1 ? p1_ : p2_); }

private:
    ParametricSurface(Kind k, double p0, double p1, double p2)
        : kind_(k), p0_(p0), p1_(p1), p2_(p2) {}
    Kind kind_;
    double p0_, p1_, p2_;
};

namespace fd {

// Centered stencils. Chart derivatives use the 8th-order pair (the chart map
// can be sampled at arbitrary offsets, so accuracy is cheap there); stored
// tensor grids are differentiated with the 6th-order pair.
inline constexpr int kChartReach = 4;
inline constexpr double kD1_8[9] = {1.0 / 280,  -4.0 / 105, 1.0 / 5,   -4.0 / 5, 0.0,
                                    4.0 / 5,    -1.0 / 5,   4.0 / 105, -1.0 / 280};
inline constexpr double kD2_8[9] = {-1.0 / 560, 8.0 / 315,  -1.0 / 5,  8.0 / 5,  -205.0 / 72,
                                    8.0 / 5,    -1.0 / 5,   8.0 / 315, -1.0 / 560};
inline constexpr int kGridReach = 3;
inline constexpr double kD1_6[7] = {-1.0 / 60, 3.0 / 20, -3.0 / 4, 0.0, 3.0 / 4, -3.0 / 20,
                                    1.0 / 60};

} // namespace fd

namespace detail {

template <int NC>
struct TensorGridStore {
    int ns = 0, nt = 0;
    std::vector<std::array<double, NC>> val;
    void resize(int s, int t) {
        ns = s;
        nt = t;
        val.assign(static_cast<std::size_t>(s) * t, {});
    }
    std::array<double, NC>& at(int i, int j) { return val[static_cast<std::size_t>(i) * nt + j]; }
    const std::array<double, NC>& at(int i, int j) const {
        return val[static_cast<std::size_t>(i) * nt + j];
    }
};

inline int sym(int a, int b) { return a + b; } // symmetric 2x2 packing: 00->0, 01->1, 11->2

/// Frame and curvature data of one chart point, all by centered differences
/// of the chart map.
struct PointForms {
    std::array<double, 3> g, ginv, A;
    std::array<double, 6> gamma; // Gamma^k_ij at k*3 + sym(i,j)
    Vec3 nu;
    double H = 0.0, sqrt_det = 0.0, norm_A_sq = 0.0;
};

inline PointForms point_forms(const ParametricSurface& surf, int chart, double s, double t,
                              double hs, double ht) {
    const int R = fd::kChartReach;
    Vec3 smp[2 * fd::kChartReach + 1][2 * fd::kChartReach + 1];
    for (int a = -R; a <= R; ++a)
        for (int b = -R; b <= R; ++b)
            smp[a + R][b + R] = surf.position(chart, s + a * hs, t + b * ht);

    Vec3 fs = Vec3::Zero(), ft = Vec3::Zero(), fss = Vec3::Zero(), ftt = Vec3::Zero(),
         fst = Vec3::Zero();
    for (int a = -R; a <= R; ++a) {
        fs += fd::kD1_8[a + R] * smp[a + R][R];
        ft += fd::kD1_8[a + R] * smp[R][a + R];
        fss += fd::kD2_8[a + R] * smp[a + R][R];
        ftt += fd::kD2_8[a + R] * smp[R][a + R];
        Vec3 dt_row = Vec3::Zero();
        for (int b = -R; b <= R; ++b) dt_row += fd::kD1_8[b + R] * smp[a + R][b + R];
        fst += fd::kD1_8[a + R] * dt_row;
    }
    fs /= hs;
    ft /= ht;
    fss /= hs * hs;
    ftt /= ht * ht;
    fst /= hs * ht;

    PointForms p;
    p.g = {fs.dot(fs), fs.dot(ft), ft.dot(ft)};
    const double det = p.g[0] * p.g[2] - p.g[1] * p.g[1];
    p.sqrt_det = std::sqrt(det);
    p.ginv = {p.g[2] / det, -p.g[1] / det, p.g[0] / det};
    p.nu = fs.cross(ft).normalized();
    p.A = {fss.dot(p.nu), fst.dot(p.nu), ftt.dot(p.nu)};
    p.H = p.ginv[0] * p.A[0] + 2.0 * p.ginv[1] * p.A[1] + p.ginv[2] * p.A[2];
    // |A|^2 = tr(M^2), M = g^-1 A
    const double m00 = p.ginv[0] * p.A[0] + p.ginv[1] * p.A[1];
    const double m01 = p.ginv[0] * p.A[1] + p.ginv[1] * p.A[2];
    const double m10 = p.ginv[1] * p.A[0] + p.ginv[2] * p.A[1];
    const double m11 = p.ginv[1] * p.A[1] + p.ginv[2] * p.A[2];
    p.norm_A_sq = m00 * m00 + 2.0 * m01 * m10 + m11 * m11;

    // dg[k][sym(i,j)] = <f_ki, f_j> + <f_i, f_kj>
    const Vec3 d1[2] = {fs, ft};
    const Vec3 d2[2][2] = {{fss, fst}, {fst, ftt}};
    double dg[2][3];
    for (int k = 0; k < 2; ++k) {
        dg[k][0] = 2.0 * d2[k][0].dot(d1[0]);
        dg[k][1] = d2[k][0].dot(d1[1]) + d1[0].dot(d2[k][1]);
        dg[k][2] = 2.0 * d2[k][1].dot(d1[1]);
    }
    for (int k = 0; k < 2; ++k)
        for (int a = 0; a < 2; ++a)
            for (int b = a; b < 2; ++b) {
                double acc = 0.0;
                for (int l = 0; l < 2; ++l)
                    acc += p.ginv[sym(k, l)] * (dg[a][sym(b, l)] + dg[b][sym(a, l)] - dg[l][sym(a, b)]);
                p.gamma[k * 3 + sym(a, b)] = 0.5 * acc;
            }
    return p;
}

struct ChartLayout {
    double s0 = 0.0, hs = 0.0;
    double t0 = 0.0, ht = 0.0;
    int ns = 0, nt = 0;
    bool s_periodic = false;
    int band_lo = 0, band_hi = 0; // inclusive row range carrying reported values
};

inline ChartLayout residual_layout(const ParametricSurface& surf, int n) {
    ChartLayout lay;
    lay.nt = n;
    lay.t0 = 0.0;
    lay.ht = 2.0 * std::numbers::pi / n;
    if (surf.s_periodic()) {
        if (n < 16) throw ConfigError("grid too coarse for the periodic stencils (need >= 16)");
        lay.ns = n;
        lay.s0 = 0.0;
        lay.hs = 2.0 * std::numbers::pi / n;
        lay.s_periodic = true;
        lay.band_lo = 0;
        lay.band_hi = n - 1;
        return lay;
    }
    if (n < 64) throw ConfigError("grid too coarse for the polar chart stencils (need >= 64)");
    const double band_lo_s = std::acos(0.95);
    const double band_hi_s = std::numbers::pi - band_lo_s;
    const int margin = 2 * fd::kGridReach;
    lay.ns = n;
    lay.hs = (band_hi_s - band_lo_s) / (n - 1 - 2 * margin);
    lay.s0 = band_lo_s - margin * lay.hs;
    lay.band_lo = margin;
    lay.band_hi = n - 1 - margin;
    // chart samples may cross the pole (the map is entire in s), but grid
    // nodes themselves must stay strictly inside (0, pi)
    if (!(lay.s0 > 0.0))
        throw ConfigError("grid too coarse: margin rows would reach the coordinate pole");
    return lay;
}

} // namespace detail

/// Fundamental forms and frame data of one chart on a uniform grid.
/// Symmetric 2x2 tensors are stored as (00, 01, 11).
struct ChartTensors {
    int ns = 0, nt = 0;
    double hs = 0.0, ht = 0.0;
    bool s_periodic = false;
    int band_lo = 0, band_hi = 0;
    std::vector<double> s_coord, t_coord;
    detail::TensorGridStore<3> g, ginv, A;
    detail::TensorGridStore<6> gamma;
    detail::TensorGridStore<1> H;
    std::vector<Vec3> nu;

    const Vec3& normal(int i, int j) const { return nu[static_cast<std::size_t>(i) * nt + j]; }
    bool in_band(int i) const { return i >= band_lo && i <= band_hi; }
};

namespace detail {

inline ChartTensors stage1(const ParametricSurface& surf, int chart, const ChartLayout& lay) {
    ChartTensors ct;
    ct.ns = lay.ns;
    ct.nt = lay.nt;
    ct.hs = lay.hs;
    ct.ht = lay.ht;
    ct.s_periodic = lay.s_periodic;
    ct.band_lo = lay.band_lo;
    ct.band_hi = lay.band_hi;
    ct.s_coord.resize(lay.ns);
    ct.t_coord.resize(lay.nt);
    for (int i = 0; i < lay.ns; ++i) ct.s_coord[i] = lay.s0 + i * lay.hs;
    for (int j = 0; j < lay.nt; ++j) ct.t_coord[j] = lay.t0 + j * lay.ht;
    ct.g.resize(lay.ns, lay.nt);
    ct.ginv.resize(lay.ns, lay.nt);
    ct.A.resize(lay.ns, lay.nt);
    ct.gamma.resize(lay.ns, lay.nt);
    ct.H.resize(lay.ns, lay.nt);
    ct.nu.resize(static_cast<std::size_t>(lay.ns) * lay.nt);

    parallel_for(static_cast<std::size_t>(lay.ns), [&](std::size_t rb, std::size_t re) {
        for (std::size_t i = rb; i < re; ++i)
            for (int j = 0; j < lay.nt; ++j) {
                const PointForms p = point_forms(surf, chart, lay.s0 + i * lay.hs,
                                                 lay.t0 + j * lay.ht, lay.hs, lay.ht);
                ct.g.at(i, j) = p.g;
                ct.ginv.at(i, j) = p.ginv;
                ct.A.at(i, j) = p.A;
                ct.gamma.at(i, j) = p.gamma;
                ct.H.at(i, j)[0] = p.H;
                ct.nu[i * lay.nt + j] = p.nu;
            }
    }, 4);
    return ct;
}

template <int NC>
inline TensorGridStore<NC> grid_deriv(const TensorGridStore<NC>& in, bool along_s, double h,
                                      bool s_periodic) {
    TensorGridStore<NC> out;
    out.resize(in.ns, in.nt);
    const int R = fd::kGridReach;
    const double* stencil = fd::kD1_6;
    parallel_for(static_cast<std::size_t>(in.ns), [&](std::size_t rb, std::size_t re) {
        for (std::size_t i = rb; i < re; ++i)
            for (int j = 0; j < in.nt; ++j) {
                auto& o = out.at(i, j);
                for (int r = -R; r <= R; ++r) {
                    const double w = stencil[r + R] / h;
                    if (w == 0.0) continue;
                    int ii = static_cast<int>(i), jj = j;
                    if (along_s) {
                        ii += r;
                        if (s_periodic)
                            ii = (ii % in.ns + in.ns) % in.ns;
                        else if (ii < 0 || ii >= in.ns)
                            continue; // partial rows are never read inside the band
                    } else {
                        jj = ((j + r) % in.nt + in.nt) % in.nt;
                    }
                    const auto& src = in.at(ii, jj);
                    for (int c = 0; c < NC; ++c) o[c] += w * src[c];
                }
            }
    }, 16);
    return out;
}

/// nabla_k A_ij = d_k A_ij - Gamma^m_ki A_mj - Gamma^m_kj A_im, at k*3 + sym(i,j).
inline TensorGridStore<6> covariant_dA(const ChartTensors& ct) {
    const auto dAs = grid_deriv(ct.A, true, ct.hs, ct.s_periodic);
    const auto dAt = grid_deriv(ct.A, false, ct.ht, true);
    TensorGridStore<6> T;
    T.resize(ct.ns, ct.nt);
    parallel_for(static_cast<std::size_t>(ct.ns), [&](std::size_t rb, std::size_t re) {
        for (std::size_t i = rb; i < re; ++i)
            for (int j = 0; j < ct.nt; ++j) {
                const auto& A = ct.A.at(i, j);
                const auto& gam = ct.gamma.at(i, j);
                const std::array<double, 3>* dA[2] = {&dAs.at(i, j), &dAt.at(i, j)};
                auto& out = T.at(i, j);
                for (int k = 0; k < 2; ++k)
                    for (int a = 0; a < 2; ++a)
                        for (int b = a; b < 2; ++b) {
                            double v = (*dA[k])[sym(a, b)];
                            for (int m = 0; m < 2; ++m) {
                                v -= gam[m * 3 + sym(k, a)] * A[sym(m, b)];
                                v -= gam[m * 3 + sym(k, b)] * A[sym(a, m)];
                            }
                            out[k * 3 + sym(a, b)] = v;
                        }
            }
    }, 16);
    return T;
}

/// Rough Laplacian of A: g^{kl} nabla_k nabla_l A_ij.
inline TensorGridStore<3> laplace_A(const ChartTensors& ct, const TensorGridStore<6>& T) {
    const auto dTs = grid_deriv(T, true, ct.hs, ct.s_periodic);
    const auto dTt = grid_deriv(T, false, ct.ht, true);
    TensorGridStore<3> out;
    out.resize(ct.ns, ct.nt);
    parallel_for(static_cast<std::size_t>(ct.ns), [&](std::size_t rb, std::size_t re) {
        for (std::size_t i = rb; i < re; ++i)
            for (int j = 0; j < ct.nt; ++j) {
                const auto& gam = ct.gamma.at(i, j);
                const auto& gi = ct.ginv.at(i, j);
                const auto& Tij = T.at(i, j);
                const std::array<double, 6>* dT[2] = {&dTs.at(i, j), &dTt.at(i, j)};
                for (int a = 0; a < 2; ++a)
                    for (int b = a; b < 2; ++b) {
                        double acc = 0.0;
                        for (int k = 0; k < 2; ++k)
                            for (int l = 0; l < 2; ++l) {
                                double u = (*dT[k])[l * 3 + sym(a, b)];
                                for (int m = 0; m < 2; ++m) {
                                    u -= gam[m * 3 + sym(k, l)] * Tij[m * 3 + sym(a, b)];
                                    u -= gam[m * 3 + sym(k, a)] * Tij[l * 3 + sym(m, b)];
                                    u -= gam[m * 3 + sym(k, b)] * Tij[l * 3 + sym(a, m)];
                                }
                                acc += gi[sym(k, l)] * u;
                            }
                        out.at(i, j)[sym(a, b)] = acc;
                    }
            }
    }, 16);
    return out;
}

/// Covariant Hessian of H, full 2x2 (antisymmetric part is a consistency
/// check: for a scalar it must vanish to FD tolerance).
inline TensorGridStore<4> hessian_H(const ChartTensors& ct) {
    const auto dHs = grid_deriv(ct.H, true, ct.hs, ct.s_periodic);
    const auto dHt = grid_deriv(ct.H, false, ct.ht, true);
    TensorGridStore<2> dH;
    dH.resize(ct.ns, ct.nt);
    for (int i = 0; i < ct.ns; ++i)
        for (int j = 0; j < ct.nt; ++j) dH.at(i, j) = {dHs.at(i, j)[0], dHt.at(i, j)[0]};
    const auto ddHs = grid_deriv(dH, true, ct.hs, ct.s_periodic);
    const auto ddHt = grid_deriv(dH, false, ct.ht, true);
    TensorGridStore<4> out;
    out.resize(ct.ns, ct.nt);
    for (int i = 0; i < ct.ns; ++i)
        for (int j = 0; j < ct.nt; ++j) {
            const auto& gam = ct.gamma.at(i, j);
            const std::array<double, 2>* dd[2] = {&ddHs.at(i, j), &ddHt.at(i, j)};
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) {
                    double v = (*dd[a])[b];
                    for (int k = 0; k < 2; ++k) v -= gam[k * 3 + sym(a, b)] * dH.at(i, j)[k];
                    out.at(i, j)[a * 2 + b] = v;
                }
        }
    return out;
}

} // namespace detail

inline std::vector<ChartTensors> fundamental_forms(const ParametricSurface& surf, int grid_n) {
    std::vector<ChartTensors> charts;
    for (int c = 0; c < surf.chart_count(); ++c)
        charts.push_back(detail::stage1(surf, c, detail::residual_layout(surf, grid_n)));
    return charts;
}

namespace detail {

template <class Visit>
inline void for_band(const ChartTensors& ct, const Visit& visit) {
    for (int i = ct.band_lo; i <= ct.band_hi; ++i)
        for (int j = 0; j < ct.nt; ++j) visit(i, j);
}

} // namespace detail

/// max over the grid and index triples of |nabla_i A_jk - nabla_j A_ik|.
inline double codazzi_residual(const ParametricSurface& surf, int grid_n) {
    double worst = 0.0;
    for (int c = 0; c < surf.chart_count(); ++c) {
        const ChartTensors ct = detail::stage1(surf, c, detail::residual_layout(surf, grid_n));
        const auto T = detail::covariant_dA(ct);
        detail::for_band(ct, [&](int i, int j) {
            const auto& t = T.at(i, j);
            // independent antisymmetric combinations (0,1,k), k = 0,1
            worst = std::max(worst, std::abs(t[0 * 3 + detail::sym(1, 0)] - t[1 * 3 + detail::sym(0, 0)]));
            worst = std::max(worst, std::abs(t[0 * 3 + detail::sym(1, 1)] - t[1 * 3 + detail::sym(0, 1)]));
        });
    }
    return worst;
}

namespace detail {

inline double simons_gap(const ChartTensors& ct, const TensorGridStore<3>& lapA,
                         const TensorGridStore<4>& hessH, int i, int j, int a, int b) {
    const auto& A = ct.A.at(i, j);
    const auto& gi = ct.ginv.at(i, j);
    const double H = ct.H.at(i, j)[0];
    // (A g^-1 A)_ab
    double aga = 0.0;
    for (int l = 0; l < 2; ++l)
        for (int m = 0; m < 2; ++m) aga += A[sym(a, l)] * gi[sym(l, m)] * A[sym(m, b)];
    double a2 = 0.0; // |A|^2
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l)
            for (int m = 0; m < 2; ++m)
                for (int q = 0; q < 2; ++q)
                    a2 += gi[sym(k, l)] * gi[sym(m, q)] * A[sym(k, m)] * A[sym(l, q)];
    const double hess_sym = 0.5 * (hessH.at(i, j)[a * 2 + b] + hessH.at(i, j)[b * 2 + a]);
    return lapA.at(i, j)[sym(a, b)] - (hess_sym + H * aga - a2 * A[sym(a, b)]);
}

} // namespace detail

/// max-norm of Delta A - (Hess H + H A g^-1 A - |A|^2 A) over the grid.
inline double simons_residual(const ParametricSurface& surf, int grid_n) {
    double worst = 0.0;
    for (int c = 0; c < surf.chart_count(); ++c) {
        const ChartTensors ct = detail::stage1(surf, c, detail::residual_layout(surf, grid_n));
        const auto T = detail::covariant_dA(ct);
        const auto lapA = detail::laplace_A(ct, T);
        const auto hessH = detail::hessian_H(ct);
        detail::for_band(ct, [&](int i, int j) {
            for (int a = 0; a < 2; ++a)
                for (int b = a; b < 2; ++b)
                    worst = std::max(worst,
                                     std::abs(detail::simons_gap(ct, lapA, hessH, i, j, a, b)));
        });
    }
    return worst;
}

/// Largest antisymmetric part of the covariant Hessian of H; a scalar has a
/// symmetric Hessian, so this is pure discretization noise.
inline double hessian_H_antisymmetry(const ParametricSurface& surf, int grid_n) {
    double worst = 0.0;
    for (int c = 0; c < surf.chart_count(); ++c) {
        const ChartTensors ct = detail::stage1(surf, c, detail::residual_layout(surf, grid_n));
        const auto hessH = detail::hessian_H(ct);
        detail::for_band(ct, [&](int i, int j) {
            worst = std::max(worst, std::abs(hessH.at(i, j)[1] - hessH.at(i, j)[2]));
        });
    }
    return worst;
}

/// One half the integral of |A|^2, by quadrature on the chart: periodic
/// trapezoid where the chart is periodic, midpoint rows across polar
/// directions (nodes never touch the coordinate poles).
inline double willmore_energy_exact(const ParametricSurface& surf, int grid_n = 256) {
    const double tau = 2.0 * std::numbers::pi;
    const int nt = grid_n;
    const double ht = tau / nt;
    if (surf.s_periodic()) {
        const int ns = grid_n;
        const double hs = tau / ns;
        std::vector<double> row(ns, 0.0);
        parallel_for(static_cast<std::size_t>(ns), [&](std::size_t rb, std::size_t re) {
            for (std::size_t i = rb; i < re; ++i) {
                double acc = 0.0;
                for (int j = 0; j < nt; ++j) {
                    const auto p = detail::point_forms(surf, 0, i * hs, j * ht, hs, ht);
                    acc += p.norm_A_sq * p.sqrt_det;
                }
                row[i] = acc;
            }
        }, 4);
        return 0.5 * chunked_sum(row.size(), [&](std::size_t i) { return row[i]; }) * hs * ht;
    }
    // single polar chart, midpoint in s over (0, pi)
    const int ns = grid_n;
    const double hs = std::numbers::pi / ns;
    std::vector<double> row(ns, 0.0);
    parallel_for(static_cast<std::size_t>(ns), [&](std::size_t rb, std::size_t re) {
        for (std::size_t i = rb; i < re; ++i) {
            const double s = (i + 0.5) * hs;
            double acc = 0.0;
            for (int j = 0; j < nt; ++j) {
                const auto p = detail::point_forms(surf, 0, s, j * ht, hs, ht);
                acc += p.norm_A_sq * p.sqrt_det;
            }
            row[i] = acc;
        }
    }, 4);
    return 0.5 * chunked_sum(row.size(), [&](std::size_t i) { return row[i]; }) * hs * ht;
}

enum class ResidualKind { Codazzi, Simons };

/// CSV dump of a residual grid for plotting: columns u, v, residual.
inline void dump_residual_csv(const ParametricSurface& surf, int grid_n, ResidualKind kind,
                              std::ostream& out) {
    out << "u,v,residual\n";
    for (int c = 0; c < surf.chart_count(); ++c) {
        const ChartTensors ct = detail::stage1(surf, c, detail::residual_layout(surf, grid_n));
        const auto T = detail::covariant_dA(ct);
        detail::TensorGridStore<3> lapA;
        detail::TensorGridStore<4> hessH;
        if (kind == ResidualKind::Simons) {
            lapA = detail::laplace_A(ct, T);
            hessH = detail::hessian_H(ct);
        }
        detail::for_band(ct, [&](int i, int j) {
            double r = 0.0;
            if (kind == ResidualKind::Codazzi) {
                r = std::max(std::abs(T.at(i, j)[1] - T.at(i, j)[3]),
                             std::abs(T.at(i, j)[2] - T.at(i, j)[4]));
            } else {
                for (int a = 0; a < 2; ++a)
                    for (int b = a; b < 2; ++b)
                        r = std::max(r, std::abs(detail::simons_gap(ct, lapA, hessH, i, j, a, b)));
            }
            out << format_double(ct.s_coord[i]) << ',' << format_double(ct.t_coord[j]) << ','
                << format_double(r) << '\n';
        });
    }
}

} // namespace curvflow
