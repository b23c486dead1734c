#pragma once

#include <cmath>
#include <numbers>
#include <ostream>
#include <random>
#include <string>

#include "curvflow/diffgeo.hpp"

namespace curvflow {

/// Surface area of the unit m-sphere embedded in R^{m+1}.
inline double unit_sphere_area(int m) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * (m + 1)) / std::tgamma(0.5 * (m + 1));
}

/// Axisymmetric test function u(theta) on the round sphere S^n(r), sampled on
/// a uniform grid over [0, pi] (both endpoints included) and supported in the
/// polar cap theta < theta0. Latitudinal smoothness forces u'(0) = 0, which
/// the canonical families satisfy; derivatives use even reflection at the
/// poles accordingly.
struct LatitudinalFunction {
    int n = 2;
    double radius = 1.0;
    double theta0 = std::numbers::pi;
    std::vector<double> samples;

    int intervals() const { return static_cast<int>(samples.size()) - 1; }
    double spacing() const { return std::numbers::pi / intervals(); }
    double theta(int i) const { return spacing() * i; }

    template <class Profile>
    static LatitudinalFunction from_profile(int n, double radius, double theta0, int grid,
                                            const Profile& profile) {
        if (n < 2) throw ConfigError("sphere dimension must be >= 2");
        if (!(radius > 0.0)) throw ConfigError("sphere radius must be positive");
        if (!(theta0 > 0.0) || theta0 > std::numbers::pi)
            throw ConfigError("support cap angle must lie in (0, pi]");
        if (grid < 256) throw ConfigError("latitudinal grid resolution must be >= 256");
        if (grid % 2 != 0) throw ConfigError("latitudinal grid resolution must be even");
        LatitudinalFunction fn;
        fn.n = n;
        fn.radius = radius;
        fn.theta0 = theta0;
        fn.samples.resize(grid + 1);
        // theta0 == pi means full-sphere support: the "cap complement" is just
        // the antipode, so no sample is zeroed
        const bool full = theta0 >= std::numbers::pi;
        for (int i = 0; i <= grid; ++i) {
            const double th = std::numbers::pi * i / grid;
            fn.samples[i] = (full || th < theta0) ? profile(th) : 0.0;
            if (!std::isfinite(fn.samples[i]))
                throw ConfigError("latitudinal profile produced a non-finite sample");
        }
        return fn;
    }

    /// Canonical cap family: exp(1 - 1/(1 - (theta/theta0)^2)) inside the cap.
    static LatitudinalFunction bump(int n, double radius, double theta0, int grid) {
        return from_profile(n, radius, theta0, grid, [&](double th) {
            const double x = th / theta0;
            return std::exp(1.0 - 1.0 / (1.0 - x * x));
        });
    }

    /// Bump times an even polynomial 1 + c1 (theta/theta0)^2 + c2 (theta/theta0)^4
    /// (even, so the pole regularity u'(0) = 0 is preserved).
    static LatitudinalFunction bump_poly(int n, double radius, double theta0, int grid, double c1,
                                         double c2) {
        return from_profile(n, radius, theta0, grid, [&](double th) {
            const double x = th / theta0;
            const double x2 = x * x;
            return std::exp(1.0 - 1.0 / (1.0 - x2)) * (1.0 + c1 * x2 + c2 * x2 * x2);
        });
    }

    static LatitudinalFunction constant(int n, double radius, double value, int grid) {
        return from_profile(n, radius, std::numbers::pi, grid, [&](double) { return value; });
    }

    // 4th-order centered differences with even reflection at both poles.
    double deriv1(int i) const {
        const int N = intervals();
        auto at = [&](int k) {
            if (k < 0) k = -k;
            if (k > N) k = 2 * N - k;
            return samples[k];
        };
        return (at(i - 2) - 8.0 * at(i - 1) + 8.0 * at(i + 1) - at(i + 2)) / (12.0 * spacing());
    }
    double deriv2(int i) const {
        const int N = intervals();
        auto at = [&](int k) {
            if (k < 0) k = -k;
            if (k > N) k = 2 * N - k;
            return samples[k];
        };
        return (-at(i - 2) + 16.0 * at(i - 1) - 30.0 * at(i) + 16.0 * at(i + 1) - at(i + 2)) /
               (12.0 * spacing() * spacing());
    }
};

namespace detail {

/// Composite Simpson over [0, pi] of integrand(i) * r^n sin^{n-1}(theta) *
/// area(S^{n-1}); the measure factor kills both endpoints, which sidesteps the
/// cot(theta) singularity of Hessian integrands at the poles.
template <class Integrand>
inline double sphere_quadrature(const LatitudinalFunction& fn, const Integrand& integrand) {
    const int N = fn.intervals();
    const double h = fn.spacing();
    const double weight = unit_sphere_area(fn.n - 1) * std::pow(fn.radius, fn.n);
    auto value = [&](int i) {
        if (i == 0 || i == N) return 0.0;
        const double s = std::sin(fn.theta(i));
        return integrand(i) * std::pow(s, fn.n - 1);
    };
    double acc = 0.0;
    for (int i = 1; i < N; i += 2) acc += 4.0 * value(i);
    for (int i = 2; i < N; i += 2) acc += 2.0 * value(i);
    return weight * acc * h / 3.0;
}

/// Smooth 1-D cap integral int_0^cap sin^{n-1}, dense Simpson.
inline double cap_profile_integral(double cap, int n) {
    const int N = 4096;
    const double h = cap / N;
    double acc = std::pow(std::sin(0.0), n - 1) + std::pow(std::sin(cap), n - 1);
    for (int i = 1; i < N; ++i)
        acc += (i % 2 ? 4.0 : 2.0) * std::pow(std::sin(i * h), n - 1);
    return acc * h / 3.0;
}

} // namespace detail

/// The norm ingredients of the inequality checks:
///   lp_integrals[k]   = int |u|^{p_k} dmu
///   grad_l1, grad_l2_sq, hess_l2_sq = int |grad u|, |grad u|^2, |Hess u|^2 dmu
///   h_n_support       = int_{supp u} |H|^n dmu = (n/r)^n * cap volume
/// For a latitudinal u the Hessian eigenvalues are u''/r^2 (once) and
/// cot(theta) u'/r^2 (multiplicity n-1).
struct SphereIntegrals {
    std::vector<double> lp_integrals;
    double grad_l1 = 0.0;
    double grad_l2_sq = 0.0;
    double hess_l2_sq = 0.0;
    double h_n_support = 0.0;
};

inline SphereIntegrals sphere_integrals(const LatitudinalFunction& fn,
                                        const std::vector<double>& p_list) {
    SphereIntegrals out;
    const double r = fn.radius;
    for (double p : p_list)
        out.lp_integrals.push_back(detail::sphere_quadrature(
            fn, [&](int i) { return std::pow(std::abs(fn.samples[i]), p); }));
    out.grad_l1 =
        detail::sphere_quadrature(fn, [&](int i) { return std::abs(fn.deriv1(i)) / r; });
    out.grad_l2_sq = detail::sphere_quadrature(fn, [&](int i) {
        const double d = fn.deriv1(i) / r;
        return d * d;
    });
    out.hess_l2_sq = detail::sphere_quadrature(fn, [&](int i) {
        const double radial = fn.deriv2(i) / (r * r);
        const double lat = std::cos(fn.theta(i)) / std::sin(fn.theta(i)) * fn.deriv1(i) / (r * r);
        return radial * radial + (fn.n - 1) * lat * lat;
    });
    out.h_n_support = std::pow(static_cast<double>(fn.n) / r, fn.n) * unit_sphere_area(fn.n - 1) *
                      std::pow(r, fn.n) * detail::cap_profile_integral(fn.theta0, fn.n);
    return out;
}

/// One verified inequality instance. `ratio` = LHS / (RHS without the unknown
/// constant). When the RHS degenerates to zero the ratio is left NaN and the
/// hypothesis flag is cleared instead of reporting an infinity.
struct InequalityResult {
    std::string inequality_id;
    int n = 0;
    double family_param = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double h_smallness = 0.0; // int_{supp u} |H|^n
    bool hypothesis_ok = false;
};

namespace detail {

inline void finish_result(InequalityResult& res, double eps_threshold) {
    constexpr double kRhsFloor = 1e-300;
    if (res.rhs < kRhsFloor) {
        res.hypothesis_ok = false;
        return;
    }
    res.ratio = res.lhs / res.rhs;
    res.hypothesis_ok = res.h_smallness <= eps_threshold;
}

} // namespace detail

/// Michael-Simon Sobolev ratio: (int |u|^{pn/(n-p)})^{(n-p)/n} against
/// int (|grad u|^p + |H|^p |u|^p). p = 1 is the base inequality, 1 < p < n
/// the power variant.
inline InequalityResult check_ms(const LatitudinalFunction& fn, double p, double eps_threshold) {
    if (!(p >= 1.0) || !(p < fn.n)) throw ConfigError("check_ms requires 1 <= p < n");
    const double q = p * fn.n / (fn.n - p);
    const SphereIntegrals ints = sphere_integrals(fn, {q, p});
    InequalityResult res;
    res.inequality_id = (p == 1.0) ? "MS-p1" : "MS-p";
    res.n = fn.n;
    res.family_param = fn.theta0;
    res.lhs = std::pow(ints.lp_integrals[0], (fn.n - p) / fn.n);
    const double grad_lp =
        (p == 1.0) ? ints.grad_l1
        : (p == 2.0)
            ? ints.grad_l2_sq
            : detail::sphere_quadrature(
                  fn, [&](int i) { return std::pow(std::abs(fn.deriv1(i)) / fn.radius, p); });
    const double habs = static_cast<double>(fn.n) / fn.radius;
    res.rhs = grad_lp + std::pow(habs, p) * ints.lp_integrals[1];
    res.h_smallness = ints.h_n_support;
    detail::finish_result(res, eps_threshold);
    return res;
}

/// n=4 interpolation ratio: int u^4 against int |Hess u|^2 * int u^2.
inline InequalityResult check_gn1(const LatitudinalFunction& fn, double eps_threshold) {
    if (fn.n != 4) throw ConfigError("check_gn1 is the n=4 inequality");
    const SphereIntegrals ints = sphere_integrals(fn, {4.0, 2.0});
    InequalityResult res;
    res.inequality_id = "GN1";
    res.n = 4;
    res.family_param = fn.theta0;
    res.lhs = ints.lp_integrals[0];
    res.rhs = ints.hess_l2_sq * ints.lp_integrals[1];
    res.h_smallness = ints.h_n_support;
    detail::finish_result(res, eps_threshold);
    return res;
}

/// n=5 interpolation ratio: (int |u|^5)^{1/5} against
/// (int |Hess u|^2)^{3/8} (int u^2)^{1/8}.
inline InequalityResult check_gn2(const LatitudinalFunction& fn, double eps_threshold) {
    if (fn.n != 5) throw ConfigError("check_gn2 is the n=5 inequality");
    const SphereIntegrals ints = sphere_integrals(fn, {5.0, 2.0});
    InequalityResult res;
    res.inequality_id = "GN2";
    res.n = 5;
    res.family_param = fn.theta0;
    res.lhs = std::pow(ints.lp_integrals[0], 0.2);
    res.rhs = std::pow(ints.hess_l2_sq, 0.375) * std::pow(ints.lp_integrals[1], 0.125);
    res.h_smallness = ints.h_n_support;
    detail::finish_result(res, eps_threshold);
    return res;
}

/// ||v||_{L^n} against ||v||_{L^2}^{1-sigma} ||grad^m v||_{L^2}^{sigma} with
/// m = floor(n/2) and sigma = (n-2)/(2m); n in {3,4,5} keeps m <= 2.
inline InequalityResult check_gne(const LatitudinalFunction& fn, double eps_threshold) {
    if (fn.n < 3 || fn.n > 5) throw ConfigError("check_gne covers n in {3,4,5}");
    const int m = fn.n / 2;
    const double sigma = (fn.n - 2.0) / (2.0 * m);
    const SphereIntegrals ints = sphere_integrals(fn, {static_cast<double>(fn.n), 2.0});
    InequalityResult res;
    res.inequality_id = "GNe";
    res.n = fn.n;
    res.family_param = fn.theta0;
    res.lhs = std::pow(ints.lp_integrals[0], 1.0 / fn.n);
    const double high = (m == 1) ? ints.grad_l2_sq : ints.hess_l2_sq;
    res.rhs = std::pow(ints.lp_integrals[1], 0.5 * (1.0 - sigma)) * std::pow(high, 0.5 * sigma);
    res.h_smallness = ints.h_n_support;
    detail::finish_result(res, eps_threshold);
    return res;
}

/// Mesh-side Michael-Simon check (n = 2): enables the inequality on
/// non-symmetric geometries with the discrete gradient and curvature.
inline InequalityResult check_ms_on_mesh(const Mesh& mesh, const CurvatureField& cf,
                                         const VertexScalarField& u, double p,
                                         double eps_threshold) {
    if (!(p >= 1.0) || !(p < 2.0)) throw ConfigError("mesh check requires 1 <= p < 2");
    if (u.size() != cf.area.size()) throw OperatorError("field length mismatch");
    const VertexVectorField grad = gradient(mesh, u);
    const double q = 2.0 * p / (2.0 - p);
    const std::size_t nv = u.size();
    const double lq = chunked_sum(nv, [&](std::size_t i) {
        return std::pow(std::abs(u[i]), q) * cf.area[i];
    });
    const double rhs = chunked_sum(nv, [&](std::size_t i) {
        return (std::pow(grad[i].norm(), p) + std::pow(std::abs(cf.H[i]), p) * std::pow(std::abs(u[i]), p)) *
               cf.area[i];
    });
    InequalityResult res;
    res.inequality_id = (p == 1.0) ? "MS-p1" : "MS-p";
    res.n = 2;
    res.family_param = 0.0;
    res.lhs = std::pow(lq, (2.0 - p) / 2.0);
    res.rhs = rhs;
    res.h_smallness = chunked_sum(nv, [&](std::size_t i) {
        return (u[i] != 0.0) ? cf.H[i] * cf.H[i] * cf.area[i] : 0.0;
    });
    detail::finish_result(res, eps_threshold);
    return res;
}

enum class InequalityKind { MS, GN1, GN2, GNe };

inline const char* to_string(InequalityKind k) {
    switch (k) {
    case InequalityKind::MS: return "MS";
    case InequalityKind::GN1: return "GN1";
    case InequalityKind::GN2: return "GN2";
    case InequalityKind::GNe: return "GNe";
    }
    return "?";
}

struct FamilyConfig {
    int n = 4;
    double radius = 1.0;
    int grid = 512;
    std::vector<double> cap_angles = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    double eps = 1e4;        // smallness threshold on int_{supp} |H|^n
    double ms_p = 1.0;       // exponent for MS families
    std::uint64_t seed = 42; // perturbation coefficients
    int perturbations = 2;   // perturbed bumps added per cap angle
};

struct FamilyReport {
    std::string inequality_id;
    std::vector<InequalityResult> rows;
    double sup_ratio = std::numeric_limits<double>::quiet_NaN();
    double refined_sup_ratio = std::numeric_limits<double>::quiet_NaN();
    double refinement_delta = std::numeric_limits<double>::quiet_NaN();
};

inline InequalityResult check_inequality(InequalityKind kind, const LatitudinalFunction& fn,
                                         const FamilyConfig& cfg) {
    switch (kind) {
    case InequalityKind::MS: return check_ms(fn, cfg.ms_p, cfg.eps);
    case InequalityKind::GN1: return check_gn1(fn, cfg.eps);
    case InequalityKind::GN2: return check_gn2(fn, cfg.eps);
    case InequalityKind::GNe: return check_gne(fn, cfg.eps);
    }
    throw ConfigError("unknown inequality kind");
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53; // platform-stable
}

inline double family_sup(InequalityKind kind, const FamilyConfig& cfg, int grid,
                         std::vector<InequalityResult>* rows) {
    std::mt19937_64 rng(cfg.seed);
    double sup = std::numeric_limits<double>::quiet_NaN();
    for (double cap : cfg.cap_angles) {
        for (int variant = 0; variant <= cfg.perturbations; ++variant) {
            LatitudinalFunction fn =
                (variant == 0)
                    ? LatitudinalFunction::bump(cfg.n, cfg.radius, cap, grid)
                    : LatitudinalFunction::bump_poly(cfg.n, cfg.radius, cap, grid,
                                                     0.8 * uniform01(rng) - 0.4,
                                                     0.8 * uniform01(rng) - 0.4);
            InequalityResult res = check_inequality(kind, fn, cfg);
            res.family_param = cap;
            if (res.hypothesis_ok && (!(res.ratio <= sup))) sup = res.ratio;
            if (rows) rows->push_back(std::move(res));
        }
    }
    return sup;
}

} // namespace detail

/// Sweeps the cap-bump family (plus seeded perturbed variants), aggregates
/// the sup ratio over hypothesis-satisfying members and measures its
/// stability under one grid doubling.
inline FamilyReport run_family(InequalityKind kind, const FamilyConfig& cfg) {
    FamilyReport rep;
    rep.inequality_id = to_string(kind);
    rep.sup_ratio = detail::family_sup(kind, cfg, cfg.grid, &rep.rows);
    rep.refined_sup_ratio = detail::family_sup(kind, cfg, 2 * cfg.grid, nullptr);
    if (std::isfinite(rep.sup_ratio) && rep.sup_ratio > 0.0)
        rep.refinement_delta = std::abs(rep.sup_ratio - rep.refined_sup_ratio) / rep.sup_ratio;
    return rep;
}

inline void write_inequality_csv_header(std::ostream& out) {
    out << "inequality_id,n,family_param,lhs,rhs,ratio,h_smallness,hypothesis_ok\n";
}

inline void write_inequality_csv_row(std::ostream& out, const InequalityResult& r) {
    out << r.inequality_id << ',' << r.n << ',' << format_double(r.family_param) << ','
        << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.ratio)
        << ',' << format_double(r.h_smallness) << ',' << (r.hypothesis_ok ? "true" : "false")
        << '\n';
}

inline void print_family_summary(std::ostream& out, const FamilyReport& rep) {
    out << rep.inequality_id << ": members=" << rep.rows.size()
        << " sup_ratio=" << format_double(rep.sup_ratio)
        << " refined=" << format_double(rep.refined_sup_ratio)
        << " delta=" << format_double(rep.refinement_delta) << "\n";
}

} // namespace curvflow
