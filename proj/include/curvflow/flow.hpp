#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <utility>

#include "curvflow/diagnostics.hpp"

namespace curvflow {

enum class FlowKind { Biharmonic, Willmore };
enum class Stepper { ExplicitEuler, SemiImplicit };
enum class FlowStatus { Running, ReachedTEnd, Extinction, ConcentrationExceeded, NumericalFailure };

inline const char* to_string(FlowStatus s) {
    switch (s) {
    case FlowStatus::Running: return "running";
    case FlowStatus::ReachedTEnd: return "reached_t_end";
    case FlowStatus::Extinction: return "extinction";
    case FlowStatus::ConcentrationExceeded: return "concentration_exceeded";
    case FlowStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

struct FlowConfig {
    FlowKind kind = FlowKind::Biharmonic;
    bool include_tangential = false; // biharmonic only; the Willmore velocity is purely normal
    Stepper stepper = Stepper::ExplicitEuler;
    double dt_safety = 0.02;   // c_dt in (0,1]; dt = c_dt * h_min^4
    double t_end = 0.0;        // <= 0: no time limit (run to extinction or step budget)
    long max_steps = 1000000;
    double concentration_radius = 1.0;
    double concentration_threshold = 1e30; // kappa_max above this halts the run
    int concentration_centers = 256;       // candidate centers per monitor pass; 0 = all vertices
    int snapshot_cadence = 1000;           // steps between diagnostics records

    void validate() const {
        if (!(dt_safety > 0.0) || dt_safety > 1.0)
            throw ConfigError("dt_safety must lie in (0, 1]");
        if (!(concentration_radius > 0.0))
            throw ConfigError("concentration_radius must be positive");
        if (!(concentration_threshold > 0.0))
            throw ConfigError("concentration_threshold must be positive");
        if (max_steps < 0) throw ConfigError("max_steps must be nonnegative");
        if (snapshot_cadence < 1) throw ConfigError("snapshot_cadence must be >= 1");
        if (concentration_centers < 0) throw ConfigError("concentration_centers must be >= 0");
        if (include_tangential && kind == FlowKind::Willmore)
            throw ConfigError("the Willmore flow has no tangential term");
    }
};

// Pointwise velocity formulas; the mesh assembly below feeds these the
// discrete operator values, and tests feed them analytic ones.
inline double biharmonic_velocity_scalar(double lap_H, double H, double norm_A_sq) {
    return -(lap_H - H * norm_A_sq);
}
inline double willmore_velocity_scalar(double lap_H, double H, double norm_A_sq, double cubic_A) {
    return -(lap_H - 0.5 * norm_A_sq * H + cubic_A);
}

struct BiharmonicVelocity {
    VertexScalarField F; // normal speed
    VertexVectorField W; // tangential velocity, zero unless requested
};

/// F = -(Delta H - H |A|^2), W = 2 S(grad H) + H grad H. The tangential part
/// needs the fitted shape operator; pass include_tangential = false to skip it.
inline BiharmonicVelocity biharmonic_velocity(const Mesh& mesh, const CurvatureField& cf,
                                              bool include_tangential) {
    const Adjacency adj = Adjacency::build(mesh);
    const FaceGeometry fg = FaceGeometry::compute(mesh);
    const VertexScalarField lap_H = laplace_beltrami(mesh, adj, fg, cf.area, cf.H);
    const int nv = mesh.vertex_count();
    BiharmonicVelocity vel;
    vel.F.resize(nv);
    for (int i = 0; i < nv; ++i)
        vel.F[i] = biharmonic_velocity_scalar(lap_H[i], cf.H[i], cf.norm_A_sq[i]);
    if (include_tangential) {
        const VertexVectorField grad_H = gradient(mesh, adj, fg, cf.normal, cf.H);
        const VertexVectorField s_grad = shape_apply(cf, grad_H);
        vel.W.resize(nv);
        for (int i = 0; i < nv; ++i) vel.W[i] = 2.0 * s_grad[i] + cf.H[i] * grad_H[i];
    } else {
        vel.W.assign(nv, Vec3::Zero());
    }
    return vel;
}

/// F = -(Delta H - |A|^2 H / 2 + C(A)); purely normal.
inline VertexScalarField willmore_velocity(const Mesh& mesh, const CurvatureField& cf) {
    const Adjacency adj = Adjacency::build(mesh);
    const FaceGeometry fg = FaceGeometry::compute(mesh);
    const VertexScalarField lap_H = laplace_beltrami(mesh, adj, fg, cf.area, cf.H);
    const int nv = mesh.vertex_count();
    VertexScalarField F(nv);
    for (int i = 0; i < nv; ++i)
        F[i] = willmore_velocity_scalar(lap_H[i], cf.H[i], cf.norm_A_sq[i], cf.cubic_A[i]);
    return F;
}

/// Closed-form reduction of both flows on round spheres S^n(r). Under the
/// outward-normal convention H = -n/r, |A|^2 = n/r^2, C(A) = -n/r^3, so
///   biharmonic: dr/dt = -n^2/r^3          => r(t) = (r0^4 - 4 n^2 t)^{1/4}
///   Willmore:   dr/dt = -n(n-2)/(2 r^3)   => r(t) = (r0^4 - 2 n(n-2) t)^{1/4}
/// The n=2 sphere is Willmore-stationary.
struct SphereOde {
    int dimension = 2;
    double initial_radius = 1.0;
    FlowKind kind = FlowKind::Biharmonic;
};

inline double sphere_ode_extinction_time(const SphereOde& ode) {
    if (ode.dimension < 2) throw ConfigError("sphere dimension must be >= 2");
    if (!(ode.initial_radius > 0.0)) throw ConfigError("sphere radius must be positive");
    const double n = ode.dimension;
    const double r4 = std::pow(ode.initial_radius, 4);
    if (ode.kind == FlowKind::Biharmonic) return r4 / (4.0 * n * n);
    if (ode.dimension == 2) return std::numeric_limits<double>::infinity();
    return r4 / (2.0 * n * (n - 2.0));
}

inline double sphere_ode_radius(const SphereOde& ode, double t) {
    if (t < 0.0) throw ConfigError("time must be nonnegative");
    const double t_ext = sphere_ode_extinction_time(ode);
    if (t >= t_ext) throw ConfigError("time at or beyond the extinction time");
    const double n = ode.dimension;
    const double r4 = std::pow(ode.initial_radius, 4);
    const double shrink = (ode.kind == FlowKind::Biharmonic) ? 4.0 * n * n : 2.0 * n * (n - 2.0);
    return std::pow(r4 - shrink * t, 0.25);
}

struct FlowState {
    Mesh mesh;
    double time = 0.0;
    long step_count = 0;
    double last_dt = 0.0;
    VertexScalarField last_F;
    VertexVectorField last_W;
    FlowStatus status = FlowStatus::Running;
    std::string failure_message;
    double initial_min_edge = 0.0;
    double current_min_edge = 0.0;
    std::vector<EnergySample> energy_history; // populated along Willmore runs
    Adjacency adjacency;                      // connectivity never changes across steps
};

inline FlowState make_flow_state(Mesh mesh) {
    require_valid(mesh);
    FlowState st;
    st.adjacency = Adjacency::build(mesh);
    st.mesh = std::move(mesh);
    st.initial_min_edge = st.current_min_edge = min_edge_length(st.mesh);
    return st;
}

// Edges shorter than this fraction of their initial length mean the surface
// has effectively shrunk to a point; the flow is only meaningful before that.
inline constexpr double kExtinctionEdgeFraction = 1e-3;

namespace detail {

inline void semi_implicit_solve(const Mesh& mesh, const FaceGeometry& fg,
                                const std::vector<double>& area, const VertexVectorField& velocity,
                                double dt, std::vector<Vec3>& out_positions) {
    using SpMat = Eigen::SparseMatrix<double>;
    const int nv = mesh.vertex_count();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.faces.size() * 12);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
        const auto& t = mesh.faces[f];
        for (int c = 0; c < 3; ++c) {
            const int i = t[(c + 1) % 3], j = t[(c + 2) % 3];
            const double w = 0.5 * fg.cot[f][c];
            trips.emplace_back(i, j, w);
            trips.emplace_back(j, i, w);
            trips.emplace_back(i, i, -w);
            trips.emplace_back(j, j, -w);
        }
    }
    SpMat W(nv, nv);
    W.setFromTriplets(trips.begin(), trips.end());
    Eigen::VectorXd mass(nv), inv_mass(nv);
    for (int i = 0; i < nv; ++i) {
        mass[i] = area[i];
        inv_mass[i] = 1.0 / area[i];
    }
    // bi-Laplacian implicit, everything else explicit:
    //   (M + dt W M^-1 W) x = M (f + dt (V + L^2 f)),  L = M^-1 W
    std::vector<Eigen::Triplet<double>> mass_trips;
    mass_trips.reserve(nv);
    for (int i = 0; i < nv; ++i) mass_trips.emplace_back(i, i, mass[i]);
    SpMat Mdiag(nv, nv);
    Mdiag.setFromTriplets(mass_trips.begin(), mass_trips.end());
    SpMat A = Mdiag + SpMat(dt * (W * SpMat(inv_mass.asDiagonal() * W)));
    Eigen::SimplicialLDLT<SpMat> solver(A);
    if (solver.info() != Eigen::Success)
        throw SolverError("semi-implicit factorization failed");
    Eigen::VectorXd f(nv), rhs(nv), x(nv);
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < nv; ++i) f[i] = mesh.vertices[i][c];
        Eigen::VectorXd l2f = inv_mass.asDiagonal() * (W * (inv_mass.asDiagonal() * (W * f)));
        for (int i = 0; i < nv; ++i) rhs[i] = mass[i] * (f[i] + dt * (velocity[i][c] + l2f[i]));
        x = solver.solve(rhs);
        if (solver.info() != Eigen::Success) throw SolverError("semi-implicit solve failed");
        for (int i = 0; i < nv; ++i) out_positions[i][c] = x[i];
    }
}

} // namespace detail

/// One time step. Terminated states pass through unchanged. Throws
/// SolverError on semi-implicit solver failure; geometric collapse and
/// non-finite values set the corresponding termination status instead.
inline void step(FlowState& st, const FlowConfig& config) {
    if (st.status != FlowStatus::Running) return;
    const int nv = st.mesh.vertex_count();

    FaceGeometry fg;
    try {
        fg = FaceGeometry::compute(st.mesh);
    } catch (const OperatorError& err) {
        st.status = FlowStatus::NumericalFailure;
        st.failure_message = err.what();
        return;
    }
    st.current_min_edge = min_edge_length(st.mesh);
    if (st.current_min_edge < kExtinctionEdgeFraction * st.initial_min_edge) {
        st.status = FlowStatus::Extinction;
        return;
    }

    const VertexGeometry vg = VertexGeometry::compute(st.mesh, st.adjacency, fg);
    VertexScalarField norm_A_sq(nv);
    for (int i = 0; i < nv; ++i) norm_A_sq[i] = vg.H[i] * vg.H[i] - 2.0 * vg.K[i];
    const VertexScalarField lap_H = laplace_beltrami(st.mesh, st.adjacency, fg, vg.area, vg.H);

    VertexScalarField F(nv);
    if (config.kind == FlowKind::Biharmonic) {
        for (int i = 0; i < nv; ++i)
            F[i] = biharmonic_velocity_scalar(lap_H[i], vg.H[i], norm_A_sq[i]);
    } else {
        for (int i = 0; i < nv; ++i) {
            const double cubic = vg.H[i] * (vg.H[i] * vg.H[i] - 3.0 * vg.K[i]);
            F[i] = willmore_velocity_scalar(lap_H[i], vg.H[i], norm_A_sq[i], cubic);
        }
    }
    VertexVectorField W;
    if (config.kind == FlowKind::Biharmonic && config.include_tangential) {
        const VertexVectorField grad_H = gradient(st.mesh, st.adjacency, fg, vg.normal, vg.H);
        CurvatureField cf = curvature_field(st.mesh, st.adjacency, /*with_shape=*/true);
        const VertexVectorField s_grad = shape_apply(cf, grad_H);
        W.resize(nv);
        for (int i = 0; i < nv; ++i) W[i] = 2.0 * s_grad[i] + vg.H[i] * grad_H[i];
    }

    if (config.kind == FlowKind::Willmore) {
        const double energy = 0.5 * chunked_sum(static_cast<std::size_t>(nv), [&](std::size_t i) {
            return norm_A_sq[i] * vg.area[i];
        });
        const double f_sq = chunked_sum(static_cast<std::size_t>(nv), [&](std::size_t i) {
            return F[i] * F[i] * vg.area[i];
        });
        st.energy_history.push_back({st.time, energy, f_sq});
    }

    const double h = st.current_min_edge;
    double dt = config.dt_safety * h * h * h * h;
    if (config.t_end > 0.0 && st.time + dt > config.t_end) dt = config.t_end - st.time;

    VertexVectorField velocity(nv);
    for (int i = 0; i < nv; ++i) {
        velocity[i] = F[i] * vg.normal[i];
        if (!W.empty()) velocity[i] += W[i];
    }

    bool finite = true;
    if (config.stepper == Stepper::ExplicitEuler) {
        for (int i = 0; i < nv; ++i) {
            st.mesh.vertices[i] += dt * velocity[i];
            finite = finite && st.mesh.vertices[i].allFinite();
        }
    } else {
        VertexVectorField next(nv);
        detail::semi_implicit_solve(st.mesh, fg, vg.area, velocity, dt, next);
        for (int i = 0; i < nv; ++i) finite = finite && next[i].allFinite();
        if (finite) st.mesh.vertices = std::move(next);
    }
    if (!finite) {
        st.status = FlowStatus::NumericalFailure;
        st.failure_message = "non-finite vertex positions";
        return;
    }

    st.time += dt;
    st.last_dt = dt;
    st.last_F = std::move(F);
    st.last_W = std::move(W);
    ++st.step_count;
    if (config.t_end > 0.0 && st.time >= config.t_end * (1.0 - 1e-13))
        st.status = FlowStatus::ReachedTEnd;
}

/// Diagnostics snapshot of the current state (fresh curvature pass).
inline DiagnosticsRecord make_record(const FlowState& st, const FlowConfig& config) {
    const CurvatureField cf = curvature_field(st.mesh, st.adjacency, /*with_shape=*/false);
    DiagnosticsRecord rec;
    rec.time = st.time;
    rec.area = cf.total_area();
    rec.willmore_energy = willmore_energy(st.mesh, cf);
    rec.bienergy = bienergy(st.mesh, cf);
    const ConcentrationMax kappa =
        max_concentration(st.mesh, cf, config.concentration_radius,
                          config.concentration_centers == 0
                              ? CenterSampling::all_vertices()
                              : CenterSampling::vertex_subsample(config.concentration_centers));
    rec.kappa_max = kappa.value;
    rec.kappa_argmax = kappa.argmax;
    rec.h_min = min_edge_length(st.mesh);
    rec.max_F = 0.0;
    for (double f : st.last_F) rec.max_F = std::max(rec.max_F, std::abs(f));
    if (config.kind == FlowKind::Willmore && st.energy_history.size() >= 2) {
        const auto& h = st.energy_history;
        rec.energy_residual =
            energy_identity_residual({h[h.size() - 2], h[h.size() - 1]});
    }
    return rec;
}

/// Iterates step() until termination, emitting a DiagnosticsRecord at step 0,
/// every snapshot_cadence steps, and at the final state. The concentration
/// monitor runs at snapshots only. Deterministic for fixed config and mesh.
inline std::pair<FlowState, std::vector<DiagnosticsRecord>> run(
    Mesh mesh, const FlowConfig& config,
    const std::function<void(const FlowState&, const DiagnosticsRecord&)>& on_snapshot = {}) {
    config.validate();
    FlowState st = make_flow_state(std::move(mesh));
    std::vector<DiagnosticsRecord> records;
    long last_snapshot_step = -1;
    auto snapshot = [&]() {
        const DiagnosticsRecord rec = make_record(st, config);
        if (st.status == FlowStatus::Running && rec.kappa_max > config.concentration_threshold)
            st.status = FlowStatus::ConcentrationExceeded;
        records.push_back(rec);
        last_snapshot_step = st.step_count;
        if (on_snapshot) on_snapshot(st, rec);
    };

    snapshot();
    while (st.status == FlowStatus::Running && st.step_count < config.max_steps) {
        try {
            step(st, config);
        } catch (const SolverError& err) {
            st.status = FlowStatus::NumericalFailure;
            st.failure_message = err.what();
        }
        if (st.status == FlowStatus::Running && st.step_count % config.snapshot_cadence == 0)
            snapshot();
    }
    if (st.status == FlowStatus::Running) st.status = FlowStatus::ReachedTEnd; // step budget
    // no closing record on numerical failure: the mesh may hold non-finite
    // positions that no diagnostic pass can digest
    if (st.status != FlowStatus::NumericalFailure && last_snapshot_step != st.step_count)
        snapshot();
    return {std::move(st), std::move(records)};
}

} // namespace curvflow
