#pragma once

#include <cmath>
#include <numbers>

#include "curvflow/mesh.hpp"

namespace curvflow {

using VertexScalarField = std::vector<double>;
using VertexVectorField = std::vector<Vec3>;

/// Per-face quantities recomputed whenever positions change. Cotangents are
/// taken opposite each corner: cot[c] is the cotangent of the interior angle
/// at vertex faces[f][c]. corner_area holds the mixed Voronoi split of the
/// face area among its corners (circumcentric for non-obtuse triangles,
/// half/quarter split for obtuse ones); the three entries sum to the face
/// area exactly and stay positive.
struct FaceGeometry {
    std::vector<double> area;
    std::vector<Vec3> normal;
    std::vector<std::array<double, 3>> cot;
    std::vector<std::array<double, 3>> angle;
    std::vector<std::array<double, 3>> corner_area;
    double area_floor = 0.0;

    static FaceGeometry compute(const Mesh& mesh) {
        FaceGeometry fg;
        const int nf = mesh.face_count();
        fg.area.resize(nf);
        fg.normal.resize(nf);
        fg.cot.resize(nf);
        fg.angle.resize(nf);
        fg.corner_area.resize(nf);
        const double diag = mesh.bounding_box_diagonal();
        fg.area_floor = kDegenerateAreaFraction * diag * diag;
        std::atomic<int> bad{-1};
        parallel_for(static_cast<std::size_t>(nf), [&](std::size_t b, std::size_t e) {
            for (std::size_t f = b; f < e; ++f) {
                const auto& t = mesh.faces[f];
                const Vec3& p0 = mesh.vertices[t[0]];
                const Vec3& p1 = mesh.vertices[t[1]];
                const Vec3& p2 = mesh.vertices[t[2]];
                const Vec3 cr = (p1 - p0).cross(p2 - p0);
                const double cr_norm = cr.norm();
                const double a = 0.5 * cr_norm;
                fg.area[f] = a;
                if (!(a > fg.area_floor)) {
                    int expected = -1;
                    bad.compare_exchange_strong(expected, static_cast<int>(f));
                    continue;
                }
                fg.normal[f] = cr / cr_norm;
                double edge_sq[3]; // squared length of the edge opposite corner c
                int obtuse_at = -1;
                for (int c = 0; c < 3; ++c) {
                    const Vec3 u = mesh.vertices[t[(c + 1) % 3]] - mesh.vertices[t[c]];
                    const Vec3 v = mesh.vertices[t[(c + 2) % 3]] - mesh.vertices[t[c]];
                    const double dot = u.dot(v);
                    fg.cot[f][c] = dot / cr_norm; // |u x v| equals |cr| in a triangle
                    fg.angle[f][c] = std::atan2(cr_norm, dot);
                    edge_sq[c] =
                        (mesh.vertices[t[(c + 2) % 3]] - mesh.vertices[t[(c + 1) % 3]]).squaredNorm();
                    if (dot < 0.0) obtuse_at = c;
                }
                auto& ca = fg.corner_area[f];
                if (obtuse_at < 0) {
                    for (int c = 0; c < 3; ++c)
                        ca[c] = 0.125 * (edge_sq[(c + 2) % 3] * fg.cot[f][(c + 2) % 3] +
                                         edge_sq[(c + 1) % 3] * fg.cot[f][(c + 1) % 3]);
                } else {
                    for (int c = 0; c < 3; ++c) ca[c] = (c == obtuse_at) ? 0.5 * a : 0.25 * a;
                }
            }
        }, 32768);
        if (bad.load() >= 0)
            throw OperatorError("near-degenerate face " + std::to_string(bad.load()) +
                                " (area below cotangent safety floor)");
        return fg;
    }
};

/// Per-vertex basics shared by every operator: mixed-Voronoi lumped area,
/// area-weighted unit normal, discrete position Laplacian (the mean curvature
/// vector), signed mean curvature and angle-defect Gaussian curvature.
///
/// Sign convention: outward unit normal; the round sphere of radius r carries
/// H = -2/r and K = 1/r^2. H takes the sign of <laplace(f), nu>.
struct VertexGeometry {
    std::vector<double> area;
    std::vector<double> H;
    std::vector<double> K;
    VertexVectorField normal;
    VertexVectorField laplace_position;

    static VertexGeometry compute(const Mesh& mesh, const Adjacency& adj,
                                  const FaceGeometry& fg) {
        VertexGeometry vg;
        const int nv = mesh.vertex_count();
        vg.area.resize(nv);
        vg.H.resize(nv);
        vg.K.resize(nv);
        vg.normal.resize(nv);
        vg.laplace_position.resize(nv);
        parallel_for(static_cast<std::size_t>(nv), [&](std::size_t b, std::size_t e) {
            for (std::size_t v = b; v < e; ++v) {
                double area = 0.0, angle_sum = 0.0;
                Vec3 nrm = Vec3::Zero(), lap = Vec3::Zero();
                const Vec3& pv = mesh.vertices[v];
                for (int k = adj.vf_offset[v]; k < adj.vf_offset[v + 1]; ++k) {
                    const int f = adj.vf_face[k];
                    const int c = adj.vf_corner[k];
                    const auto& t = mesh.faces[f];
                    area += fg.corner_area[f][c];
                    angle_sum += fg.angle[f][c];
                    nrm += fg.area[f] * fg.normal[f];
                    const int j = t[(c + 1) % 3], l = t[(c + 2) % 3];
                    lap += 0.5 * (fg.cot[f][(c + 2) % 3] * (mesh.vertices[j] - pv) +
                                  fg.cot[f][(c + 1) % 3] * (mesh.vertices[l] - pv));
                }
                vg.area[v] = area;
                vg.normal[v] = nrm.normalized();
                lap /= area;
                vg.laplace_position[v] = lap;
                const double mag = lap.norm();
                vg.H[v] = lap.dot(vg.normal[v]) >= 0.0 ? mag : -mag;
                vg.K[v] = (2.0 * std::numbers::pi - angle_sum) / area;
            }
        }, 32768);
        return vg;
    }
};

/// Discrete mean curvature vector: cotangent Laplacian of the positions over
/// the lumped vertex area. Points inward on convex surfaces with outward
/// orientation (equals H nu with H = -2/r on a radius-r sphere).
inline VertexVectorField mean_curvature_vector(const Mesh& mesh, const Adjacency& adj) {
    const FaceGeometry fg = FaceGeometry::compute(mesh);
    return VertexGeometry::compute(mesh, adj, fg).laplace_position;
}

inline VertexVectorField mean_curvature_vector(const Mesh& mesh) {
    return mean_curvature_vector(mesh, Adjacency::build(mesh));
}

/// Cotangent Laplace-Beltrami with lumped mass. Applied componentwise to the
/// coordinates it reproduces mean_curvature_vector.
inline VertexScalarField laplace_beltrami(const Mesh& mesh, const Adjacency& adj,
                                          const FaceGeometry& fg,
                                          const std::vector<double>& lumped_area,
                                          const VertexScalarField& u) {
    const int nv = mesh.vertex_count();
    if (static_cast<int>(u.size()) != nv)
        throw OperatorError("field length does not match vertex count");
    VertexScalarField out(nv);
    parallel_for(static_cast<std::size_t>(nv), [&](std::size_t b, std::size_t e) {
        for (std::size_t v = b; v < e; ++v) {
            double acc = 0.0;
            for (int k = adj.vf_offset[v]; k < adj.vf_offset[v + 1]; ++k) {
                const int f = adj.vf_face[k];
                const int c = adj.vf_corner[k];
                const auto& t = mesh.faces[f];
                const int j = t[(c + 1) % 3], l = t[(c + 2) % 3];
                acc += 0.5 * (fg.cot[f][(c + 2) % 3] * (u[j] - u[v]) +
                              fg.cot[f][(c + 1) % 3] * (u[l] - u[v]));
            }
            out[v] = acc / lumped_area[v];
        }
    }, 32768);
    return out;
}

inline VertexScalarField laplace_beltrami(const Mesh& mesh, const VertexScalarField& u) {
    const Adjacency adj = Adjacency::build(mesh);
    const FaceGeometry fg = FaceGeometry::compute(mesh);
    const VertexGeometry vg = VertexGeometry::compute(mesh, adj, fg);
    return laplace_beltrami(mesh, adj, fg, vg.area, u);
}

/// Per-face linear gradient, area-averaged to vertices and projected to the
/// vertex tangent plane. Exactly zero on constant fields.
inline VertexVectorField gradient(const Mesh& mesh, const Adjacency& adj, const FaceGeometry& fg,
                                  const VertexVectorField& vertex_normal,
                                  const VertexScalarField& u) {
    const int nv = mesh.vertex_count();
    if (static_cast<int>(u.size()) != nv)
        throw OperatorError("field length does not match vertex count");
    VertexVectorField out(nv);
    parallel_for(static_cast<std::size_t>(nv), [&](std::size_t b, std::size_t e) {
        for (std::size_t v = b; v < e; ++v) {
            Vec3 acc = Vec3::Zero();
            double wsum = 0.0;
            for (int k = adj.vf_offset[v]; k < adj.vf_offset[v + 1]; ++k) {
                const int f = adj.vf_face[k];
                const int c = adj.vf_corner[k];
                const auto& t = mesh.faces[f];
                const int i = t[c], j = t[(c + 1) % 3], l = t[(c + 2) % 3];
                // grad over the face, written with differences from corner i
                const Vec3 g = fg.normal[f].cross((u[j] - u[i]) * (mesh.vertices[i] - mesh.vertices[l]) +
                                                  (u[l] - u[i]) * (mesh.vertices[j] - mesh.vertices[i])) /
                               (2.0 * fg.area[f]);
                acc += fg.area[f] * g;
                wsum += fg.area[f];
            }
            acc /= wsum;
            acc -= vertex_normal[v].dot(acc) * vertex_normal[v];
            out[v] = acc;
        }
    }, 32768);
    return out;
}

inline VertexVectorField gradient(const Mesh& mesh, const VertexScalarField& u) {
    const Adjacency adj = Adjacency::build(mesh);
    const FaceGeometry fg = FaceGeometry::compute(mesh);
    const VertexGeometry vg = VertexGeometry::compute(mesh, adj, fg);
    return gradient(mesh, adj, fg, vg.normal, u);
}

/// Per-vertex curvature state. The n=2 algebraic relations
///   |A|^2 = H^2 - 2K,  |A0|^2 = |A|^2 - H^2/2,  C(A) = H^3 - 3HK
/// are identities of (H, K) and hold exactly by construction. The shape
/// operator comes from a least-squares paraboloid over the 2-ring and is the
/// only fitted quantity.
struct CurvatureField {
    VertexVectorField normal;
    std::vector<double> H;
    std::vector<double> K;
    std::vector<double> norm_A_sq;   // |A|^2
    std::vector<double> norm_A0_sq;  // |A0|^2
    std::vector<double> cubic_A;     // C(A) = sum of principal curvatures cubed
    std::vector<double> area;        // lumped vertex area
    std::vector<Eigen::Matrix3d> shape; // symmetric, maps the tangent plane to itself
    std::vector<std::uint8_t> shape_fallback; // 1 where the quadric fit degenerated

    int vertex_count() const { return static_cast<int>(H.size()); }

    double total_area() const {
        return chunked_sum(area.size(), [&](std::size_t i) { return area[i]; });
    }
};

namespace detail {

inline void tangent_basis(const Vec3& n, Vec3& e1, Vec3& e2) {
    int axis = 0;
    double best = std::abs(n.x());
    if (std::abs(n.y()) < best) { axis = 1; best = std::abs(n.y()); }
    if (std::abs(n.z()) < best) axis = 2;
    e1 = n.cross(Vec3::Unit(axis)).normalized();
    e2 = n.cross(e1);
}

/// Least-squares paraboloid z = a x^2/2 + b xy + c y^2/2 + d x + e y over the
/// 2-ring in the vertex tangent frame; returns false when rank-deficient.
inline bool fit_shape_operator(const Mesh& mesh, const Adjacency& adj, const Vec3& nrm, int v,
                               Eigen::Matrix3d& shape_out) {
    const std::vector<int> ring = adj.two_ring(v);
    if (ring.size() < 5) return false;
    Vec3 e1, e2;
    tangent_basis(nrm, e1, e2);

    double scale = 0.0;
    for (int u : ring) scale = std::max(scale, (mesh.vertices[u] - mesh.vertices[v]).norm());
    if (!(scale > 0.0)) return false;

    Eigen::Matrix<double, 5, 5> ata = Eigen::Matrix<double, 5, 5>::Zero();
    Eigen::Matrix<double, 5, 1> atb = Eigen::Matrix<double, 5, 1>::Zero();
    for (int u : ring) {
        const Vec3 d = (mesh.vertices[u] - mesh.vertices[v]) / scale;
        const double x = d.dot(e1), y = d.dot(e2), z = d.dot(nrm);
        Eigen::Matrix<double, 5, 1> row;
        row << 0.5 * x * x, x * y, 0.5 * y * y, x, y;
        ata += row * row.transpose();
        atb += row * z;
    }
    const Eigen::LDLT<Eigen::Matrix<double, 5, 5>> ldlt(ata);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    Eigen::Matrix<double, 5, 1> coef = ldlt.solve(atb);
    if ((ata * coef - atb).norm() > 1e-8 * (atb.norm() + 1.0)) return false;
    coef.head<3>() /= scale; // undo coordinate scaling (quadratic terms only)

    const double d1 = coef[3], d2 = coef[4];
    const double slope_sq = d1 * d1 + d2 * d2;
    Eigen::Matrix2d hess;
    hess << coef[0], coef[1], coef[1], coef[2];
    // second fundamental form and metric of the graph at the fit point
    const Eigen::Matrix2d form = hess / std::sqrt(1.0 + slope_sq);
    Eigen::Matrix2d metric;
    metric << 1.0 + d1 * d1, d1 * d2, d1 * d2, 1.0 + d2 * d2;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(metric);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) return false;
    const Eigen::Matrix2d inv_sqrt = es.operatorInverseSqrt();
    const Eigen::Matrix2d weingarten = inv_sqrt * form * inv_sqrt; // symmetric, same spectrum as g^-1 A

    Eigen::Matrix<double, 3, 2> basis;
    basis.col(0) = e1;
    basis.col(1) = e2;
    shape_out = basis * weingarten * basis.transpose();
    return true;
}

} // namespace detail

/// Full curvature state. K comes from angle defects (Gauss-Bonnet exact), H
/// from the position Laplacian, the derived scalars algebraically from (H,K).
/// `with_shape` skips the quadric fit when the shape operator is not needed.
inline CurvatureField curvature_field(const Mesh& mesh, const Adjacency& adj,
                                      bool with_shape = true) {
    const FaceGeometry fg = FaceGeometry::compute(mesh);
    VertexGeometry vg = VertexGeometry::compute(mesh, adj, fg);
    const int nv = mesh.vertex_count();

    CurvatureField cf;
    cf.normal = std::move(vg.normal);
    cf.H = std::move(vg.H);
    cf.K = std::move(vg.K);
    cf.area = std::move(vg.area);
    cf.norm_A_sq.resize(nv);
    cf.norm_A0_sq.resize(nv);
    cf.cubic_A.resize(nv);
    for (int v = 0; v < nv; ++v) {
        const double h = cf.H[v], k = cf.K[v];
        cf.norm_A_sq[v] = h * h - 2.0 * k;
        cf.norm_A0_sq[v] = cf.norm_A_sq[v] - 0.5 * h * h;
        cf.cubic_A[v] = h * h * h - 3.0 * h * k;
    }
    if (with_shape) {
        cf.shape.resize(nv);
        cf.shape_fallback.assign(nv, 0);
        parallel_for(static_cast<std::size_t>(nv), [&](std::size_t b, std::size_t e) {
            for (std::size_t v = b; v < e; ++v) {
                if (!detail::fit_shape_operator(mesh, adj, cf.normal[v], static_cast<int>(v),
                                                cf.shape[v])) {
                    // isotropic estimate from the cotangent H; flagged
                    const Eigen::Matrix3d proj =
                        Eigen::Matrix3d::Identity() - cf.normal[v] * cf.normal[v].transpose();
                    cf.shape[v] = 0.5 * cf.H[v] * proj;
                    cf.shape_fallback[v] = 1;
                }
            }
        }, 256);
    }
    return cf;
}

inline CurvatureField curvature_field(const Mesh& mesh, bool with_shape = true) {
    return curvature_field(mesh, Adjacency::build(mesh), with_shape);
}

/// Applies the fitted shape operator vertexwise; input and output are tangent.
inline VertexVectorField shape_apply(const CurvatureField& field, const VertexVectorField& x) {
    if (field.shape.empty()) throw OperatorError("curvature field lacks a shape operator");
    if (x.size() != field.shape.size())
        throw OperatorError("vector field length does not match vertex count");
    VertexVectorField out(x.size());
    parallel_for(x.size(), [&](std::size_t b, std::size_t e) {
        for (std::size_t v = b; v < e; ++v) out[v] = field.shape[v] * x[v];
    });
    return out;
}

} // namespace curvflow
