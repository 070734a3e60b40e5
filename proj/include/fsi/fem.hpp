/**
 * @file fem.hpp
 * @brief Assembly of the mass, stiffness, divergence, advection and load forms.
 *
 * Vector unknowns are interleaved: dof 2*node + c with c = 0 for z and 1 for r.
 * Pressure is continuous piecewise linear with one unknown per vertex. The
 * interface trace space is quadratic in z with dof 2*k + c for trace node k.
 * All volume forms take the node coordinates explicitly so the same code serves
 * reference and current configurations.
 */
#pragma once

#include <Eigen/Sparse>
#include <array>
#include <cmath>
#include <vector>

#include "mesh.hpp"
#include "params.hpp"
#include "quadrature.hpp"

namespace fsi {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Triplets = std::vector<Eigen::Triplet<double>>;

inline SpMat from_triplets(int rows, int cols, const Triplets& t) {
    SpMat A(rows, cols);
    A.setFromTriplets(t.begin(), t.end());
    return A;
}

namespace detail {

inline quad::TriGeom geom_of(const SubMesh& sm, const std::vector<Vec2>& X, int t) {
    const auto& T = sm.tris[t];
    return quad::tri_geom(X[T[0]], X[T[1]], X[T[2]]);
}

/// Value of a nodal vector field (interleaved) at a point given the shape values.
inline void eval_vec(const Vec& f, const std::array<int, 6>& T, const quad::P2Values& v, double out[2]) {
    out[0] = out[1] = 0.0;
    for (int a = 0; a < 6; ++a) {
        out[0] += f[2 * T[a]] * v.phi[a];
        out[1] += f[2 * T[a] + 1] * v.phi[a];
    }
}

inline double eval_div(const Vec& f, const std::array<int, 6>& T, const quad::P2Values& v) {
    double d = 0.0;
    for (int a = 0; a < 6; ++a) d += f[2 * T[a]] * v.grad[a][0] + f[2 * T[a] + 1] * v.grad[a][1];
    return d;
}

}  // namespace detail

/// scale * integral of u . phi over the submesh (vector quadratic space).
inline SpMat assemble_mass(const SubMesh& sm, const std::vector<Vec2>& X, double scale = 1.0) {
    Triplets t;
    t.reserve(sm.tris.size() * 72);
    for (int e = 0; e < sm.num_tris(); ++e) {
        const auto g = detail::geom_of(sm, X, e);
        const auto& T = sm.tris[e];
        double Me[6][6] = {};
        for (const auto& q : quad::triangle7()) {
            const auto v = quad::p2_values(g, q.l0, q.l1, q.l2);
            const double w = q.w * g.area * scale;
            for (int a = 0; a < 6; ++a)
                for (int b = 0; b < 6; ++b) Me[a][b] += w * v.phi[a] * v.phi[b];
        }
        for (int a = 0; a < 6; ++a)
            for (int b = 0; b < 6; ++b)
                for (int c = 0; c < 2; ++c) t.emplace_back(2 * T[a] + c, 2 * T[b] + c, Me[a][b]);
    }
    return from_triplets(2 * sm.num_nodes(), 2 * sm.num_nodes(), t);
}

/// Linear elasticity form 2 mu D(u):D(phi) + lambda div u div phi + gamma u . phi.
/// With lambda = gamma = 0 this is the fluid viscous form.
inline SpMat assemble_elasticity(const SubMesh& sm, const std::vector<Vec2>& X, double mu, double lambda, double gamma) {
    Triplets t;
    t.reserve(sm.tris.size() * 144);
    for (int e = 0; e < sm.num_tris(); ++e) {
        const auto g = detail::geom_of(sm, X, e);
        const auto& T = sm.tris[e];
        double Ke[12][12] = {};
        for (const auto& q : quad::triangle7()) {
            const auto v = quad::p2_values(g, q.l0, q.l1, q.l2);
            const double w = q.w * g.area;
            for (int a = 0; a < 6; ++a)
                for (int b = 0; b < 6; ++b) {
                    const double gg = v.grad[a][0] * v.grad[b][0] + v.grad[a][1] * v.grad[b][1];
                    const double mm = v.phi[a] * v.phi[b];
                    for (int k = 0; k < 2; ++k)
                        for (int l = 0; l < 2; ++l) {
                            double val = mu * v.grad[a][l] * v.grad[b][k] + lambda * v.grad[a][k] * v.grad[b][l];
                            if (k == l) val += mu * gg + gamma * mm;
                            Ke[2 * a + k][2 * b + l] += w * val;
                        }
                }
        }
        for (int a = 0; a < 6; ++a)
            for (int k = 0; k < 2; ++k)
                for (int b = 0; b < 6; ++b)
                    for (int l = 0; l < 2; ++l) t.emplace_back(2 * T[a] + k, 2 * T[b] + l, Ke[2 * a + k][2 * b + l]);
    }
    return from_triplets(2 * sm.num_nodes(), 2 * sm.num_nodes(), t);
}

/// Fluid viscous form a_f(v, phi) = 2 mu_f int D(v):D(phi).
inline SpMat assemble_fluid_stiffness(const SubMesh& sm, const std::vector<Vec2>& X, double mu_f) {
    return assemble_elasticity(sm, X, mu_f, 0.0, 0.0);
}

/// b(q, phi) = int q div phi; rows are pressure vertices, columns velocity dofs.
inline SpMat assemble_divergence(const SubMesh& sm, const std::vector<Vec2>& X) {
    Triplets t;
    t.reserve(sm.tris.size() * 36);
    for (int e = 0; e < sm.num_tris(); ++e) {
        const auto g = detail::geom_of(sm, X, e);
        const auto& T = sm.tris[e];
        const auto& P = sm.tri_vertices[e];
        double Be[3][12] = {};
        for (const auto& q : quad::triangle7()) {
            const auto v = quad::p2_values(g, q.l0, q.l1, q.l2);
            const double w = q.w * g.area;
            const double psi[3] = {q.l0, q.l1, q.l2};
            for (int c = 0; c < 3; ++c)
                for (int b = 0; b < 6; ++b)
                    for (int l = 0; l < 2; ++l) Be[c][2 * b + l] += w * psi[c] * v.grad[b][l];
        }
        for (int c = 0; c < 3; ++c)
            for (int b = 0; b < 6; ++b)
                for (int l = 0; l < 2; ++l) t.emplace_back(P[c], 2 * T[b] + l, Be[c][2 * b + l]);
    }
    return from_triplets(sm.num_vertices(), 2 * sm.num_nodes(), t);
}

/// Continuous P1 mass on the vertices (used for pressure norms).
inline SpMat assemble_p1_mass(const SubMesh& sm, const std::vector<Vec2>& X) {
    Triplets t;
    for (int e = 0; e < sm.num_tris(); ++e) {
        const auto g = detail::geom_of(sm, X, e);
        const auto& P = sm.tri_vertices[e];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) t.emplace_back(P[a], P[b], g.area * (a == b ? 2.0 : 1.0) / 12.0);
    }
    return from_triplets(sm.num_vertices(), sm.num_vertices(), t);
}

/// Continuous P1 Laplacian on the vertices.
inline SpMat assemble_p1_laplace(const SubMesh& sm, const std::vector<Vec2>& X) {
    Triplets t;
    for (int e = 0; e < sm.num_tris(); ++e) {
        const auto g = detail::geom_of(sm, X, e);
        const auto& P = sm.tri_vertices[e];
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                t.emplace_back(P[a], P[b], g.area * (g.gl[a][0] * g.gl[b][0] + g.gl[a][1] * g.gl[b][1]));
    }
    return from_triplets(sm.num_vertices(), sm.num_vertices(), t);
}

/**
 * Convection matrix for the advecting field `adv` (interleaved nodal vector).
 *
 * Plain:       scale * int (adv . grad u) . phi
 * Symmetrized: scale/2 * int [ (div w) u . phi + (adv . grad u) . phi - (adv . grad phi) . u ]
 *
 * `w` is only read in the symmetrized variant; pass nullptr for w = 0.
 */
inline SpMat assemble_advection(const SubMesh& sm, const std::vector<Vec2>& X, const Vec& adv, bool symmetrized,
                                double scale = 1.0, const Vec* w = nullptr) {
    Triplets t;
    t.reserve(sm.tris.size() * 72);
    for (int e = 0; e < sm.num_tris(); ++e) {
        const auto g = detail::geom_of(sm, X, e);
        const auto& T = sm.tris[e];
        double Ce[6][6] = {};
        for (const auto& q : quad::triangle7()) {
            const auto v = quad::p2_values(g, q.l0, q.l1, q.l2);
            const double wq = q.w * g.area * scale;
            double a[2];
            detail::eval_vec(adv, T, v, a);
            double dw = 0.0;
            if (symmetrized && w) dw = detail::eval_div(*w, T, v);
            for (int i = 0; i < 6; ++i) {
                const double ai = a[0] * v.grad[i][0] + a[1] * v.grad[i][1];
                for (int j = 0; j < 6; ++j) {
                    const double aj = a[0] * v.grad[j][0] + a[1] * v.grad[j][1];
                    if (symmetrized)
                        Ce[i][j] += 0.5 * wq * (dw * v.phi[i] * v.phi[j] + aj * v.phi[i] - ai * v.phi[j]);
                    else
                        Ce[i][j] += wq * aj * v.phi[i];
                }
            }
        }
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                for (int c = 0; c < 2; ++c) t.emplace_back(2 * T[i] + c, 2 * T[j] + c, Ce[i][j]);
    }
    return from_triplets(2 * sm.num_nodes(), 2 * sm.num_nodes(), t);
}

/// Normal-stress data: int_inlet p_in phi_z - int_outlet p_out phi_z.
inline Vec assemble_boundary_load(const SubMesh& sm, const std::vector<Vec2>& X, double p_in, double p_out) {
    Vec f = Vec::Zero(2 * sm.num_nodes());
    for (const auto& e : sm.edges) {
        double p;
        if (e.tag == Tag::Inlet) p = p_in;
        else if (e.tag == Tag::Outlet) p = -p_out;
        else continue;
        const double len = std::hypot(X[e.b].z - X[e.a].z, X[e.b].r - X[e.a].r);
        const int nodes[3] = {e.a, e.b, e.mid};
        for (const auto& q : quad::gauss3()) {
            double phi[3], dphi[3];
            quad::p2_line(q.s, phi, dphi);
            for (int k = 0; k < 3; ++k) f[2 * nodes[k]] += q.w * len * p * phi[k];
        }
    }
    return f;
}

/// Outward unit normal of a counter-clockwise boundary edge under coordinates X.
inline Vec2 outward_normal(const BoundaryEdge& e, const std::vector<Vec2>& X) {
    const double tz = X[e.b].z - X[e.a].z, tr = X[e.b].r - X[e.a].r;
    const double len = std::hypot(tz, tr);
    return {tr / len, -tz / len};
}

/// Kinetic energy flux rho/2 int (a . n) |v|^2 through inlet and outlet; positive when energy leaves.
inline double boundary_kinetic_flux(const SubMesh& sm, const std::vector<Vec2>& X, const Vec& adv, const Vec& v,
                                    double rho) {
    double flux = 0.0;
    for (const auto& e : sm.edges) {
        if (e.tag != Tag::Inlet && e.tag != Tag::Outlet) continue;
        const double len = std::hypot(X[e.b].z - X[e.a].z, X[e.b].r - X[e.a].r);
        const Vec2 n = outward_normal(e, X);
        const int nodes[3] = {e.a, e.b, e.mid};
        for (const auto& q : quad::gauss3()) {
            double phi[3], dphi[3];
            quad::p2_line(q.s, phi, dphi);
            double az = 0, ar = 0, vz = 0, vr = 0;
            for (int k = 0; k < 3; ++k) {
                az += phi[k] * adv[2 * nodes[k]];
                ar += phi[k] * adv[2 * nodes[k] + 1];
                vz += phi[k] * v[2 * nodes[k]];
                vr += phi[k] * v[2 * nodes[k] + 1];
            }
            flux += q.w * len * 0.5 * rho * (az * n.z + ar * n.r) * (vz * vz + vr * vr);
        }
    }
    return flux;
}

/// Trace node index of a fluid interface node.
inline int fluid_node_to_trace(const Mesh& m, int node) { return node / m.fluid.nj(); }

/**
 * Interface pressure load on the trace space:
 * int_0^L J beta p n^f . psi dz_ref = int_{Gamma(t)} beta p n^f . psi ds
 * with n^f the outward fluid normal of the current polyline and p the P1 pressure (vertex vector).
 */
inline Vec assemble_interface_pressure_load(const Mesh& m, const std::vector<Vec2>& X, const Vec& p, double beta) {
    Vec f = Vec::Zero(2 * m.num_trace_nodes());
    if (beta == 0.0) return f;
    for (const auto& e : m.fluid.edges) {
        if (e.tag != Tag::Interface) continue;
        const double len = std::hypot(X[e.b].z - X[e.a].z, X[e.b].r - X[e.a].r);
        const Vec2 n = outward_normal(e, X);
        const double pa = p[m.fluid.vertex_of_node[e.a]], pb = p[m.fluid.vertex_of_node[e.b]];
        const int tr[3] = {fluid_node_to_trace(m, e.a), fluid_node_to_trace(m, e.b), fluid_node_to_trace(m, e.mid)};
        for (const auto& q : quad::gauss3()) {
            double phi[3], dphi[3];
            quad::p2_line(q.s, phi, dphi);
            const double pq = pa * (1.0 - q.s) + pb * q.s;
            for (int k = 0; k < 3; ++k) {
                f[2 * tr[k]] += q.w * len * beta * pq * n.z * phi[k];
                f[2 * tr[k] + 1] += q.w * len * beta * pq * n.r * phi[k];
            }
        }
    }
    return f;
}

/// Reference-interface mass int_0^L eta . zeta (scaled by 1).
inline SpMat assemble_trace_mass(const Mesh& m) {
    Triplets t;
    for (int e = 0; e < m.num_trace_elems(); ++e) {
        const auto E = m.trace_elem(e);
        const double len = m.trace_z(E[1]) - m.trace_z(E[0]);
        for (const auto& q : quad::gauss3()) {
            double phi[3], dphi[3];
            quad::p2_line(q.s, phi, dphi);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    for (int c = 0; c < 2; ++c) t.emplace_back(2 * E[a] + c, 2 * E[b] + c, q.w * len * phi[a] * phi[b]);
        }
    }
    return from_triplets(2 * m.num_trace_nodes(), 2 * m.num_trace_nodes(), t);
}

/**
 * Membrane form
 *   a_m(eta, zeta) = C1 int eta_z' zeta_z' + C0 int eta_r zeta_r + C2 int eta_z' zeta_r - C2 int eta_r' zeta_z.
 * Rows index zeta, columns eta. On trace functions that vanish at z = 0 and z = L the
 * C2 pair is symmetric (integration by parts), so the quadratic form picks up
 * 2 C2 int eta_z' eta_r.
 */
inline SpMat assemble_membrane(const Mesh& m, const MembraneCoeffs& c) {
    Triplets t;
    for (int e = 0; e < m.num_trace_elems(); ++e) {
        const auto E = m.trace_elem(e);
        const double len = m.trace_z(E[1]) - m.trace_z(E[0]);
        for (const auto& q : quad::gauss3()) {
            double phi[3], ds[3];
            quad::p2_line(q.s, phi, ds);
            const double w = q.w * len;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) {
                    const double da = ds[a] / len, db = ds[b] / len;
                    t.emplace_back(2 * E[a], 2 * E[b], w * c.C1 * da * db);
                    t.emplace_back(2 * E[a] + 1, 2 * E[b] + 1, w * c.C0 * phi[a] * phi[b]);
                    t.emplace_back(2 * E[a] + 1, 2 * E[b], w * c.C2 * db * phi[a]);
                    t.emplace_back(2 * E[a], 2 * E[b] + 1, -w * c.C2 * db * phi[a]);
                }
        }
    }
    return from_triplets(2 * m.num_trace_nodes(), 2 * m.num_trace_nodes(), t);
}

/// Membrane elastic energy in Lame grouping:
/// h [ mu |eta_r/R|^2 + mu |eta_z'|^2 + mu lambda/(lambda+2mu) |eta_z' + eta_r/R|^2 ], which equals a_m(eta,eta)/2
/// for traces vanishing at the ends.
inline double membrane_elastic_energy(const Mesh& m, const PhysicalParams& p, const Vec& eta) {
    const double mu = p.mu_m, lam = p.lambda_m;
    double E = 0.0;
    for (int e = 0; e < m.num_trace_elems(); ++e) {
        const auto Ed = m.trace_elem(e);
        const double len = m.trace_z(Ed[1]) - m.trace_z(Ed[0]);
        for (const auto& q : quad::gauss3()) {
            double phi[3], ds[3];
            quad::p2_line(q.s, phi, ds);
            double er = 0.0, dz = 0.0;
            for (int a = 0; a < 3; ++a) {
                er += eta[2 * Ed[a] + 1] * phi[a];
                dz += eta[2 * Ed[a]] * ds[a] / len;
            }
            const double x = er / p.R;
            E += q.w * len * p.h * (mu * x * x + mu * dz * dz + mu * lam / (lam + 2.0 * mu) * (dz + x) * (dz + x));
        }
    }
    return E;
}

/// Copies structure-side vector dofs on the interface into a trace vector.
inline Vec structure_trace(const Mesh& m, const Vec& U) {
    Vec t(2 * m.num_trace_nodes());
    for (int k = 0; k < m.num_trace_nodes(); ++k) {
        const int s = m.trace_to_structure(k);
        t[2 * k] = U[2 * s];
        t[2 * k + 1] = U[2 * s + 1];
    }
    return t;
}

inline Vec fluid_trace(const Mesh& m, const Vec& v) {
    Vec t(2 * m.num_trace_nodes());
    for (int k = 0; k < m.num_trace_nodes(); ++k) {
        const int f = m.trace_to_fluid(k);
        t[2 * k] = v[2 * f];
        t[2 * k + 1] = v[2 * f + 1];
    }
    return t;
}

/// Embeds a trace-space matrix into the rows/columns of a volume space via a node map.
inline void add_trace_block(Triplets& t, const SpMat& Mtr, const std::vector<int>& node_of_trace, double scale) {
    for (int i = 0; i < Mtr.outerSize(); ++i)
        for (SpMat::InnerIterator it(Mtr, i); it; ++it) {
            const int ri = 2 * node_of_trace[it.row() / 2] + it.row() % 2;
            const int ci = 2 * node_of_trace[it.col() / 2] + it.col() % 2;
            t.emplace_back(ri, ci, scale * it.value());
        }
}

inline void append_triplets(Triplets& t, const SpMat& A, double scale = 1.0, int row_off = 0, int col_off = 0) {
    for (int i = 0; i < A.outerSize(); ++i)
        for (SpMat::InnerIterator it(A, i); it; ++it)
            t.emplace_back(it.row() + row_off, it.col() + col_off, scale * it.value());
}

}  // namespace fsi
