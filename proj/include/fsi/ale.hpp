/**
 * @file ale.hpp
 * @brief Fluid mesh motion: harmonic extension, domain velocity and the radial map.
 *
 * Geometry is piecewise linear, so mesh displacements live on the vertices and
 * midpoint nodes follow as parent averages. The extension is therefore the
 * continuous P1 Laplace problem on the reference vertex grid; on this
 * right-triangle grid its stiffness matrix is an M-matrix and the discrete
 * maximum principle holds.
 */
#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fem.hpp"
#include "linsolve.hpp"
#include "mesh.hpp"

namespace fsi {

/// Prefactored componentwise Laplace extension on the reference fluid mesh.
class HarmonicExtension {
public:
    HarmonicExtension() = default;

    explicit HarmonicExtension(const Mesh& m, double tol = 1e-10) : tol_(tol) {
        const SubMesh& f = m.fluid;
        const int nv = f.num_vertices();
        mask_.assign(static_cast<std::size_t>(nv), 0);
        for (int I = 0; I <= f.nx; ++I)
            for (int J = 0; J <= f.ny; ++J)
                if (I == 0 || I == f.nx || J == 0 || J == f.ny) mask_[f.vertex(I, J)] = 1;
        SpMat A = assemble_p1_laplace(f, f.ref);
        A = dirichlet_matrix(A, mask_, &lift_);
        solver_.factor(A);
    }

    /// Vertex-based extension of the trace displacement `eta` (interleaved trace vector).
    /// Trace midpoint values do not enter: the moving boundary is the vertex polyline.
    std::vector<Vec2> operator()(const Mesh& m, const Vec& eta) const {
        const SubMesh& f = m.fluid;
        const int nv = f.num_vertices();
        std::vector<Vec2> d(static_cast<std::size_t>(f.num_nodes()));
        for (int c = 0; c < 2; ++c) {
            Vec g = Vec::Zero(nv);
            for (int I = 0; I <= f.nx; ++I) g[f.vertex(I, f.ny)] = eta[2 * (2 * I) + c];
            Vec x;
            if (g.squaredNorm() == 0.0) x = Vec::Zero(nv);
            else x = solver_.solve(dirichlet_rhs(Vec::Zero(nv), mask_, g, lift_), tol_);
            for (int v = 0; v < nv; ++v) {
                Vec2& dv = d[f.node_of_vertex[v]];
                (c == 0 ? dv.z : dv.r) = x[v];
            }
        }
        for (int n = 0; n < f.num_nodes(); ++n) {
            const auto& pp = f.parents[n];
            if (pp[0] != pp[1]) d[n] = {0.5 * (d[pp[0]].z + d[pp[1]].z), 0.5 * (d[pp[0]].r + d[pp[1]].r)};
        }
        return d;
    }

private:
    double tol_ = 1e-10;
    std::vector<char> mask_;
    SpMat lift_;
    SpdSolver solver_;
};

/// One-shot convenience wrapper.
inline std::vector<Vec2> harmonic_extension(const Mesh& m, const Vec& eta, double tol = 1e-10) {
    return HarmonicExtension(m, tol)(m, eta);
}

/// Nodal finite difference (d_new - d_old)/dt as an interleaved vector.
inline Vec domain_velocity(const std::vector<Vec2>& d_new, const std::vector<Vec2>& d_old, double dt) {
    if (d_new.size() != d_old.size()) throw std::invalid_argument("domain_velocity: size mismatch");
    Vec w(2 * static_cast<Eigen::Index>(d_new.size()));
    for (std::size_t n = 0; n < d_new.size(); ++n) {
        w[2 * n] = (d_new[n].z - d_old[n].z) / dt;
        w[2 * n + 1] = (d_new[n].r - d_old[n].r) / dt;
    }
    return w;
}

struct RadialAle {
    std::vector<Vec2> X;      ///< mapped node coordinates
    std::vector<double> J;    ///< (R + eta^{n+1}) / (R + eta^n) per node
    Vec w;                    ///< interleaved domain velocity
};

/**
 * Radial map (z, r) -> (z, r (R + eta^{n+1}(z)) / (R + eta^n(z))) applied to the fluid
 * nodes `coords`. eta_n and eta_np1 are radial trace displacements indexed by trace node;
 * the map is evaluated at vertex columns and midpoint nodes move with their parents.
 */
inline RadialAle radial_ale(const Mesh& m, const std::vector<double>& eta_n, const std::vector<double>& eta_np1,
                            double R, double dt, const std::vector<Vec2>& coords) {
    const SubMesh& f = m.fluid;
    RadialAle out;
    out.X = coords;
    out.J.assign(coords.size(), 1.0);
    out.w = Vec::Zero(2 * static_cast<Eigen::Index>(coords.size()));
    for (int i = 0; i < f.ni(); i += 2) {
        const int k = i;
        const double a = R + eta_n[k], b = R + eta_np1[k];
        if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("radial_ale: nonpositive radius");
        const double J = b / a;
        for (int j = 0; j < f.nj(); j += 2) {
            const int n = f.node(i, j);
            out.X[n].r = coords[n].r * J;
            out.J[n] = J;
            out.w[2 * n + 1] = (eta_np1[k] - eta_n[k]) / (a * dt) * coords[n].r;
        }
    }
    for (int n = 0; n < f.num_nodes(); ++n) {
        const auto& pp = f.parents[n];
        if (pp[0] == pp[1]) continue;
        // shift by the parents' mean displacement, so J = 1 leaves the node bitwise in place
        out.X[n].r = coords[n].r + 0.5 * ((out.X[pp[0]].r - coords[pp[0]].r) + (out.X[pp[1]].r - coords[pp[1]].r));
        out.J[n] = 0.5 * (out.J[pp[0]] + out.J[pp[1]]);
        out.w[2 * n + 1] = 0.5 * (out.w[2 * pp[0] + 1] + out.w[2 * pp[1] + 1]);
    }
    return out;
}

/// Pointwise form of the radial map data for scalars.
inline double radial_jacobian(double eta_n, double eta_np1, double R) {
    if (!(R + eta_n > 0.0) || !(R + eta_np1 > 0.0)) throw std::domain_error("radial_ale: nonpositive radius");
    return (R + eta_np1) / (R + eta_n);
}

/// Per-element ratio of current to reference area.
inline std::vector<double> element_jacobians(const SubMesh& sm, const std::vector<Vec2>& X) {
    auto cur = triangle_areas(sm, X);
    auto ref = triangle_areas(sm, sm.ref);
    for (std::size_t t = 0; t < cur.size(); ++t) cur[t] /= ref[t];
    return cur;
}

}  // namespace fsi
