/**
 * @file quadrature.hpp
 * @brief Quadrature rules and quadratic Lagrange shape functions.
 */
#pragma once

#include <array>
#include <cmath>

#include "mesh.hpp"

namespace fsi::quad {

/// Point in barycentric coordinates with a weight normalised to unit total.
struct TriPoint {
    double l0, l1, l2, w;
};

/// 7-point rule, exact for polynomials of degree 5.
inline const std::array<TriPoint, 7>& triangle7() {
    static const std::array<TriPoint, 7> pts = [] {
        const double s15 = std::sqrt(15.0);
        const double a1 = (6.0 - s15) / 21.0, w1 = (155.0 - s15) / 1200.0;
        const double a2 = (6.0 + s15) / 21.0, w2 = (155.0 + s15) / 1200.0;
        const double b1 = 1.0 - 2.0 * a1, b2 = 1.0 - 2.0 * a2;
        return std::array<TriPoint, 7>{{{1.0 / 3, 1.0 / 3, 1.0 / 3, 9.0 / 40.0},
                                        {a1, a1, b1, w1}, {a1, b1, a1, w1}, {b1, a1, a1, w1},
                                        {a2, a2, b2, w2}, {a2, b2, a2, w2}, {b2, a2, a2, w2}}};
    }();
    return pts;
}

struct LinePoint {
    double s, w;
};

/// 3-point Gauss rule on [0,1], exact for degree 5.
inline const std::array<LinePoint, 3>& gauss3() {
    static const std::array<LinePoint, 3> pts = [] {
        const double d = 0.5 * std::sqrt(0.6);
        return std::array<LinePoint, 3>{{{0.5 - d, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + d, 5.0 / 18.0}}};
    }();
    return pts;
}

/// Affine element data: area and constant barycentric gradients.
struct TriGeom {
    double area = 0.0;
    double gl[3][2] = {};   ///< d lambda_i / d(z, r)
};

inline TriGeom tri_geom(const Vec2& a, const Vec2& b, const Vec2& c) {
    TriGeom g;
    const double det = (b.z - a.z) * (c.r - a.r) - (c.z - a.z) * (b.r - a.r);
    g.area = 0.5 * det;
    const double inv = 1.0 / det;
    g.gl[0][0] = (b.r - c.r) * inv;
    g.gl[0][1] = (c.z - b.z) * inv;
    g.gl[1][0] = (c.r - a.r) * inv;
    g.gl[1][1] = (a.z - c.z) * inv;
    g.gl[2][0] = (a.r - b.r) * inv;
    g.gl[2][1] = (b.z - a.z) * inv;
    return g;
}

/// Quadratic shape values and gradients at one barycentric point. Order v0, v1, v2, m01, m12, m20.
struct P2Values {
    double phi[6];
    double grad[6][2];
};

inline P2Values p2_values(const TriGeom& g, double l0, double l1, double l2) {
    P2Values v;
    const double l[3] = {l0, l1, l2};
    for (int i = 0; i < 3; ++i) {
        v.phi[i] = l[i] * (2.0 * l[i] - 1.0);
        for (int c = 0; c < 2; ++c) v.grad[i][c] = (4.0 * l[i] - 1.0) * g.gl[i][c];
    }
    for (int k = 0; k < 3; ++k) {
        const int i = k, j = (k + 1) % 3;
        v.phi[3 + k] = 4.0 * l[i] * l[j];
        for (int c = 0; c < 2; ++c) v.grad[3 + k][c] = 4.0 * (l[i] * g.gl[j][c] + l[j] * g.gl[i][c]);
    }
    return v;
}

/// Quadratic 1D basis on [0,1] ordered left, right, mid.
inline void p2_line(double s, double phi[3], double dphi_ds[3]) {
    phi[0] = (1.0 - s) * (1.0 - 2.0 * s);
    phi[1] = s * (2.0 * s - 1.0);
    phi[2] = 4.0 * s * (1.0 - s);
    dphi_ds[0] = 4.0 * s - 3.0;
    dphi_ds[1] = 4.0 * s - 1.0;
    dphi_ds[2] = 4.0 - 8.0 * s;
}

}  // namespace fsi::quad
