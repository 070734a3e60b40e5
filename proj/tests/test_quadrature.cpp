#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fsi/quadrature.hpp"

using namespace fsi;

namespace {

// Gauss-Legendre nodes on [-1,1] by Newton iteration on P_n.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.resize(n);
    w.resize(n);
    const double pi = std::acos(-1.0);
    for (int i = 0; i < n; ++i) {
        double t = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = t;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * t * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (t * p1 - p0) / (t * t - 1.0);
            const double dx = p1 / dp;
            t -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

// Collapsed (Duffy) product rule on the reference triangle, exact to degree 2n-2 in total.
struct RefRule {
    std::vector<quad::TriPoint> pts;
};

RefRule collapsed_rule(int n) {
    std::vector<double> x, w;
    gauss_legendre(n, x, w);
    RefRule r;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u = 0.5 * (x[i] + 1.0), v = 0.5 * (x[j] + 1.0);
            const double l1 = u, l2 = (1.0 - u) * v;
            // map weight: du dv (1-u), normalised so weights sum to 1 (reference area 1/2)
            const double wt = 0.25 * w[i] * w[j] * (1.0 - u) * 2.0;
            r.pts.push_back({1.0 - l1 - l2, l1, l2, wt});
        }
    return r;
}

double factorial(int k) { return std::tgamma(k + 1.0); }

Vec2 random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return {u(rng), u(rng)};
}

}  // namespace

TEST(Quadrature, TriangleRuleExactToDegreeFive) {
    const auto& q = quad::triangle7();
    double wsum = 0.0;
    for (const auto& p : q) wsum += p.w;
    EXPECT_NEAR(wsum, 1.0, 1e-15);
    for (int a = 0; a <= 5; ++a)
        for (int b = 0; a + b <= 5; ++b)
            for (int c = 0; a + b + c <= 5; ++c) {
                double s = 0.0;
                for (const auto& p : q) s += p.w * std::pow(p.l0, a) * std::pow(p.l1, b) * std::pow(p.l2, c);
                // normalised: 2 a! b! c! / (a+b+c+2)!
                const double exact = 2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
                EXPECT_NEAR(s, exact, 1e-15) << a << b << c;
            }
}

TEST(Quadrature, LineRuleExactToDegreeFive) {
    for (int k = 0; k <= 5; ++k) {
        double s = 0.0;
        for (const auto& p : quad::gauss3()) s += p.w * std::pow(p.s, k);
        EXPECT_NEAR(s, 1.0 / (k + 1), 1e-15);
    }
}

TEST(Quadrature, CollapsedOracleIsItselfExact) {
    const RefRule r = collapsed_rule(6);
    for (int a = 0; a <= 10; ++a)
        for (int b = 0; a + b <= 10; ++b) {
            const int c = 10 - a - b;
            double s = 0.0;
            for (const auto& p : r.pts) s += p.w * std::pow(p.l0, a) * std::pow(p.l1, b) * std::pow(p.l2, c);
            const double exact = 2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2);
            EXPECT_NEAR(s / exact, 1.0, 1e-13);
        }
}

// Mass and stiffness integrands of the quadratic space against a degree-10 rule on random elements.
TEST(Quadrature, AssemblyIntegrandsMatchDegreeTenRule) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    const RefRule oracle = collapsed_rule(6);
    int checked = 0;
    while (checked < 200) {
        const Vec2 a = random_point(rng), b = random_point(rng), c = random_point(rng);
        const auto g = quad::tri_geom(a, b, c);
        if (g.area < 0.05) continue;
        ++checked;
        double u[6], v[6], w[6];
        for (int k = 0; k < 6; ++k) u[k] = coef(rng), v[k] = coef(rng), w[k] = coef(rng);
        auto integrals = [&](const auto& pts, double out[3]) {
            out[0] = out[1] = out[2] = 0.0;
            for (const auto& p : pts) {
                const auto s = quad::p2_values(g, p.l0, p.l1, p.l2);
                double uu = 0, vv = 0, ww = 0, gu[2] = {0, 0}, gv[2] = {0, 0};
                for (int k = 0; k < 6; ++k) {
                    uu += u[k] * s.phi[k];
                    vv += v[k] * s.phi[k];
                    ww += w[k] * s.phi[k];
                    for (int d = 0; d < 2; ++d) gu[d] += u[k] * s.grad[k][d], gv[d] += v[k] * s.grad[k][d];
                }
                out[0] += p.w * g.area * uu * vv;                           // mass, degree 4
                out[1] += p.w * g.area * (gu[0] * gv[0] + gu[1] * gv[1]);  // stiffness, degree 2
                out[2] += p.w * g.area * ww * (gu[0] * vv + gu[1] * vv);   // advection, degree 5
            }
        };
        double q7[3], q10[3];
        integrals(quad::triangle7(), q7);
        integrals(oracle.pts, q10);
        for (int k = 0; k < 3; ++k) {
            const double scale = std::max(std::abs(q10[k]), 1e-3);
            EXPECT_LT(std::abs(q7[k] - q10[k]) / scale, 1e-13) << "integrand " << k;
        }
    }
}

TEST(Quadrature, ShapeFunctionsInterpolateAndSumToOne) {
    const auto g = quad::tri_geom({0.1, 0.2}, {1.3, 0.4}, {0.5, 1.7});
    const double bary[6][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.5, 0.5, 0}, {0, 0.5, 0.5}, {0.5, 0, 0.5}};
    for (int i = 0; i < 6; ++i) {
        const auto s = quad::p2_values(g, bary[i][0], bary[i][1], bary[i][2]);
        for (int k = 0; k < 6; ++k) EXPECT_NEAR(s.phi[k], i == k ? 1.0 : 0.0, 1e-15);
    }
    for (const auto& p : quad::triangle7()) {
        const auto s = quad::p2_values(g, p.l0, p.l1, p.l2);
        double sum = 0, gz = 0, gr = 0;
        for (int k = 0; k < 6; ++k) sum += s.phi[k], gz += s.grad[k][0], gr += s.grad[k][1];
        EXPECT_NEAR(sum, 1.0, 1e-14);
        EXPECT_NEAR(gz, 0.0, 1e-13);
        EXPECT_NEAR(gr, 0.0, 1e-13);
    }
}
