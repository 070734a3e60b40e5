#include <gtest/gtest.h>

#include <cmath>

#include "fsi/energy.hpp"
#include "fsi/scheme.hpp"

using namespace fsi;

namespace {

struct Fixture {
    PhysicalParams p = table_t1();
    Mesh m = build_rect_mesh(p, 10, 4, 2);
    Vec v = Vec::Zero(2 * m.fluid.num_nodes());
    Vec U = Vec::Zero(2 * m.structure.num_nodes());
    Vec V = U;
    Vec eta = Vec::Zero(2 * m.num_trace_nodes());
    Vec xi = eta;
    Energies of(bool radial = false) const { return discrete_energies(m, m.fluid.ref, p, v, U, V, eta, xi, radial); }
};

EnergyLedger synthetic_ledger(int steps) {
    EnergyLedger L;
    L.initial = {1.0, 0.5, 0.25};
    double E = L.initial.total();
    for (int n = 1; n <= steps; ++n) {
        LedgerRow r;
        r.n = n;
        r.Ef = 0.9 * L.initial.Ef * std::pow(0.99, n);
        r.Es = 0.9 * L.initial.Es * std::pow(0.99, n);
        r.Em = 0.9 * L.initial.Em * std::pow(0.99, n);
        r.dissipation = 0.01 * (E - r.total());
        r.pressure_sq = 1e-3;
        close_row(r, E);
        E = r.total();
        L.rows.push_back(r);
    }
    return L;
}

}  // namespace

TEST(DiscreteEnergies, ZeroStateIsZero) {
    const Fixture f;
    const Energies e = f.of();
    EXPECT_EQ(e.Ef, 0.0);
    EXPECT_EQ(e.Es, 0.0);
    EXPECT_EQ(e.Em, 0.0);
    EXPECT_EQ(f.of(true).total(), 0.0);
}

TEST(DiscreteEnergies, UniformFluidVelocity) {
    Fixture f;
    for (int n = 0; n < f.m.fluid.num_nodes(); ++n) f.v[2 * n] = 2.0;
    EXPECT_NEAR(f.of().Ef, 0.5 * f.p.rho_f * 4.0 * f.p.L * f.p.R, 1e-12);
}

TEST(DiscreteEnergies, RadialStretchOfTheThickLayer) {
    Fixture f;
    for (int n = 0; n < f.m.structure.num_nodes(); ++n) f.U[2 * n + 1] = f.m.structure.ref[n].r - f.p.R;
    const double H = f.p.H;
    const double expect = 0.5 * f.p.L * (H * (2.0 * f.p.mu_s + f.p.lambda_s) + f.p.gamma * H * H * H / 3.0);
    EXPECT_NEAR(f.of().Es / expect, 1.0, 1e-12);

    Fixture g;
    for (int n = 0; n < g.m.structure.num_nodes(); ++n) g.V[2 * n + 1] = 3.0;
    EXPECT_NEAR(g.of().Es, 0.5 * g.p.rho_s * 9.0 * g.p.L * g.p.H, 1e-9);
}

TEST(DiscreteEnergies, MembraneKineticAndRadialElastic) {
    Fixture f;
    for (int k = 0; k < f.m.num_trace_nodes(); ++k) f.xi[2 * k + 1] = 1.0;
    EXPECT_NEAR(f.of().Em, 0.5 * f.p.rho_m * f.p.h * f.p.L, 1e-12);

    Fixture g;
    for (int k = 0; k < g.m.num_trace_nodes(); ++k) g.eta[2 * k + 1] = 0.01, g.eta[2 * k] = 0.3;
    const double C0 = membrane_coefficients(g.p).C0;
    // the radial-only form ignores the axial component
    EXPECT_NEAR(g.of(true).Em / (0.5 * C0 * 1e-4 * g.p.L), 1.0, 1e-12);
}

TEST(Ledger, CloseRowArithmetic) {
    LedgerRow r;
    r.Ef = 1.0;
    r.Es = 2.0;
    r.Em = 3.0;
    r.jump_f = 0.1;
    r.jump_m = 0.2;
    r.dissipation = 0.3;
    r.work = 0.5;
    close_row(r, 6.5);
    EXPECT_DOUBLE_EQ(r.slack, 6.5 + 0.5 - 6.6);
    EXPECT_DOUBLE_EQ(r.balance_residual, r.slack - 0.3);
    EXPECT_DOUBLE_EQ(r.scale, 7.0);
    EXPECT_DOUBLE_EQ(r.relative_slack(), r.slack / 7.0);
}

TEST(Ledger, DissipativeHistoryPasses) {
    const auto L = synthetic_ledger(200);
    const auto rep = check_energy_inequality(L, table_t1());
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.first_violation, -1);
    EXPECT_GE(rep.worst_relative_slack, 0.0);
    EXPECT_EQ(rep.korn_trace_constant, 0.0);  // nothing to absorb
    EXPECT_EQ(rep.summary().rfind("PASS", 0), 0u);
}

TEST(Ledger, InflatedEnergyFails) {
    auto L = synthetic_ledger(50);
    L.rows[30].Ef *= 3.0;
    const double E_prev = L.rows[29].total();
    close_row(L.rows[30], E_prev);
    const auto rep = check_energy_inequality(L, table_t1());
    EXPECT_FALSE(rep.pass);
    EXPECT_EQ(rep.first_violation, 31);
    EXPECT_EQ(rep.worst_step, 31);
    EXPECT_LT(rep.worst_relative_slack, -1e-3);
    EXPECT_GT(rep.korn_trace_constant, 0.0);
    EXPECT_NE(rep.summary().find("first_violation_step=31"), std::string::npos);
}

TEST(Ledger, NanCountsAsViolation) {
    auto L = synthetic_ledger(5);
    L.rows[2].slack = std::nan("");
    const auto rep = check_energy_inequality(L, table_t1());
    EXPECT_FALSE(rep.pass);
    EXPECT_EQ(rep.first_violation, 3);
}

TEST(Ledger, ZeroDataRunPasses) {
    const PhysicalParams p = table_t1();
    const Mesh m = build_rect_mesh(p, 10, 4, 2);
    for (const SchemeOptions opt : {SchemeOptions::full(), SchemeOptions::stability()}) {
        PhysicalParams q = p;
        q.beta = opt.mode == SchemeMode::Stability ? 0.0 : 1.0;
        FsiSolver solver(q, m, opt, 1e-4);
        FsiState s = solver.initial_state();
        EnergyLedger L;
        L.initial = solver.energies(s);
        for (int n = 0; n < 20; ++n) L.rows.push_back(solver.step(s, 0.0, 0.0).ledger);
        const auto rep = check_energy_inequality(L, q);
        EXPECT_TRUE(rep.pass) << rep.summary();
        EXPECT_EQ(L.rows.back().total(), 0.0);
    }
}
