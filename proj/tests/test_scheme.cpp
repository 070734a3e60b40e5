#include <gtest/gtest.h>

#include <cmath>

#include "fsi/scheme.hpp"

using namespace fsi;

namespace {

// smooth displacement that vanishes on the clamped ends and satisfies the wall constraint
Vec bump_displacement(const FsiSolver& solver, double amp) {
    const SubMesh& sm = solver.mesh().structure;
    const PhysicalParams& p = solver.params();
    Vec U = Vec::Zero(2 * sm.num_nodes());
    for (int n = 0; n < sm.num_nodes(); ++n) {
        const double s = std::sin(M_PI * sm.ref[n].z / p.L);
        const double depth = (p.R + p.H - sm.ref[n].r) / p.H;
        U[2 * n] = 0.3 * amp * s * s * depth;
        U[2 * n + 1] = amp * s * (0.5 + 0.5 * depth);
    }
    const auto& mask = solver.structure_mask();
    for (Eigen::Index i = 0; i < U.size(); ++i)
        if (mask[i]) U[i] = 0.0;
    return U;
}

int axis_node_at(const SubMesh& f, double z) {
    for (int n = 0; n < f.num_nodes(); ++n)
        if (f.ref[n].r == 0.0 && std::abs(f.ref[n].z - z) < 1e-12) return n;
    return -1;
}

}  // namespace

TEST(Structure, MidpointRuleConservesEnergy) {
    SchemeOptions opt;
    opt.fluid_active = false;
    opt.move_mesh = false;
    const PhysicalParams p = table_t1();
    FsiSolver solver(p, build_rect_mesh(p, 20, 3, 2), opt, 1e-4);
    FsiState s = solver.initial_state();
    s.U = bump_displacement(solver, 1e-3);
    s.eta = structure_trace(solver.mesh(), s.U);
    const double E0 = solver.energies(s).total();
    ASSERT_GT(E0, 0.0);
    double worst = 0.0;
    for (int n = 0; n < 1000; ++n) {
        solver.step(s, 0.0, 0.0);
        worst = std::max(worst, std::abs(solver.energies(s).total() - E0) / E0);
    }
    EXPECT_LT(worst, 1e-9);
    EXPECT_GT(s.V.norm(), 0.0);  // it actually oscillates
}

TEST(Fluid, EnergyDecaysWithRigidWalls) {
    SchemeOptions opt;
    opt.structure_active = false;
    opt.rigid_interface = true;
    opt.advection = false;
    const PhysicalParams p = table_t1();
    const Mesh m = build_rect_mesh(p, 16, 5, 1);
    FsiSolver solver(p, m, opt, 1e-3);
    FsiState s = solver.initial_state();
    // kick it with a pressure drop, then let it relax
    for (int n = 0; n < 5; ++n) solver.step(s, 500.0, 0.0);
    const double E_kick = solver.energies(s).Ef;
    double E = E_kick;
    ASSERT_GT(E, 0.0);
    for (int n = 0; n < 200; ++n) {
        const StepInfo info = solver.step(s, 0.0, 0.0);
        const double E1 = solver.energies(s).Ef;
        EXPECT_LE(E1, E * (1.0 + 1e-12));
        EXPECT_GE(info.ledger.relative_slack(), -1e-9);
        E = E1;
    }
    EXPECT_LT(E, E_kick);
}

TEST(Fluid, StokesLimitIsPoiseuille) {
    SchemeOptions opt;
    opt.structure_active = false;
    opt.rigid_interface = true;
    opt.advection = false;
    opt.orthogonal_ends = true;
    const PhysicalParams p = table_t0();
    const Mesh m = build_rect_mesh(p, 12, 4, 1);
    FsiSolver solver(p, m, opt, 1e6);
    FsiState s = solver.initial_state();
    for (int n = 0; n < 3; ++n) solver.step(s, 250.0, 0.0);
    const int c = axis_node_at(m.fluid, p.L / 2);
    ASSERT_GE(c, 0);
    const double expect = 250.0 * p.R * p.R / (2.0 * p.mu_f * p.L);
    EXPECT_NEAR(s.v[2 * c], expect, 1e-6);
    EXPECT_NEAR(expect, 14.880952380952381, 1e-12);
}

TEST(Scheme, ZeroDataStaysAtRest) {
    const PhysicalParams p = table_t1();
    const Mesh m = build_rect_mesh(p, 10, 4, 2);
    for (const SchemeOptions opt : {SchemeOptions::full(), SchemeOptions::stability()}) {
        PhysicalParams q = p;
        q.beta = opt.mode == SchemeMode::Stability ? 0.0 : 1.0;
        FsiSolver solver(q, m, opt, 1e-4);
        FsiState s = solver.initial_state();
        for (int n = 0; n < 10; ++n) solver.step(s, 0.0, 0.0);
        EXPECT_EQ(s.v.norm(), 0.0);
        EXPECT_EQ(s.p.norm(), 0.0);
        EXPECT_EQ(s.U.norm(), 0.0);
        EXPECT_EQ(s.eta.norm(), 0.0);
        EXPECT_EQ(s.n, 10);
        EXPECT_NEAR(s.t, 1e-3, 1e-15);
        for (std::size_t i = 0; i < s.X.size(); ++i) {
            EXPECT_EQ(s.X[i].z, m.fluid.ref[i].z);
            EXPECT_EQ(s.X[i].r, m.fluid.ref[i].r);
        }
    }
}

TEST(Scheme, PulseStepsAreDivergenceFreeAndKinematicallyCoupled) {
    const PhysicalParams p = table_t1();
    const Mesh m = build_rect_mesh(p, 25, 5, 2);
    RunSettings rs;
    rs.pressure = PressureKind::Pulse;
    for (const SchemeOptions opt : {SchemeOptions::full(), SchemeOptions::stability()}) {
        PhysicalParams q = p;
        q.beta = opt.mode == SchemeMode::Stability ? 0.0 : 1.0;
        FsiSolver solver(q, m, opt, 1e-4);
        FsiState s = solver.initial_state();
        for (int n = 0; n < 30; ++n) {
            const StepInfo info = solver.step(s, inlet_pressure(rs, (n + 1) * 1e-4), 0.0);
            EXPECT_LT(info.divergence_residual, 1e-9 * std::max(1.0, s.v.norm()));
            ASSERT_TRUE(std::isfinite(info.ledger.total()));
        }
        EXPECT_GT(s.v.norm(), 0.0);
        // the membrane velocity is the fluid trace, the membrane displacement the structure trace
        const Vec xi_f = fluid_trace(m, s.v);
        EXPECT_EQ((s.xi - xi_f).norm(), 0.0);
        EXPECT_EQ((s.eta - structure_trace(m, s.U)).norm(), 0.0);
        // the fluid interface vertices sit on the deformed membrane (midpoints follow the straight edges)
        double gap = 0.0;
        for (int k = 0; k < m.num_trace_nodes(); k += 2) gap = std::max(gap, std::abs(s.X[m.trace_to_fluid(k)].r - (p.R + s.eta[2 * k + 1])));
        EXPECT_LT(gap, 1e-14);
        EXPECT_GT(structure_trace(m, s.U).cwiseAbs().maxCoeff(), 0.0);
    }
}

TEST(Scheme, StabilityLedgerHoldsAtLargeStep) {
    PhysicalParams p = table_t1();
    p.beta = 0.0;
    const Mesh m = build_rect_mesh(p, 50, 8, 3);
    RunSettings rs;
    rs.pressure = PressureKind::Pulse;
    rs.t_max = 0.015;
    const double dt = 1e-3;
    FsiSolver solver(p, m, SchemeOptions::stability(), dt);
    FsiState s = solver.initial_state();
    EnergyLedger L;
    L.initial = solver.energies(s);
    for (int n = 1; n * dt <= 0.03 + 1e-12; ++n) L.rows.push_back(solver.step(s, inlet_pressure(rs, n * dt), 0.0).ledger);
    const auto rep = check_energy_inequality(L, p);
    EXPECT_TRUE(rep.pass) << rep.summary();
    double peak = 0.0;
    for (const auto& r : L.rows) peak = std::max(peak, r.total());
    EXPECT_GT(peak, 0.0);
}

TEST(Scheme, FixedPointIsReproducedByAStep) {
    SchemeOptions opt;
    opt.move_mesh = false;
    opt.advection = false;
    const PhysicalParams p = table_t0();
    FsiSolver solver(p, build_rect_mesh(p, 30, 6, 2), opt, 1e-5);
    FsiState s = solver.fixed_point(250.0, 0.0);
    const FsiState s0 = s;
    solver.step(s, 250.0, 0.0);
    EXPECT_LT((s.v - s0.v).norm(), 1e-8 * s0.v.norm());
    EXPECT_LT((s.p - s0.p).norm(), 1e-8 * s0.p.norm());
    EXPECT_LT((s.U - s0.U).norm(), 1e-8 * s0.U.norm());
    EXPECT_THROW(FsiSolver(p, build_rect_mesh(p, 10, 4, 2), SchemeOptions::full(), 1e-5).fixed_point(1.0, 0.0),
                 std::logic_error);
}

TEST(Scheme, HugeLoadReportsTheFailingStep) {
    PhysicalParams p = table_t1();
    p.beta = 0.0;
    FsiSolver solver(p, build_rect_mesh(p, 10, 4, 2), SchemeOptions::stability(), 1e-2);
    FsiState s = solver.initial_state();
    int failed = -1;
    try {
        for (int n = 0; n < 50; ++n) solver.step(s, -1e9, 0.0);
    } catch (const StepFailure& e) {
        failed = e.step;
    }
    EXPECT_GE(failed, 1);
}

TEST(Scheme, InvalidStepSizeRejected) {
    const PhysicalParams p = table_t1();
    EXPECT_THROW(FsiSolver(p, build_rect_mesh(p, 4, 2, 1), SchemeOptions::full(), 0.0), std::invalid_argument);
}
