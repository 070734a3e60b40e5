#include <gtest/gtest.h>

#include <cmath>

#include "fsi/bench.hpp"

using namespace fsi;

namespace {

Example2Settings tiny_pulse() {
    Example2Settings s;
    s.nz = 20;
    s.nr_f = 4;
    s.nr_s = 2;
    s.dt = 1e-4;
    s.t_end = 2e-3;
    s.t_max = 1e-3;
    s.profile_times = {1e-3, 2e-3};
    return s;
}

const std::vector<double>& flow(const ColumnProbes& c) { return c.flowrate; }

}  // namespace

TEST(Example1, ExactSolutionValues) {
    const PhysicalParams p = table_t0();
    const auto axis = exact_example1(p, 250.0, 0.0, 0.0, 0.0);
    EXPECT_NEAR(axis.uz, 14.880952380952381, 1e-12);
    EXPECT_EQ(axis.ur, 0.0);
    EXPECT_EQ(axis.p, 250.0);
    EXPECT_NEAR(axis.eta_r, 250.0 / membrane_coefficients(p).C0, 1e-18);
    EXPECT_NEAR(axis.eta_r, 8.759e-4, 1e-7);
    const auto wall = exact_example1(p, 250.0, 0.0, p.L / 2, p.R);
    EXPECT_EQ(wall.uz, 0.0);
    EXPECT_DOUBLE_EQ(wall.p, 125.0);
    EXPECT_EQ(wall.d_r, wall.eta_r);
}

TEST(Example1, CoarseMeshMeetsReferenceErrors) {
    Example1Settings cfg;
    cfg.nz = 20;
    cfg.nr_f = 4;
    cfg.nr_s = 2;
    cfg.march_steps = 20;
    const ErrorReport rep = run_example1(table_t0(), cfg);
    const Example1Errors ref = example1_reference_errors();
    EXPECT_TRUE(rep.used_fixed_point);
    EXPECT_EQ(rep.steps_total, 21);
    EXPECT_LT(rep.final_increment, cfg.steady_tol);
    EXPECT_LE(rep.steady.velocity, ref.velocity);
    EXPECT_LE(rep.steady.pressure, ref.pressure);
    EXPECT_LE(rep.steady.membrane, ref.membrane);
    EXPECT_LE(rep.steady.thick, ref.thick);
    // the pressure is linear in z
    const SubMesh& f = build_rect_mesh(table_t0(), 20, 4, 2).fluid;
    for (int v = 0; v < f.num_vertices(); ++v) {
        const double z = f.ref[f.node_of_vertex[v]].z;
        EXPECT_NEAR(rep.state.p[v], 250.0 * (1.0 - z / 6.0), 1e-8 * 250.0);
    }
}

TEST(Example1, ZeroDataGivesZero) {
    Example1Settings cfg;
    cfg.nz = 10;
    cfg.nr_f = 3;
    cfg.nr_s = 2;
    cfg.march_steps = 5;
    cfg.p_in = 0.0;
    const ErrorReport rep = run_example1(table_t0(), cfg);
    EXPECT_EQ(rep.state.v.norm(), 0.0);
    EXPECT_EQ(rep.state.p.norm(), 0.0);
    EXPECT_EQ(rep.state.U.norm(), 0.0);
}

TEST(Example1, MarchingWithoutAccelerationRunsOutOfBudget) {
    Example1Settings cfg;
    cfg.nz = 10;
    cfg.nr_f = 3;
    cfg.nr_s = 2;
    cfg.march_steps = 2;
    cfg.accelerate = false;
    cfg.max_steps = 10;
    EXPECT_THROW(run_example1(table_t0(), cfg), StepFailure);
}

TEST(Probes, FlowrateOfPoiseuilleIsTheSameInEveryColumn) {
    const PhysicalParams p = table_t0();
    const Mesh m = build_rect_mesh(p, 12, 5, 1);
    Vec v = Vec::Zero(2 * m.fluid.num_nodes());
    for (int n = 0; n < m.fluid.num_nodes(); ++n) v[2 * n] = exact_example1(p, 250.0, 0.0, 0.0, m.fluid.ref[n].r).uz;
    const double Q = 250.0 * p.R * p.R * p.R / (3.0 * p.mu_f * p.L);
    for (int I = 0; I <= m.fluid.nx; ++I) EXPECT_NEAR(column_flowrate(m, m.fluid.ref, v, I), Q, 1e-12 * Q);
}

TEST(Probes, ColumnsOfAState) {
    const PhysicalParams p = table_t0();
    FsiSolver solver(p, build_rect_mesh(p, 8, 3, 1), example1_options(p, 100.0, 20.0), 1e-5);
    FsiState s = solver.fixed_point(100.0, 20.0);
    const ColumnProbes c = probe_columns(solver.mesh(), s);
    ASSERT_EQ(c.z.size(), 9u);
    for (std::size_t I = 0; I < c.z.size(); ++I) {
        EXPECT_NEAR(c.pressure[I], 100.0 - 80.0 * c.z[I] / p.L, 1e-8);
        EXPECT_NEAR(c.flowrate[I], 80.0 * p.R * p.R * p.R / (3.0 * p.mu_f * p.L), 1e-8);
        EXPECT_EQ(c.eta_r[I], s.eta[4 * I + 1]);
        EXPECT_EQ(c.xi_z[I], s.xi[4 * I]);
    }
}

TEST(Pulse, RunRecordsEveryStepAndProfiles) {
    const Example2Result r = run_example2(table_t1(), tiny_pulse());
    EXPECT_EQ(r.steps, 20);
    ASSERT_EQ(r.times.size(), 21u);
    EXPECT_EQ(r.probes.size(), 21u);
    EXPECT_EQ(r.profiles.size(), 2u);
    EXPECT_EQ(r.ledger.rows.size(), 20u);
    EXPECT_GT(*std::max_element(r.probes[10].eta_r.begin(), r.probes[10].eta_r.end()), 0.0);
    EXPECT_EQ(series_distance(r, r, flow), 0.0);

    Example2Settings every = tiny_pulse();
    every.record_every = 4;
    const Example2Result q = run_example2(table_t1(), every);
    EXPECT_EQ(q.times.size(), 6u);
    EXPECT_EQ((q.state.v - r.state.v).norm(), 0.0);  // recording does not change the run
}

TEST(Pulse, SeriesDistanceOfAConstantOffset) {
    Example2Result a, b;
    for (int n = 0; n <= 4; ++n) {
        a.times.push_back(0.5 * n);
        ColumnProbes c;
        c.z = {0.0, 1.0, 3.0};
        c.flowrate = {1.0, 2.0, 3.0};
        a.probes.push_back(c);
        for (double& x : c.flowrate) x += 0.5;
        b.probes.push_back(c);
    }
    b.times = a.times;
    EXPECT_NEAR(series_distance(a, b, flow), 0.5 * std::sqrt(2.0 * 3.0), 1e-15);
    b.times.pop_back();
    EXPECT_THROW(series_distance(a, b, flow), std::invalid_argument);
}

TEST(Sweep, ValidatesMembers) {
    EXPECT_THROW(h_sweep(table_t1(), tiny_pulse(), {0.02}), ConfigError);
    EXPECT_THROW(h_sweep(table_t1(), tiny_pulse(), {0.01, 0.02}), ConfigError);
    EXPECT_THROW(h_sweep(table_t1(), tiny_pulse(), {0.2, 0.01}), ConfigError);
}

TEST(Sweep, TwoMemberRun) {
    const SweepReport rep = h_sweep(table_t1(), tiny_pulse(), {0.02, 0.01}, 0.12, 1);
    ASSERT_EQ(rep.pairs.size(), 1u);
    EXPECT_EQ(rep.pairs[0].h_a, 0.02);
    EXPECT_EQ(rep.pairs[0].h_b, 0.01);
    EXPECT_GT(rep.pairs[0].flowrate, 0.0);
    EXPECT_GT(rep.pairs[0].displacement, 0.0);
    EXPECT_FALSE(rep.contracting());  // one pair is not a trend
}

TEST(Sweep, ContractionCriterion) {
    SweepReport r;
    r.pairs = {{0.02, 0.01, 4.0, 4.0, 4.0}, {0.01, 0.005, 2.0, 2.0, 2.0}, {0.005, 0.0025, 1.0, 1.0, 1.0}};
    EXPECT_TRUE(r.contracting());
    r.pairs[2].pressure = 2.5;
    EXPECT_FALSE(r.contracting());
    r.pairs[2].pressure = 1.0;
    r.pairs[2].displacement = 1.9;
    EXPECT_TRUE(r.contracting(0.5));
    EXPECT_FALSE(r.contracting(0.4));
}

TEST(Convergence, SlopeOfAPowerLaw) {
    const std::vector<double> dt = {4e-4, 2e-4, 1e-4, 5e-5};
    std::vector<double> e;
    for (double h : dt) e.push_back(3.0 * std::pow(h, 1.3));
    EXPECT_NEAR(loglog_slope(dt, e), 1.3, 1e-12);
    EXPECT_THROW(loglog_slope({1e-3}, {1.0}), std::invalid_argument);
}

TEST(Convergence, RejectsStepsThatDoNotDivideTheHorizon) {
    ConvergenceSettings c;
    c.nz = 10;
    c.nr_f = 3;
    c.nr_s = 2;
    c.t_end = 1e-3;
    c.dt_ref = 1e-4;
    c.dts = {3e-4, 2e-4};
    EXPECT_THROW(dt_convergence(table_t1(), c), ConfigError);
}

TEST(Stability, SmallRunPassesAndControlBlowsUp) {
    StabilitySettings s;
    s.nz = 20;
    s.nr_f = 4;
    s.nr_s = 2;
    const StabilityRun run = run_stability(table_t1(), s, 1e-3);
    EXPECT_EQ(run.steps, 30);
    EXPECT_TRUE(run.audit.pass) << run.audit.summary();
    EXPECT_GT(run.max_energy, 0.0);

    const BlowupReport dn = run_dirichlet_neumann_control(table_t1(), 1e-4);
    EXPECT_TRUE(dn.blew_up) << "growth " << dn.growth;
    EXPECT_GT(dn.step, 0);
}
