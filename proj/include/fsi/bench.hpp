/**
 * @file bench.hpp
 * @brief Benchmark drivers: exact-solution comparison, pressure pulse, thin-layer
 *        sweep, time-step convergence and the stability study.
 */
#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "energy.hpp"
#include "fem.hpp"
#include "io.hpp"
#include "mesh.hpp"
#include "params.hpp"
#include "scheme.hpp"

namespace fsi {

// ====================================================================== Example 1

struct ExactExample1 {
    double uz = 0.0, ur = 0.0, p = 0.0, eta_r = 0.0, d_r = 0.0;
};

/// Steady Poiseuille flow in the channel with the wall displaced by p/C0.
inline ExactExample1 exact_example1(const PhysicalParams& prm, double p_in, double p_out, double z, double r) {
    const MembraneCoeffs c = membrane_coefficients(prm);
    ExactExample1 e;
    e.uz = (p_in - p_out) / (2.0 * prm.mu_f * prm.L) * (prm.R * prm.R - r * r);
    e.p = p_in + (p_out - p_in) * z / prm.L;
    e.eta_r = e.p / c.C0;
    e.d_r = e.eta_r;
    return e;
}

struct Example1Settings {
    int nz = 60, nr_f = 10, nr_s = 4;
    double dt = 1e-5;
    double p_in = 250.0, p_out = 0.0;
    int march_steps = 200;       ///< steps marched from rest before the steady solve
    double steady_tol = 1e-12;   ///< bound on the interface displacement change of one step
    bool accelerate = true;      ///< solve for the fixed point instead of marching to it
    int max_steps = 2000000;     ///< marching budget when accelerate is off
};

struct Example1Errors {
    double velocity = 0.0, pressure = 0.0, membrane = 0.0, thick = 0.0;
};

struct ErrorReport {
    Example1Errors steady;
    Example1Errors after_march;   ///< errors after `march_steps` steps from rest
    int march_steps = 0;
    int steps_total = 0;          ///< steps actually taken (marching plus the verification step)
    double final_increment = 0.0; ///< max |eta^{n+1} - eta^n| at the reported state
    bool used_fixed_point = false;
    int nz = 0, nr_f = 0, nr_s = 0;
    double dt = 0.0;
    double wall_seconds = 0.0;
    EnergyLedger ledger;
    FsiState state;
};

/// Reference magnitudes of the four errors, printed next to the computed ones.
inline Example1Errors example1_reference_errors() { return {7.78e-4, 1.17e-4, 3.82e-5, 3.82e-5}; }

inline SchemeOptions example1_options(const PhysicalParams& prm, double p_in, double p_out) {
    SchemeOptions o = SchemeOptions::full();
    o.move_mesh = false;
    o.advection = false;
    o.radial_only_structure = true;
    o.radial_only_interface = true;
    o.orthogonal_ends = true;
    o.end_data = true;
    const MembraneCoeffs c = membrane_coefficients(prm);
    o.end_eta_in = p_in / c.C0;
    o.end_eta_out = p_out / c.C0;
    return o;
}

namespace detail {
inline double rel_l2(const SpMat& M, const Vec& u, const Vec& ue) {
    const Vec e = u - ue;
    const double den = ue.dot(M * ue);
    const double num = e.dot(M * e);
    return den > 0.0 ? std::sqrt(std::max(num, 0.0) / den) : std::sqrt(std::max(num, 0.0));
}
}  // namespace detail

/// Relative L2 errors of a state against the exact steady solution.
inline Example1Errors example1_errors(const Mesh& m, const PhysicalParams& prm, const FsiState& s, double p_in,
                                      double p_out) {
    const SubMesh& f = m.fluid;
    const SubMesh& st = m.structure;
    Vec ve = Vec::Zero(2 * f.num_nodes());
    for (int n = 0; n < f.num_nodes(); ++n) ve[2 * n] = exact_example1(prm, p_in, p_out, f.ref[n].z, f.ref[n].r).uz;
    Vec pe(f.num_vertices());
    for (int v = 0; v < f.num_vertices(); ++v) {
        const Vec2& x = f.ref[f.node_of_vertex[v]];
        pe[v] = exact_example1(prm, p_in, p_out, x.z, x.r).p;
    }
    Vec ee = Vec::Zero(2 * m.num_trace_nodes());
    for (int k = 0; k < m.num_trace_nodes(); ++k)
        ee[2 * k + 1] = exact_example1(prm, p_in, p_out, m.trace_z(k), prm.R).eta_r;
    Vec de = Vec::Zero(2 * st.num_nodes());
    for (int n = 0; n < st.num_nodes(); ++n)
        de[2 * n + 1] = exact_example1(prm, p_in, p_out, st.ref[n].z, st.ref[n].r).d_r;

    Example1Errors e;
    e.velocity = detail::rel_l2(assemble_mass(f, f.ref), s.v, ve);
    e.pressure = detail::rel_l2(assemble_p1_mass(f, f.ref), s.p, pe);
    e.membrane = detail::rel_l2(assemble_trace_mass(m), s.eta, ee);
    e.thick = detail::rel_l2(assemble_mass(st, st.ref), s.U, de);
    return e;
}

/**
 * Marches the linear configuration from rest and reports steady-state errors.
 * The steady state is the fixed point of the step map; by default it is computed
 * directly after `march_steps` steps and confirmed by one more step whose interface
 * displacement change must stay below `steady_tol`.
 */
inline ErrorReport run_example1(const PhysicalParams& prm, const Example1Settings& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    PhysicalParams p = prm;
    validate(p);
    FsiSolver solver(p, build_rect_mesh(p, cfg.nz, cfg.nr_f, cfg.nr_s), example1_options(p, cfg.p_in, cfg.p_out), cfg.dt);
    ErrorReport rep;
    rep.nz = cfg.nz;
    rep.nr_f = cfg.nr_f;
    rep.nr_s = cfg.nr_s;
    rep.dt = cfg.dt;
    rep.march_steps = cfg.march_steps;

    FsiState s = solver.initial_state();
    rep.ledger.initial = solver.energies(s);
    auto advance = [&](FsiState& st) {
        const Vec eta0 = st.eta;
        StepInfo info = solver.step(st, cfg.p_in, cfg.p_out);
        rep.ledger.rows.push_back(info.ledger);
        ++rep.steps_total;
        return (st.eta - eta0).lpNorm<Eigen::Infinity>();
    };

    double incr = std::numeric_limits<double>::infinity();
    for (int n = 0; n < cfg.march_steps; ++n) incr = advance(s);
    rep.after_march = example1_errors(solver.mesh(), p, s, cfg.p_in, cfg.p_out);

    if (cfg.accelerate) {
        FsiState fp = solver.fixed_point(cfg.p_in, cfg.p_out);
        fp.t = s.t;
        fp.n = s.n;
        s = fp;
        incr = advance(s);
        rep.used_fixed_point = true;
    } else {
        while (!(incr < cfg.steady_tol) && rep.steps_total < cfg.max_steps) incr = advance(s);
    }
    rep.final_increment = incr;
    if (!(incr < cfg.steady_tol))
        throw StepFailure(rep.steps_total, "no steady state within the step budget (last increment " +
                                               std::to_string(incr) + ")");
    rep.steady = example1_errors(solver.mesh(), p, s, cfg.p_in, cfg.p_out);
    rep.state = s;
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ====================================================================== probes

/// Per vertex column observables of a state.
struct ColumnProbes {
    std::vector<double> z;        ///< reference axial position of the column
    std::vector<double> flowrate; ///< flux of v through the column polyline
    std::vector<double> pressure; ///< cross-section mean pressure
    std::vector<double> eta_z, eta_r, xi_z, xi_r;
};

/// Flux of v across the vertical vertex column I, with the edge rule used everywhere else.
inline double column_flowrate(const Mesh& m, const std::vector<Vec2>& X, const Vec& v, int I) {
    const SubMesh& f = m.fluid;
    double q = 0.0;
    for (int J = 0; J < f.ny; ++J) {
        const int a = f.node(2 * I, 2 * J), b = f.node(2 * I, 2 * J + 2), mid = f.node(2 * I, 2 * J + 1);
        const double tz = X[b].z - X[a].z, tr = X[b].r - X[a].r;
        const int nodes[3] = {a, b, mid};
        for (const auto& qp : quad::gauss3()) {
            double phi[3], dphi[3];
            quad::p2_line(qp.s, phi, dphi);
            double vz = 0.0, vr = 0.0;
            for (int k = 0; k < 3; ++k) {
                vz += phi[k] * v[2 * nodes[k]];
                vr += phi[k] * v[2 * nodes[k] + 1];
            }
            q += qp.w * (vz * tr - vr * tz);
        }
    }
    return q;
}

inline ColumnProbes probe_columns(const Mesh& m, const FsiState& s) {
    const SubMesh& f = m.fluid;
    ColumnProbes c;
    for (int I = 0; I <= f.nx; ++I) {
        const int k = 2 * I;
        c.z.push_back(m.trace_z(k));
        c.flowrate.push_back(column_flowrate(m, s.X, s.v, I));
        double area = 0.0, integral = 0.0;
        for (int J = 0; J < f.ny; ++J) {
            const int a = f.node(k, 2 * J), b = f.node(k, 2 * J + 2);
            const double len = std::hypot(s.X[b].z - s.X[a].z, s.X[b].r - s.X[a].r);
            integral += 0.5 * len * (s.p[f.vertex(I, J)] + s.p[f.vertex(I, J + 1)]);
            area += len;
        }
        c.pressure.push_back(area > 0.0 ? integral / area : 0.0);
        c.eta_z.push_back(s.eta[2 * k]);
        c.eta_r.push_back(s.eta[2 * k + 1]);
        c.xi_z.push_back(s.xi[2 * k]);
        c.xi_r.push_back(s.xi[2 * k + 1]);
    }
    return c;
}

// ====================================================================== Example 2

struct Example2Settings {
    int nz = 120, nr_f = 16, nr_s = 6;
    double dt = 5e-5;
    double t_end = 0.012;
    PressureKind pressure = PressureKind::Pulse;
    double p_max = 1.333e4;
    double t_max = 0.003;
    double p_in = 0.0;                      ///< constant inlet value when pressure is Constant
    double p_out = 0.0;
    int record_every = 1;                   ///< probe cadence in steps
    std::vector<double> profile_times = {0.001, 0.006, 0.008, 0.012};
    int snapshot_every = 0;                 ///< VTK cadence in steps, 0 for none
    std::filesystem::path snapshot_dir;     ///< where VTK files go when snapshot_every > 0
    SchemeOptions options = SchemeOptions::full();
};

struct Example2Result {
    std::vector<double> times;               ///< t^n, n = 0..N
    std::vector<ColumnProbes> probes;        ///< one per entry of times
    std::map<double, ColumnProbes> profiles; ///< requested profile time -> probes at the nearest step
    EnergyLedger ledger;
    InequalityReport audit;
    std::vector<std::string> snapshots;
    double wall_seconds = 0.0;
    int steps = 0;
    FsiState state;
};

/// Pressure-pulse run of the full scheme from rest.
inline Example2Result run_example2(const PhysicalParams& prm, const Example2Settings& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    validate(prm);
    if (!(cfg.dt > 0.0) || !(cfg.t_end > 0.0)) throw ConfigError("invariant violation: dt and t_end must be positive");
    if (cfg.record_every < 1) throw ConfigError("invariant violation: record_every must be at least 1");
    RunSettings rs;
    rs.pressure = cfg.pressure;
    rs.p_max = cfg.p_max;
    rs.t_max = cfg.t_max;
    rs.p_in = cfg.p_in;
    rs.p_out = cfg.p_out;
    FsiSolver solver(prm, build_rect_mesh(prm, cfg.nz, cfg.nr_f, cfg.nr_s), cfg.options, cfg.dt);
    const Mesh& m = solver.mesh();
    Example2Result res;
    FsiState s = solver.initial_state();
    res.ledger.initial = solver.energies(s);
    res.times.push_back(0.0);
    res.probes.push_back(probe_columns(m, s));

    const int N = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    auto snapshot = [&](int n) {
        if (cfg.snapshot_every <= 0 || n % cfg.snapshot_every != 0) return;
        const std::string name = "snapshot_" + std::to_string(n) + ".vtk";
        write_vtk(s, m, cfg.snapshot_dir / name);
        res.snapshots.push_back(name);
    };
    snapshot(0);
    for (int n = 1; n <= N; ++n) {
        const double t = n * cfg.dt;
        StepInfo info = solver.step(s, inlet_pressure(rs, t), outlet_pressure(rs, t));
        res.ledger.rows.push_back(info.ledger);
        const bool record = n % cfg.record_every == 0 || n == N;
        if (record) {
            res.times.push_back(t);
            res.probes.push_back(probe_columns(m, s));
        }
        for (double tp : cfg.profile_times)
            if (std::abs(t - tp) <= 0.5 * cfg.dt + 1e-15)
                res.profiles[tp] = record ? res.probes.back() : probe_columns(m, s);
        snapshot(n);
    }
    res.steps = N;
    res.audit = check_energy_inequality(res.ledger, prm);
    res.state = std::move(s);
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

// ====================================================================== h sweep

struct SweepPair {
    double h_a = 0.0, h_b = 0.0;
    double flowrate = 0.0, pressure = 0.0, displacement = 0.0;
};

struct SweepReport {
    std::vector<double> hs;
    std::vector<Example2Result> members;
    std::vector<SweepPair> pairs;

    /// Strictly decreasing consecutive differences with last/first <= ratio, per observable.
    bool contracting(double ratio = 0.5) const {
        if (pairs.size() < 2) return false;
        auto check = [&](auto get) {
            for (std::size_t i = 1; i < pairs.size(); ++i)
                if (!(get(pairs[i]) < get(pairs[i - 1]))) return false;
            return get(pairs.back()) <= ratio * get(pairs.front());
        };
        return check([](const SweepPair& p) { return p.flowrate; }) &&
               check([](const SweepPair& p) { return p.pressure; }) &&
               check([](const SweepPair& p) { return p.displacement; });
    }
};

/// Discrete L2(0,T; L2(0,L)) distance of two probe series on the same grid.
inline double series_distance(const Example2Result& a, const Example2Result& b,
                              const std::function<const std::vector<double>&(const ColumnProbes&)>& get) {
    if (a.times.size() != b.times.size()) throw std::invalid_argument("series lengths differ");
    double sum = 0.0;
    for (std::size_t n = 1; n < a.times.size(); ++n) {
        const double dt = a.times[n] - a.times[n - 1];
        const auto& za = a.probes[n].z;
        const auto& fa = get(a.probes[n]);
        const auto& fb = get(b.probes[n]);
        if (fa.size() != fb.size()) throw std::invalid_argument("probe grids differ");
        for (std::size_t k = 0; k + 1 < fa.size(); ++k) {
            const double dz = za[k + 1] - za[k];
            const double e0 = fa[k] - fb[k], e1 = fa[k + 1] - fb[k + 1];
            sum += dt * dz * 0.5 * (e0 * e0 + e1 * e1);
        }
    }
    return std::sqrt(sum);
}

/**
 * Runs the pulse problem for each membrane thickness with h + H fixed and compares
 * consecutive members. Members run on up to `threads` worker threads.
 */
inline SweepReport h_sweep(const PhysicalParams& prm, const Example2Settings& cfg,
                           const std::vector<double>& hs = {0.02, 0.01, 0.005, 0.0025}, double total = 0.12,
                           unsigned threads = 0) {
    if (hs.size() < 2) throw ConfigError("h sweep needs at least two members");
    for (std::size_t i = 0; i < hs.size(); ++i) {
        if (!(hs[i] > 0.0) || !(hs[i] < total)) throw ConfigError("invariant violation: sweep h out of (0, h+H)");
        if (i && !(hs[i] < hs[i - 1])) throw ConfigError("invariant violation: sweep h must strictly decrease");
    }
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    SweepReport rep;
    rep.hs = hs;
    rep.members.resize(hs.size());
    std::size_t next = 0;
    while (next < hs.size()) {
        std::vector<std::future<Example2Result>> batch;
        const std::size_t first = next;
        for (; next < hs.size() && next - first < threads; ++next) {
            PhysicalParams p = prm;
            p.h = hs[next];
            p.H = total - hs[next];
            batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred,
                                       [p, cfg] { return run_example2(p, cfg); }));
        }
        for (std::size_t i = 0; i < batch.size(); ++i) rep.members[first + i] = batch[i].get();
    }
    for (std::size_t i = 1; i < hs.size(); ++i) {
        SweepPair pr;
        pr.h_a = hs[i - 1];
        pr.h_b = hs[i];
        const auto& a = rep.members[i - 1];
        const auto& b = rep.members[i];
        pr.flowrate = series_distance(a, b, [](const ColumnProbes& c) -> const std::vector<double>& { return c.flowrate; });
        pr.pressure = series_distance(a, b, [](const ColumnProbes& c) -> const std::vector<double>& { return c.pressure; });
        pr.displacement = series_distance(a, b, [](const ColumnProbes& c) -> const std::vector<double>& { return c.eta_r; });
        rep.pairs.push_back(pr);
    }
    return rep;
}

// ====================================================================== dt convergence

struct ConvergenceSettings {
    int nz = 60, nr_f = 8, nr_s = 3;
    double t_end = 0.004;
    std::vector<double> dts = {4e-4, 2e-4, 1e-4, 5e-5};
    double dt_ref = 1.25e-5;
    double p_max = 1.333e4;
    double t_max = 0.003;
    SchemeOptions options = SchemeOptions::full();
};

struct ConvergenceRow {
    double dt = 0.0;
    double displacement = 0.0, velocity = 0.0, pressure = 0.0;
};

struct ConvergenceReport {
    std::vector<ConvergenceRow> rows;
    double slope_displacement = 0.0, slope_velocity = 0.0, slope_pressure = 0.0;
    double wall_seconds = 0.0;
};

/// Least-squares slope of log(e) against log(dt).
inline double loglog_slope(const std::vector<double>& dt, const std::vector<double>& e) {
    if (dt.size() != e.size() || dt.size() < 2) throw std::invalid_argument("slope needs two or more points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(dt.size());
    for (std::size_t i = 0; i < dt.size(); ++i) {
        const double x = std::log(dt[i]), y = std::log(e[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Errors at t_end against a fine-step reference on the same mesh.
inline ConvergenceReport dt_convergence(const PhysicalParams& prm, const ConvergenceSettings& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    auto run = [&](double dt) {
        Example2Settings s;
        s.nz = cfg.nz;
        s.nr_f = cfg.nr_f;
        s.nr_s = cfg.nr_s;
        s.dt = dt;
        s.t_end = cfg.t_end;
        s.p_max = cfg.p_max;
        s.t_max = cfg.t_max;
        s.options = cfg.options;
        s.profile_times.clear();
        const double steps = cfg.t_end / dt;
        if (std::abs(steps - std::round(steps)) > 1e-9 * steps)
            throw ConfigError("invariant violation: t_end must be a multiple of every dt");
        return run_example2(prm, s).state;
    };
    const FsiState ref = run(cfg.dt_ref);
    const Mesh mesh = build_rect_mesh(prm, cfg.nz, cfg.nr_f, cfg.nr_s);
    const SpMat Mv = assemble_mass(mesh.fluid, ref.X);
    const SpMat Mp = assemble_p1_mass(mesh.fluid, ref.X);
    const SpMat Mt = assemble_trace_mass(mesh);
    auto dist = [](const SpMat& M, const Vec& a, const Vec& b) {
        const Vec e = a - b;
        return std::sqrt(std::max(0.0, e.dot(M * e)));
    };
    ConvergenceReport rep;
    for (double dt : cfg.dts) {
        const FsiState s = dt == cfg.dt_ref ? ref : run(dt);
        rep.rows.push_back({dt, dist(Mt, s.eta, ref.eta), dist(Mv, s.v, ref.v), dist(Mp, s.p, ref.p)});
    }
    std::vector<double> x, d, v, p;
    for (const auto& r : rep.rows) {
        if (r.dt == cfg.dt_ref) continue;
        x.push_back(r.dt);
        d.push_back(r.displacement);
        v.push_back(r.velocity);
        p.push_back(r.pressure);
    }
    if (x.size() >= 2) {
        rep.slope_displacement = loglog_slope(x, d);
        rep.slope_velocity = loglog_slope(x, v);
        rep.slope_pressure = loglog_slope(x, p);
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

// ====================================================================== stability study

struct StabilitySettings {
    int nz = 50, nr_f = 8, nr_s = 3;
    double t_end = 0.03;
    double p_max = 1.333e4;
    double t_max = 0.015;
    double tol = 1e-9;   ///< admissible negative relative slack
};

struct StabilityRun {
    double dt = 0.0;
    int steps = 0;
    EnergyLedger ledger;
    InequalityReport audit;
    double max_energy = 0.0;
};

/// Stability-mode run with beta = 0 and the audit of the stepwise inequality.
inline StabilityRun run_stability(const PhysicalParams& prm, const StabilitySettings& cfg, double dt) {
    PhysicalParams p = prm;
    p.beta = 0.0;
    RunSettings rs;
    rs.pressure = PressureKind::Pulse;
    rs.p_max = cfg.p_max;
    rs.t_max = cfg.t_max;
    FsiSolver solver(p, build_rect_mesh(p, cfg.nz, cfg.nr_f, cfg.nr_s), SchemeOptions::stability(), dt);
    FsiState s = solver.initial_state();
    StabilityRun out;
    out.dt = dt;
    out.ledger.initial = solver.energies(s);
    const int N = static_cast<int>(std::llround(cfg.t_end / dt));
    for (int n = 1; n <= N; ++n) {
        const double t = n * dt;
        StepInfo info = solver.step(s, inlet_pressure(rs, t), outlet_pressure(rs, t));
        out.max_energy = std::max(out.max_energy, info.ledger.total());
        out.ledger.rows.push_back(info.ledger);
    }
    out.steps = N;
    out.audit = check_energy_inequality(out.ledger, p, cfg.tol);
    return out;
}

struct BlowupReport {
    bool blew_up = false;
    int step = -1;              ///< first step with energy growth past the threshold, or the failing step
    double growth = 0.0;        ///< max E^n / max(E^1, ...) reached
    std::string reason;
    EnergyLedger ledger;
};

/**
 * Negative control: the explicit Dirichlet-Neumann coupling on a small mesh with
 * comparable fluid and structure densities. A run counts as blown up when the total
 * energy exceeds `growth_limit` times its early maximum, turns non-finite, or the
 * solver fails.
 */
inline BlowupReport run_dirichlet_neumann_control(const PhysicalParams& prm, double dt, int max_steps = 400,
                                                  double growth_limit = 1e6, int nz = 10, int nr_f = 4,
                                                  int nr_s = 2) {
    PhysicalParams p = prm;
    p.beta = 0.0;
    SchemeOptions o = SchemeOptions::stability();
    o.dirichlet_neumann = true;
    RunSettings rs;
    rs.pressure = PressureKind::Pulse;
    rs.p_max = 1.333e4;
    rs.t_max = 0.003;
    BlowupReport rep;
    try {
        FsiSolver solver(p, build_rect_mesh(p, nz, nr_f, nr_s), o, dt);
        FsiState s = solver.initial_state();
        rep.ledger.initial = solver.energies(s);
        double early = 0.0;
        for (int n = 1; n <= max_steps; ++n) {
            const double t = n * dt;
            StepInfo info = solver.step(s, inlet_pressure(rs, t), outlet_pressure(rs, t));
            rep.ledger.rows.push_back(info.ledger);
            const double E = info.ledger.total();
            if (!std::isfinite(E)) {
                rep.blew_up = true;
                rep.step = n;
                rep.reason = "non-finite energy";
                rep.growth = std::numeric_limits<double>::infinity();
                return rep;
            }
            if (t <= rs.t_max) early = std::max(early, E);
            if (early > 0.0) rep.growth = std::max(rep.growth, E / early);
            if (early > 0.0 && E > growth_limit * early) {
                rep.blew_up = true;
                rep.step = n;
                rep.reason = "energy growth past limit";
                return rep;
            }
        }
    } catch (const std::exception& e) {
        rep.blew_up = true;
        rep.reason = std::string("solver failure: ") + e.what();
        if (const auto* sf = dynamic_cast<const StepFailure*>(&e)) rep.step = sf->step;
    }
    return rep;
}

}  // namespace fsi
