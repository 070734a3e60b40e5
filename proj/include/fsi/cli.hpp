/**
 * @file cli.hpp
 * @brief Command-line front end: subcommands, output files and exit codes.
 *
 *   fsi_cli run <config> | example1 | example2 | sweep-h | convergence-dt | stability-test
 *           [--out DIR] [--param k=v]... [--mesh nz,nr_f,nr_s] [--dt DT] [--beta B] [--snapshots N]
 *
 * Exit codes: 0 success, 2 configuration or usage error, 3 solver failure.
 */
#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bench.hpp"
#include "io.hpp"
#include "params.hpp"
#include "scheme.hpp"

namespace fsi {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitSolver = 3 };

struct CliOptions {
    std::string command;
    std::string config_path;
    std::filesystem::path out = "out";
    std::vector<std::string> params;
    std::string mesh;
    std::optional<double> dt;
    std::optional<double> beta;
    int snapshots = 0;
    std::string argv_line;
};

namespace cli_detail {

/// Applies --param, --mesh, --dt and --beta to a document, then validates it.
inline Config resolve(ConfigDocument doc, const CliOptions& o) {
    for (const auto& kv : o.params) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got '" + kv + "'");
        set_entry(doc, detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1)));
    }
    if (!o.mesh.empty()) {
        std::vector<std::string> parts;
        std::stringstream ss(o.mesh);
        for (std::string item; std::getline(ss, item, ',');) parts.push_back(detail::trim(item));
        if (parts.size() != 3) throw ConfigError("--mesh expects nz,nr_f,nr_s, got '" + o.mesh + "'");
        set_entry(doc, "nz", parts[0]);
        set_entry(doc, "nr_f", parts[1]);
        set_entry(doc, "nr_s", parts[2]);
    }
    if (o.dt) set_entry(doc, "dt", detail::fmt17(*o.dt));
    if (o.beta) set_entry(doc, "beta", detail::fmt17(*o.beta));
    return config_from_document(doc);
}

inline Config defaults(const PhysicalParams& p, const RunSettings& r) { return load_config(serialize(p, r)); }

inline ConfigDocument document_of(const Config& c) { return parse_document(serialize(c)); }

inline void write_series(const std::filesystem::path& dir, const Example2Result& r, std::vector<std::string>& files) {
    CsvTable q({"t", "z", "flowrate"}), p({"t", "z", "mean_pressure"}),
        d({"t", "z", "eta_z", "eta_r", "xi_z", "xi_r"});
    for (std::size_t n = 0; n < r.times.size(); ++n) {
        const ColumnProbes& c = r.probes[n];
        for (std::size_t k = 0; k < c.z.size(); ++k) {
            q.add_numbers({r.times[n], c.z[k], c.flowrate[k]});
            p.add_numbers({r.times[n], c.z[k], c.pressure[k]});
            d.add_numbers({r.times[n], c.z[k], c.eta_z[k], c.eta_r[k], c.xi_z[k], c.xi_r[k]});
        }
    }
    write_csv(q, dir / "series_flowrate.csv");
    write_csv(p, dir / "series_pressure.csv");
    write_csv(d, dir / "series_displacement.csv");
    files.insert(files.end(), {"series_flowrate.csv", "series_pressure.csv", "series_displacement.csv"});
    for (const auto& [tp, c] : r.profiles) {
        CsvTable t({"z", "eta_z", "eta_r", "xi_z", "xi_r", "flowrate", "mean_pressure"});
        for (std::size_t k = 0; k < c.z.size(); ++k)
            t.add_numbers({c.z[k], c.eta_z[k], c.eta_r[k], c.xi_z[k], c.xi_r[k], c.flowrate[k], c.pressure[k]});
        const std::string name = "profiles_t" + std::to_string(static_cast<long long>(std::llround(tp * 1e3))) + ".csv";
        write_csv(t, dir / name);
        files.push_back(name);
    }
    write_csv(ledger_table(r.ledger), dir / "ledger.csv");
    files.push_back("ledger.csv");
    for (const auto& s : r.snapshots) files.push_back(s);
}

inline CsvTable audit_table(const std::vector<std::pair<std::string, InequalityReport>>& runs) {
    CsvTable t({"run", "status", "worst_relative_slack", "worst_step", "first_violation", "tolerance", "C_estimate"});
    for (const auto& [name, a] : runs)
        t.add({name, a.pass ? "PASS" : "FAIL", detail::fmt17(a.worst_relative_slack), std::to_string(a.worst_step),
               std::to_string(a.first_violation), detail::fmt17(a.tolerance), detail::fmt17(a.korn_trace_constant)});
    return t;
}

inline Example2Settings example2_settings(const Config& c, const CliOptions& o) {
    Example2Settings s;
    s.nz = c.run.nz;
    s.nr_f = c.run.nr_f;
    s.nr_s = c.run.nr_s;
    s.dt = c.run.dt;
    s.t_end = c.run.t_end;
    s.pressure = c.run.pressure;
    s.p_max = c.run.p_max;
    s.t_max = c.run.t_max;
    s.p_in = c.run.p_in;
    s.p_out = c.run.p_out;
    s.record_every = c.run.output_every;
    s.options = scheme_options_from(c);
    s.snapshot_every = o.snapshots;
    s.snapshot_dir = o.out;
    return s;
}

// ------------------------------------------------------------------ commands

inline std::vector<std::string> cmd_example1(const Config& c, const CliOptions&, std::ostream& out,
                                             const std::filesystem::path& dir) {
    Example1Settings s;
    s.nz = c.run.nz;
    s.nr_f = c.run.nr_f;
    s.nr_s = c.run.nr_s;
    s.dt = c.run.dt;
    s.p_in = c.run.p_in;
    s.p_out = c.run.p_out;
    PhysicalParams p = c.phys;
    const ErrorReport r = run_example1(p, s);
    const Example1Errors ref = example1_reference_errors();
    CsvTable t({"quantity", "relative_l2_error", "error_after_march", "reference_error", "threshold", "status"});
    auto row = [&](const char* name, double e, double em, double pe, double thr) {
        t.add({name, detail::fmt17(e), detail::fmt17(em), detail::fmt17(pe), detail::fmt17(thr), e <= thr ? "PASS" : "FAIL"});
        out << name << " error " << e << " (reference " << pe << ", threshold " << thr << ") " << (e <= thr ? "PASS" : "FAIL")
            << "\n";
    };
    row("velocity", r.steady.velocity, r.after_march.velocity, ref.velocity, 5e-3);
    row("pressure", r.steady.pressure, r.after_march.pressure, ref.pressure, 5e-3);
    row("membrane_displacement", r.steady.membrane, r.after_march.membrane, ref.membrane, 1e-3);
    row("thick_displacement", r.steady.thick, r.after_march.thick, ref.thick, 1e-3);
    write_csv(t, dir / "errors.csv");
    write_csv(ledger_table(r.ledger), dir / "ledger.csv");
    out << "steps " << r.steps_total << " (" << r.march_steps << " marched from rest), final increment "
        << r.final_increment << "\n";
    return {"errors.csv", "ledger.csv"};
}

inline std::vector<std::string> cmd_series(const Config& c, const CliOptions& o, std::ostream& out,
                                           const std::filesystem::path& dir) {
    Example2Settings s = example2_settings(c, o);
    const Example2Result r = run_example2(c.phys, s);
    std::vector<std::string> files;
    write_series(dir, r, files);
    write_csv(audit_table({{"run", r.audit}}), dir / "inequality_report.csv");
    files.push_back("inequality_report.csv");
    out << r.steps << " steps in " << r.wall_seconds << " s; energy audit " << r.audit.summary() << "\n";
    return files;
}

inline std::vector<std::string> cmd_stability_run(const Config& c, const CliOptions&, std::ostream& out,
                                                  const std::filesystem::path& dir) {
    StabilitySettings s;
    s.nz = c.run.nz;
    s.nr_f = c.run.nr_f;
    s.nr_s = c.run.nr_s;
    s.t_end = c.run.t_end;
    s.p_max = c.run.p_max;
    s.t_max = c.run.t_max;
    const StabilityRun r = run_stability(c.phys, s, c.run.dt);
    write_csv(ledger_table(r.ledger), dir / "ledger.csv");
    write_csv(audit_table({{"dt=" + detail::fmt17(r.dt), r.audit}}), dir / "inequality_report.csv");
    out << "dt " << r.dt << ": " << r.audit.summary() << "\n";
    return {"ledger.csv", "inequality_report.csv"};
}

inline std::vector<std::string> cmd_stability_test(const Config& c, const CliOptions& o, std::ostream& out,
                                                   const std::filesystem::path& dir) {
    if (o.dt) return cmd_stability_run(c, o, out, dir);
    StabilitySettings s;
    s.nz = c.run.nz;
    s.nr_f = c.run.nr_f;
    s.nr_s = c.run.nr_s;
    s.t_end = c.run.t_end;
    s.p_max = c.run.p_max;
    s.t_max = c.run.t_max;
    std::vector<std::string> files;
    std::vector<std::pair<std::string, InequalityReport>> audits;
    for (double dt : {5e-5, 5e-4, 5e-3}) {
        const StabilityRun r = run_stability(c.phys, s, dt);
        const std::string name = "ledger_dt" + detail::fmt17(dt) + ".csv";
        write_csv(ledger_table(r.ledger), dir / name);
        files.push_back(name);
        audits.emplace_back("dt=" + detail::fmt17(dt), r.audit);
        out << "dt " << dt << ": " << r.audit.summary() << "\n";
    }
    write_csv(audit_table(audits), dir / "inequality_report.csv");
    files.push_back("inequality_report.csv");

    const BlowupReport ctl = run_dirichlet_neumann_control(c.phys, 1e-4);
    CsvTable t({"control", "blew_up", "step", "growth", "reason"});
    t.add({"dirichlet_neumann", ctl.blew_up ? "yes" : "no", std::to_string(ctl.step), detail::fmt17(ctl.growth),
           ctl.reason});
    write_csv(t, dir / "negative_control.csv");
    write_csv(ledger_table(ctl.ledger), dir / "negative_control_ledger.csv");
    files.insert(files.end(), {"negative_control.csv", "negative_control_ledger.csv"});
    out << "negative control (Dirichlet-Neumann): " << (ctl.blew_up ? "blew up" : "stayed bounded") << " at step "
        << ctl.step << " (" << ctl.reason << ")\n";
    return files;
}

inline std::vector<std::string> cmd_sweep(const Config& c, const CliOptions& o, std::ostream& out,
                                          const std::filesystem::path& dir) {
    Example2Settings s = example2_settings(c, o);
    s.snapshot_every = 0;
    const double total = c.phys.h + c.phys.H;
    const SweepReport r = h_sweep(c.phys, s, {0.02, 0.01, 0.005, 0.0025}, total);
    std::vector<std::string> files;
    for (std::size_t i = 0; i < r.hs.size(); ++i) {
        const std::string sub = "h_" + detail::fmt17(r.hs[i]);
        std::filesystem::create_directories(dir / sub);
        std::vector<std::string> member;
        write_series(dir / sub, r.members[i], member);
        for (const auto& f : member) files.push_back(sub + "/" + f);
    }
    CsvTable t({"h_a", "h_b", "cauchy_flowrate", "cauchy_mean_pressure", "cauchy_displacement"});
    for (const auto& p : r.pairs) t.add_numbers({p.h_a, p.h_b, p.flowrate, p.pressure, p.displacement});
    write_csv(t, dir / "sweep_report.csv");
    files.push_back("sweep_report.csv");
    for (const auto& p : r.pairs)
        out << "h " << p.h_a << " -> " << p.h_b << ": flowrate " << p.flowrate << ", pressure " << p.pressure
            << ", displacement " << p.displacement << "\n";
    out << "contracting: " << (r.contracting() ? "yes" : "no") << "\n";
    return files;
}

inline std::vector<std::string> cmd_convergence(const Config& c, const CliOptions&, std::ostream& out,
                                                const std::filesystem::path& dir) {
    ConvergenceSettings s;
    s.nz = c.run.nz;
    s.nr_f = c.run.nr_f;
    s.nr_s = c.run.nr_s;
    s.t_end = c.run.t_end;
    s.p_max = c.run.p_max;
    s.t_max = c.run.t_max;
    s.options = scheme_options_from(c);
    const ConvergenceReport r = dt_convergence(c.phys, s);
    CsvTable t({"dt", "error_displacement", "error_velocity", "error_pressure", "slope_displacement", "slope_velocity",
                "slope_pressure"});
    for (const auto& row : r.rows)
        t.add_numbers({row.dt, row.displacement, row.velocity, row.pressure, r.slope_displacement, r.slope_velocity,
                       r.slope_pressure});
    write_csv(t, dir / "convergence.csv");
    out << "slopes: displacement " << r.slope_displacement << ", velocity " << r.slope_velocity << ", pressure "
        << r.slope_pressure << "\n";
    return {"convergence.csv"};
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace cli_detail

/// Default configuration of each benchmark subcommand.
inline Config command_defaults(const std::string& cmd) {
    RunSettings r;
    if (cmd == "example1") {
        r.dt = 1e-5;
        r.nz = 60;
        r.nr_f = 10;
        r.nr_s = 4;
        r.pressure = PressureKind::Constant;
        r.p_in = 250.0;
        r.p_out = 0.0;
        r.t_end = 0.002;
        return cli_detail::defaults(table_t0(), r);
    }
    if (cmd == "convergence-dt") {
        r.nz = 60;
        r.nr_f = 8;
        r.nr_s = 3;
        r.t_end = 0.004;
        return cli_detail::defaults(table_t1(), r);
    }
    if (cmd == "stability-test") {
        PhysicalParams p = table_t1();
        p.beta = 0.0;
        r.mode = SchemeMode::Stability;
        r.nz = 50;
        r.nr_f = 8;
        r.nr_s = 3;
        r.t_end = 0.03;
        r.t_max = 0.015;
        return cli_detail::defaults(p, r);
    }
    return cli_detail::defaults(table_t1(), r);  // example2, sweep-h
}

/// Parses argv and runs one subcommand. Returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"Partitioned fluid / multilayered-wall solver", "fsi_cli"};
    app.require_subcommand(1);
    CliOptions o;
    for (int i = 0; i < argc; ++i) o.argv_line += (i ? " " : "") + std::string(argv[i]);

    auto global = [&](CLI::App* sub) {
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--param", o.params, "override a configuration key (key=value), repeatable");
        sub->add_option("--mesh", o.mesh, "mesh subdivisions nz,nr_f,nr_s");
        sub->add_option("--dt", o.dt, "time step");
        sub->add_option("--beta", o.beta, "pressure splitting parameter");
        sub->add_option("--snapshots", o.snapshots, "write a VTK snapshot every N steps");
    };
    CLI::App* run = app.add_subcommand("run", "run the configuration in a file");
    run->add_option("config", o.config_path, "configuration file")->required();
    global(run);
    const char* names[][2] = {{"example1", "steady exact-solution benchmark"},
                              {"example2", "pressure pulse benchmark"},
                              {"sweep-h", "thin-layer thickness sweep"},
                              {"convergence-dt", "time-step self-convergence"},
                              {"stability-test", "energy inequality audit and negative control"}};
    for (auto& n : names) global(app.add_subcommand(n[0], n[1]));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitConfig;
    }
    o.command = app.get_subcommands().front()->get_name();

    const auto t0 = std::chrono::steady_clock::now();
    Config cfg;
    try {
        if (o.command == "run") cfg = cli_detail::resolve(parse_document(cli_detail::read_file(o.config_path)), o);
        else cfg = cli_detail::resolve(cli_detail::document_of(command_defaults(o.command)), o);
        std::filesystem::create_directories(o.out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    }

    std::vector<std::string> files;
    try {
        if (o.command == "example1") files = cli_detail::cmd_example1(cfg, o, out, o.out);
        else if (o.command == "example2") files = cli_detail::cmd_series(cfg, o, out, o.out);
        else if (o.command == "sweep-h") files = cli_detail::cmd_sweep(cfg, o, out, o.out);
        else if (o.command == "convergence-dt") files = cli_detail::cmd_convergence(cfg, o, out, o.out);
        else if (o.command == "stability-test") files = cli_detail::cmd_stability_test(cfg, o, out, o.out);
        else if (cfg.run.mode == SchemeMode::Stability) files = cli_detail::cmd_stability_run(cfg, o, out, o.out);
        else files = cli_detail::cmd_series(cfg, o, out, o.out);
    } catch (const StepFailure& e) {
        err << "solver failure at step " << e.step << ": " << e.what() << "\n";
        return kExitSolver;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "solver failure: " << e.what() << "\n";
        return kExitSolver;
    }

    RunManifest man;
    man.command = o.argv_line;
    man.config = serialize(cfg);
    man.mesh = mesh_summary(build_rect_mesh(cfg.phys, cfg.run.nz, cfg.run.nr_f, cfg.run.nr_s));
    man.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    man.files = files;
    try {
        man.write(o.out);
    } catch (const IoError& e) {
        err << "output error: " << e.what() << "\n";
        return kExitSolver;
    }
    out << "outputs in " << o.out.string() << "\n";
    return kExitOk;
}

}  // namespace fsi
