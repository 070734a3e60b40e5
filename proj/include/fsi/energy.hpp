/**
 * @file energy.hpp
 * @brief Discrete energies, the per-step energy ledger and its audit.
 *
 * E_f = rho_f/2 ||v||^2 on the current fluid mesh.
 * E_s = rho_s/2 ||V||^2 + mu_s ||D(U)||^2 + lambda_s/2 ||div U||^2 + gamma/2 ||U||^2.
 * E_m = rho_m h/2 ||xi||^2 + membrane elastic energy; in radial-only runs the
 *       elastic part is C0/2 ||eta_r||^2.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fem.hpp"
#include "mesh.hpp"
#include "params.hpp"

namespace fsi {

struct Energies {
    double Ef = 0.0;
    double Es = 0.0;
    double Em = 0.0;
    double total() const { return Ef + Es + Em; }
};

/// Structure-side forms, which never change during a run.
class EnergyForms {
public:
    EnergyForms() = default;
    EnergyForms(const Mesh& m, const PhysicalParams& p, bool radial_membrane)
        : p_(p), radial_(radial_membrane), mesh_(&m) {
        Ms_ = assemble_mass(m.structure, m.structure.ref);
        Ae_ = assemble_elasticity(m.structure, m.structure.ref, p.mu_s, p.lambda_s, p.gamma);
        Mt_ = assemble_trace_mass(m);
        if (radial_) {
            MembraneCoeffs c = membrane_coefficients(p);
            c.C1 = 0.0;
            c.C2 = 0.0;
            Am_ = assemble_membrane(m, c);
        }
    }

    double fluid(const SpMat& Mf, const Vec& v) const { return 0.5 * p_.rho_f * v.dot(Mf * v); }

    double structure(const Vec& U, const Vec& V) const {
        return 0.5 * p_.rho_s * V.dot(Ms_ * V) + 0.5 * U.dot(Ae_ * U);
    }

    double membrane(const Vec& eta, const Vec& xi) const {
        const double kin = 0.5 * p_.rho_m * p_.h * xi.dot(Mt_ * xi);
        if (radial_) {
            // only the radial component carries C0
            Vec er = Vec::Zero(eta.size());
            for (Eigen::Index k = 1; k < eta.size(); k += 2) er[k] = eta[k];
            return kin + 0.5 * er.dot(Am_ * er);
        }
        return kin + membrane_elastic_energy(*mesh_, p_, eta);
    }

    const SpMat& trace_mass() const { return Mt_; }

private:
    PhysicalParams p_;
    bool radial_ = false;
    const Mesh* mesh_ = nullptr;
    SpMat Ms_, Ae_, Mt_, Am_;
};

/// Energies of a state. Assembles the forms on demand.
inline Energies discrete_energies(const Mesh& m, const std::vector<Vec2>& X, const PhysicalParams& p, const Vec& v,
                                  const Vec& U, const Vec& V, const Vec& eta, const Vec& xi, bool radial_membrane) {
    EnergyForms forms(m, p, radial_membrane);
    const SpMat Mf = assemble_mass(m.fluid, X);
    return {forms.fluid(Mf, v), forms.structure(U, V), forms.membrane(eta, xi)};
}

/// One time step of the energy balance. Energies are at the end of the step.
struct LedgerRow {
    int n = 0;                  ///< step index, 1-based: the row closes step n-1 -> n
    double t = 0.0;
    double Ef = 0.0, Es = 0.0, Em = 0.0;
    double dissipation = 0.0;   ///< mu_f dt ||D(v)||^2, the coefficient of the stability estimate
    double jump_f = 0.0;        ///< rho_f/2 ||v^{n+1} - v^{n+1/2}||^2
    double jump_m = 0.0;        ///< rho_m h/2 ||xi^{n+1} - xi^{n+1/2}||^2
    double work = 0.0;          ///< boundary work of the step (plus the beta exchange in full mode)
    double pressure_sq = 0.0;   ///< dt (||p_in||^2 + ||p_out||^2) on (0,R)
    double slack = 0.0;         ///< E^n + work - (E^{n+1} + jumps + dissipation)
    double balance_residual = 0.0;  ///< same with the full 2 mu_f dissipation: zero for an exact balance
    double scale = 0.0;         ///< magnitude used to make the slack relative

    double total() const { return Ef + Es + Em; }
    double relative_slack() const { return scale > 0.0 ? slack / scale : slack; }
};

struct EnergyLedger {
    Energies initial;
    std::vector<LedgerRow> rows;
};

/// Completes slack, balance residual and scale of a row given the energy at the step start.
inline void close_row(LedgerRow& r, double E_prev) {
    const double lhs = r.total() + r.jump_f + r.jump_m + r.dissipation;
    r.slack = E_prev + r.work - lhs;
    r.balance_residual = r.slack - r.dissipation;
    r.scale = std::max({E_prev + std::abs(r.work), r.total(), std::numeric_limits<double>::min()});
}

struct InequalityReport {
    bool pass = true;
    double worst_relative_slack = std::numeric_limits<double>::infinity();
    int worst_step = -1;
    int first_violation = -1;
    double korn_trace_constant = 0.0;  ///< smallest C making the cumulative bound hold at every N
    double tolerance = 1e-9;
    std::string summary() const {
        std::string s = pass ? "PASS" : "FAIL";
        s += " worst_relative_slack=" + std::to_string(worst_relative_slack) + " at step " + std::to_string(worst_step);
        if (!pass) s += " first_violation_step=" + std::to_string(first_violation);
        s += " C_estimate=" + std::to_string(korn_trace_constant);
        return s;
    }
};

/**
 * Audits the stepwise inequality (relative slack >= -tol at every step) and estimates the
 * constant C of the cumulative bound
 *   E^N + sum(jumps + mu_f dt ||D||^2) <= E^0 + (C/mu_f) sum dt (||p_in||^2 + ||p_out||^2).
 */
inline InequalityReport check_energy_inequality(const EnergyLedger& ledger, const PhysicalParams& p,
                                                double tol = 1e-9) {
    InequalityReport rep;
    rep.tolerance = tol;
    double cum_lhs = 0.0, cum_data = 0.0;
    const double E0 = ledger.initial.total();
    for (std::size_t i = 0; i < ledger.rows.size(); ++i) {
        const auto& r = ledger.rows[i];
        double rel = r.relative_slack();
        if (std::isnan(rel)) rel = -std::numeric_limits<double>::infinity();
        if (rep.worst_step < 0 || rel < rep.worst_relative_slack) {
            rep.worst_relative_slack = rel;
            rep.worst_step = r.n;
        }
        if (!(rel >= -tol) && rep.pass) {
            rep.pass = false;
            rep.first_violation = r.n;
        }
        cum_lhs += r.jump_f + r.jump_m + r.dissipation;
        cum_data += r.pressure_sq;
        const double excess = r.total() + cum_lhs - E0;
        if (excess > 1e-12 * std::max(E0, r.total())) {
            const double C = cum_data > 0.0 ? p.mu_f * excess / cum_data : std::numeric_limits<double>::infinity();
            rep.korn_trace_constant = std::max(rep.korn_trace_constant, C);
        }
    }
    if (ledger.rows.empty()) rep.worst_relative_slack = 0.0;
    return rep;
}

}  // namespace fsi
