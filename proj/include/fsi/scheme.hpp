/**
 * @file scheme.hpp
 * @brief Time stepping of the kinematically coupled beta-scheme.
 *
 * Full mode, per step t^n -> t^{n+1}:
 *   A1     structure: midpoint rule for the thick layer with the membrane as a
 *          Robin-type boundary operator, loaded by beta * p^n on the current interface;
 *   ALE    harmonic extension of the new interface displacement, w = (d^{n+1} - d^n)/dt;
 *   A2(a)  Stokes step on Omega(t^n) with the membrane inertia rho_m h as a Robin term
 *          and -beta * p^n on the interface;
 *   A2(b)  ALE advection on Omega(t^n), inflow boundary and interface pinned;
 *   then the fluid mesh moves to Omega(t^{n+1}).
 *
 * Stability mode (beta = 0, radial interface motion) merges A2(a) and A2(b) into one
 * fluid step with the symmetrized advection and the (div w)/2 term, and moves the
 * mesh with the explicit radial map.
 */
#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ale.hpp"
#include "energy.hpp"
#include "fem.hpp"
#include "linsolve.hpp"
#include "mesh.hpp"
#include "params.hpp"

namespace fsi {

/// How the fluid interface velocity enters the structure velocity at the start of A1.
enum class TraceTransfer {
    Nodal,  ///< V|Gamma := xi nodally
    Merge   ///< V := the mass-weighted combination of (V, xi) in the space of traced fields
};

struct SchemeOptions {
    SchemeMode mode = SchemeMode::Full;
    bool move_mesh = true;
    bool advection = true;
    bool radial_only_structure = false;  ///< U_z = 0 in the whole thick layer
    bool radial_only_interface = false;  ///< eta_z = 0 and v_z = 0 on the interface
    bool rigid_interface = false;        ///< v = 0 on the interface (fluid-only runs)
    bool structure_active = true;        ///< false skips A1 (fluid-only runs)
    bool fluid_active = true;            ///< false skips the fluid steps (structure-only runs)
    bool dirichlet_neumann = false;      ///< explicit Dirichlet-Neumann coupling, the unstable control
    bool orthogonal_ends = false;        ///< v_r = 0 at inlet and outlet (always on in stability mode)
    TraceTransfer transfer = TraceTransfer::Merge;
    bool end_data = false;               ///< prescribe U_r at the structure ends
    double end_eta_in = 0.0;             ///< U_r at z = 0 when end_data is set
    double end_eta_out = 0.0;            ///< U_r at z = L when end_data is set
    double tol = 1e-10;

    static SchemeOptions full() { return {}; }
    static SchemeOptions stability() {
        SchemeOptions o;
        o.mode = SchemeMode::Stability;
        o.radial_only_interface = true;
        o.orthogonal_ends = true;
        return o;
    }
};

/// Reads `[scheme]` switches from a configuration into options.
inline SchemeOptions scheme_options_from(const Config& c) {
    SchemeOptions o = c.run.mode == SchemeMode::Stability ? SchemeOptions::stability() : SchemeOptions::full();
    o.tol = c.run.tol;
    auto flag = [&](const char* key, bool& out) {
        auto it = c.scheme.find(key);
        if (it == c.scheme.end()) return;
        if (it->second == "true" || it->second == "1") out = true;
        else if (it->second == "false" || it->second == "0") out = false;
        else throw ConfigError(std::string("invalid value for key '") + key + "': '" + it->second + "' (true|false)");
    };
    flag("move_mesh", o.move_mesh);
    flag("advection", o.advection);
    flag("radial_only_structure", o.radial_only_structure);
    flag("radial_only_interface", o.radial_only_interface);
    flag("rigid_interface", o.rigid_interface);
    flag("orthogonal_ends", o.orthogonal_ends);
    if (auto it = c.scheme.find("trace_transfer"); it != c.scheme.end()) {
        if (it->second == "nodal") o.transfer = TraceTransfer::Nodal;
        else if (it->second == "merge") o.transfer = TraceTransfer::Merge;
        else throw ConfigError("invalid value for key 'trace_transfer': '" + it->second + "' (nodal|merge)");
    }
    return o;
}

struct FsiState {
    Vec v;                  ///< fluid velocity, interleaved over fluid nodes
    Vec p;                  ///< pressure at fluid vertices
    Vec U, V;               ///< thick-layer displacement and velocity
    Vec eta, xi;            ///< membrane displacement and velocity on the trace
    std::vector<Vec2> X;    ///< current fluid node coordinates
    Vec w;                  ///< domain velocity of the last step
    double t = 0.0;
    int n = 0;
};

/// Diagnostics of one step.
struct StepInfo {
    LedgerRow ledger;
    double divergence_residual = 0.0;  ///< ||B v|| after the Stokes (or combined fluid) solve
    int inflow_edges = 0;
};

/// Error wrapper carrying the index of the failing step.
class StepFailure : public std::runtime_error {
public:
    int step;
    StepFailure(int s, const std::string& what)
        : std::runtime_error("step " + std::to_string(s) + ": " + what), step(s) {}
};

class FsiSolver {
public:
    FsiSolver(const PhysicalParams& p, Mesh mesh, const SchemeOptions& opt, double dt)
        : p_(p), m_(std::move(mesh)), opt_(opt), dt_(dt) {
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
        if (opt_.mode == SchemeMode::Stability) opt_.radial_only_interface = opt_.orthogonal_ends = true;
        coeffs_ = membrane_coefficients(p_);
        nf_ = 2 * m_.fluid.num_nodes();
        np_ = m_.fluid.num_vertices();
        ns_ = 2 * m_.structure.num_nodes();
        nt_ = 2 * m_.num_trace_nodes();
        for (int k = 0; k < m_.num_trace_nodes(); ++k) {
            f_of_trace_.push_back(m_.trace_to_fluid(k));
            s_of_trace_.push_back(m_.trace_to_structure(k));
        }
        setup_structure();
        setup_fluid_masks();
        if (opt_.move_mesh && opt_.mode == SchemeMode::Full) ext_ = HarmonicExtension(m_, opt_.tol);
        energy_ = EnergyForms(m_, p_, radial_membrane());
        dn_load_ = Vec::Zero(nt_);
    }

    const Mesh& mesh() const { return m_; }
    const PhysicalParams& params() const { return p_; }
    const SchemeOptions& options() const { return opt_; }
    const MembraneCoeffs& coeffs() const { return coeffs_; }
    double dt() const { return dt_; }
    bool radial_membrane() const { return opt_.radial_only_interface || opt_.radial_only_structure; }

    /// Rest state on the reference configuration (with prescribed end displacement if requested).
    FsiState initial_state() const {
        FsiState s;
        s.v = Vec::Zero(nf_);
        s.p = Vec::Zero(np_);
        s.U = s_bc_;
        s.V = Vec::Zero(ns_);
        s.eta = structure_trace(m_, s.U);
        s.xi = Vec::Zero(nt_);
        s.X = m_.fluid.ref;
        s.w = Vec::Zero(nf_);
        return s;
    }

    Energies energies(const FsiState& s) const {
        const SpMat Mf = assemble_mass(m_.fluid, s.X);
        return {energy_.fluid(Mf, s.v), energy_.structure(s.U, s.V), energy_.membrane(s.eta, s.xi)};
    }

    /// Advances one step with inlet/outlet normal-stress data evaluated at t^{n+1}.
    StepInfo step(FsiState& s, double p_in, double p_out) {
        try {
            return opt_.mode == SchemeMode::Full ? full_step(s, p_in, p_out) : stability_step(s, p_in, p_out);
        } catch (const StepFailure&) {
            throw;
        } catch (const std::exception& e) {
            throw StepFailure(s.n + 1, e.what());
        }
    }

    // ----- building blocks, public so tests can drive them separately -----

    /// Problem A1 on its own: advances (U, V) and sets eta, xi from the structure trace.
    /// `load` is a trace-space force vector.
    void structure_step(FsiState& s, const Vec& load) const {
        const Vec F = embed_trace_structure(load);
        Vec rhs = (2.0 / (dt_ * dt_)) * (Mbb_ * s.U) + (2.0 / dt_) * (Mbb_ * s.V) - 0.5 * (Kst_ * s.U) + F;
        const Vec U1 = st_solver_.solve(dirichlet_rhs(rhs, s_mask_, s_bc_, st_lift_), opt_.tol);
        Vec V1 = (2.0 / dt_) * (U1 - s.U) - s.V;
        for (int i = 0; i < ns_; ++i)
            if (s_mask_[i]) V1[i] = 0.0;
        s.U = U1;
        s.V = V1;
        s.eta = structure_trace(m_, s.U);
        s.xi = structure_trace(m_, s.V);
    }

    /// Sets the structure velocity trace from the fluid interface velocity.
    void transfer_trace(FsiState& s, const Vec& xi_fluid) const {
        if (opt_.transfer == TraceTransfer::Nodal) {
            for (int k = 0; k < m_.num_trace_nodes(); ++k)
                for (int c = 0; c < 2; ++c) {
                    const int i = 2 * s_of_trace_[k] + c;
                    if (!s_mask_[i]) s.V[i] = xi_fluid[2 * k + c];
                }
        } else {
            Vec rhs = p_.rho_s * (Ms_ * s.V) + p_.rho_m * p_.h * embed_trace_structure(Mt_ * xi_fluid);
            s.V = merge_solver_.solve(dirichlet_rhs(rhs, s_mask_, Vec::Zero(ns_), merge_lift_), opt_.tol);
        }
        s.xi = structure_trace(m_, s.V);
    }

    /// Interface load of the beta splitting, from the pressure on the coordinates X.
    Vec beta_load(const FsiState& s) const {
        return assemble_interface_pressure_load(m_, s.X, s.p, p_.beta);
    }

    /**
     * Fixed point of the step map for time-independent data on a fixed mesh without
     * advection (full mode). A step from the returned state reproduces it up to
     * round-off, so it is the state that marching converges to, computed with one
     * sparse solve instead of the long viscous and structural transient.
     *
     * At a fixed point V^{n+1} = V^n = -V' where V' is the velocity after the trace
     * transfer, which turns the step into the linear system
     *   (A + R) v - B^T p - R E_f g_s V + E_f P p = b      (fluid, R = rho_m h/dt trace mass)
     *   B v = 0
     *   K U + (2/dt) M V - E_s P p = 0                      (A1 with U^{n+1} = U^n)
     *   (M + rho_s M_s) V + rho_m h E_s M_G g_f v = 0       (merge transfer)
     * with P the beta pressure load and g/E the trace restrictions/embeddings.
     */
    FsiState fixed_point(double p_in, double p_out) {
        if (opt_.mode != SchemeMode::Full || opt_.move_mesh || opt_.advection || !opt_.fluid_active ||
            !opt_.structure_active || opt_.dirichlet_neumann || opt_.rigid_interface)
            throw std::logic_error("fixed_point: needs full mode on a fixed mesh without advection");
        FsiState s = initial_state();
        const FluidForms& F = fluid_forms(s.X);
        const int oP = nf_, oU = nf_ + np_, oV = nf_ + np_ + ns_, N = nf_ + np_ + 2 * ns_;
        const double rmh = p_.rho_m * p_.h;

        // beta pressure load as a (trace x pressure) matrix
        Triplets tp;
        for (int I = 0; I <= m_.fluid.nx; ++I) {
            const int vtx = m_.fluid.vertex(I, m_.fluid.ny);
            Vec e = Vec::Zero(np_);
            e[vtx] = 1.0;
            const Vec col = assemble_interface_pressure_load(m_, s.X, e, p_.beta);
            for (Eigen::Index k = 0; k < col.size(); ++k)
                if (col[k] != 0.0) tp.emplace_back(static_cast<int>(k), vtx, col[k]);
        }
        const SpMat P = from_triplets(nt_, np_, tp);

        // trace-space block Mtr mapped to (row space, col space) through node maps
        auto cross = [&](Triplets& t, const SpMat& Mtr, const std::vector<int>& rmap, int roff,
                         const std::vector<int>& cmap, int coff, double scale) {
            for (int i = 0; i < Mtr.outerSize(); ++i)
                for (SpMat::InnerIterator it(Mtr, i); it; ++it)
                    t.emplace_back(roff + 2 * rmap[it.row() / 2] + static_cast<int>(it.row() % 2),
                                   coff + 2 * cmap[it.col() / 2] + static_cast<int>(it.col() % 2), scale * it.value());
        };
        auto mapped_rows = [&](Triplets& t, const SpMat& Ptr, const std::vector<int>& rmap, int roff, int coff,
                               double scale) {
            for (int i = 0; i < Ptr.outerSize(); ++i)
                for (SpMat::InnerIterator it(Ptr, i); it; ++it)
                    t.emplace_back(roff + 2 * rmap[i / 2] + i % 2, coff + static_cast<int>(it.col()), scale * it.value());
        };

        Triplets t;
        append_triplets(t, F.A);
        add_trace_block(t, Mt_, f_of_trace_, rmh / dt_);
        cross(t, Mt_, f_of_trace_, 0, s_of_trace_, oV, -rmh / dt_);
        mapped_rows(t, P, f_of_trace_, 0, oP, 1.0);
        for (int i = 0; i < F.B.outerSize(); ++i)
            for (SpMat::InnerIterator it(F.B, i); it; ++it) {
                t.emplace_back(static_cast<int>(it.col()), oP + i, -it.value());
                t.emplace_back(oP + i, static_cast<int>(it.col()), it.value());
            }
        append_triplets(t, Kst_, 1.0, oU, oU);
        append_triplets(t, Mbb_, 2.0 / dt_, oU, oV);
        mapped_rows(t, P, s_of_trace_, oU, oP, -1.0);
        if (opt_.transfer == TraceTransfer::Merge) {
            append_triplets(t, Mbb_, 1.0, oV, oV);
            append_triplets(t, Ms_, p_.rho_s, oV, oV);
            cross(t, Mt_, s_of_trace_, oV, f_of_trace_, 0, rmh);
        } else {
            // V' = V off the trace and xi on it, so V = 0 off the trace and V = -xi on it
            for (int i = 0; i < ns_; ++i) t.emplace_back(oV + i, oV + i, 1.0);
            for (int k = 0; k < m_.num_trace_nodes(); ++k)
                for (int c = 0; c < 2; ++c) t.emplace_back(oV + 2 * s_of_trace_[k] + c, 2 * f_of_trace_[k] + c, 1.0);
        }
        SpMat K = from_triplets(N, N, t);

        std::vector<char> mask(static_cast<std::size_t>(N), 0);
        Vec g = Vec::Zero(N);
        for (int i = 0; i < nf_; ++i) mask[i] = f_mask_[i];
        for (int i = 0; i < ns_; ++i) {
            mask[oU + i] = mask[oV + i] = s_mask_[i];
            g[oU + i] = s_bc_[i];
        }
        Vec rhs = Vec::Zero(N);
        rhs.head(nf_) = assemble_boundary_load(m_.fluid, s.X, p_in, p_out);
        SpMat lift;
        const SpMat Kd = dirichlet_matrix(K, mask, &lift);
        const Vec x = LuSolver(Kd).solve(dirichlet_rhs(rhs, mask, g, lift), opt_.tol);

        s.v = x.head(nf_);
        s.p = x.segment(oP, np_);
        s.U = x.segment(oU, ns_);
        s.V = x.segment(oV, ns_);
        s.eta = structure_trace(m_, s.U);
        s.xi = fluid_trace(m_, s.v);
        return s;
    }

    const std::vector<char>& structure_mask() const { return s_mask_; }
    const std::vector<char>& fluid_mask() const { return f_mask_; }
    const SpMat& structure_mass() const { return Mbb_; }
    const SpMat& structure_stiffness() const { return Kst_; }
    const SpMat& trace_mass() const { return Mt_; }

private:
    // ------------------------------------------------------------------ setup
    void setup_structure() {
        const SubMesh& sm = m_.structure;
        s_mask_.assign(static_cast<std::size_t>(ns_), 0);
        s_bc_ = Vec::Zero(ns_);
        for (int i = 0; i < sm.ni(); ++i)
            for (int j = 0; j < sm.nj(); ++j) {
                const int n = sm.node(i, j);
                const bool end = (i == 0 || i == sm.ni() - 1);
                if (end) {
                    s_mask_[2 * n] = s_mask_[2 * n + 1] = 1;
                    if (opt_.end_data) s_bc_[2 * n + 1] = (i == 0) ? opt_.end_eta_in : opt_.end_eta_out;
                }
                if (j == sm.nj() - 1) s_mask_[2 * n] = 1;  // axial displacement fixed on the outer wall
                if (opt_.radial_only_structure) s_mask_[2 * n] = 1;
                if (j == 0 && opt_.radial_only_interface) s_mask_[2 * n] = 1;
            }
        Ms_ = assemble_mass(sm, sm.ref);
        Mt_ = assemble_trace_mass(m_);
        const SpMat Ae = assemble_elasticity(sm, sm.ref, p_.mu_s, p_.lambda_s, p_.gamma);
        const SpMat Am = assemble_membrane(m_, coeffs_);
        Triplets tm, tk;
        append_triplets(tm, Ms_, p_.rho_s);
        add_trace_block(tm, Mt_, s_of_trace_, p_.rho_m * p_.h);
        append_triplets(tk, Ae);
        add_trace_block(tk, Am, s_of_trace_, 1.0);
        Mbb_ = from_triplets(ns_, ns_, tm);
        Kst_ = from_triplets(ns_, ns_, tk);
        SpMat S = (2.0 / (dt_ * dt_)) * Mbb_ + 0.5 * Kst_;
        st_solver_.factor(dirichlet_matrix(S, s_mask_, &st_lift_));
        merge_solver_.factor(dirichlet_matrix(Mbb_, s_mask_, &merge_lift_));
    }

    void setup_fluid_masks() {
        const SubMesh& f = m_.fluid;
        f_mask_.assign(static_cast<std::size_t>(nf_), 0);
        iface_mask_.assign(static_cast<std::size_t>(nf_), 0);
        for (int i = 0; i < f.ni(); ++i)
            for (int j = 0; j < f.nj(); ++j) {
                const int n = f.node(i, j);
                if (j == 0) f_mask_[2 * n + 1] = 1;                        // symmetry: v_r = 0
                if (j == f.nj() - 1) {
                    iface_mask_[2 * n] = iface_mask_[2 * n + 1] = 1;
                    if (i == 0 || i == f.ni() - 1) f_mask_[2 * n] = f_mask_[2 * n + 1] = 1;  // clamped ends
                    if (opt_.radial_only_interface) f_mask_[2 * n] = 1;
                    if (opt_.rigid_interface || !opt_.structure_active) f_mask_[2 * n] = f_mask_[2 * n + 1] = 1;
                    if (opt_.dirichlet_neumann) f_mask_[2 * n] = f_mask_[2 * n + 1] = 1;
                }
                if (opt_.orthogonal_ends && (i == 0 || i == f.ni() - 1)) f_mask_[2 * n + 1] = 1;
            }
    }

    Vec embed_trace_structure(const Vec& t) const {
        Vec out = Vec::Zero(ns_);
        for (int k = 0; k < m_.num_trace_nodes(); ++k) {
            out[2 * s_of_trace_[k]] += t[2 * k];
            out[2 * s_of_trace_[k] + 1] += t[2 * k + 1];
        }
        return out;
    }

    Vec embed_trace_fluid(const Vec& t) const {
        Vec out = Vec::Zero(nf_);
        for (int k = 0; k < m_.num_trace_nodes(); ++k) {
            out[2 * f_of_trace_[k]] += t[2 * k];
            out[2 * f_of_trace_[k] + 1] += t[2 * k + 1];
        }
        return out;
    }

    bool robin_active() const { return !opt_.dirichlet_neumann && !opt_.rigid_interface && opt_.structure_active; }

    /// Fluid-side forms on coordinates X, cached while the coordinates do not change.
    struct FluidForms {
        std::vector<Vec2> X;
        SpMat M, A, B;
        bool valid = false;
    };

    const FluidForms& fluid_forms(const std::vector<Vec2>& X) {
        if (forms_.valid && same_coords(forms_.X, X)) return forms_;
        forms_.X = X;
        forms_.M = assemble_mass(m_.fluid, X);
        forms_.A = assemble_fluid_stiffness(m_.fluid, X, p_.mu_f);
        forms_.B = assemble_divergence(m_.fluid, X);
        forms_.valid = true;
        stokes_valid_ = false;
        return forms_;
    }

    static bool same_coords(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
        if (a.size() != b.size()) return false;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i].z != b[i].z || a[i].r != b[i].r) return false;
        return true;
    }

    /// Saddle matrix [A -B^T; B 0] with velocity Dirichlet rows eliminated.
    SpMat saddle_matrix(const SpMat& Avel, const SpMat& B, const std::vector<char>& vmask, SpMat* lift) const {
        Triplets t;
        t.reserve(static_cast<std::size_t>(Avel.nonZeros() + 2 * B.nonZeros()));
        append_triplets(t, Avel);
        for (int i = 0; i < B.outerSize(); ++i)
            for (SpMat::InnerIterator it(B, i); it; ++it) {
                t.emplace_back(static_cast<int>(it.col()), nf_ + i, -it.value());
                t.emplace_back(nf_ + i, static_cast<int>(it.col()), it.value());
            }
        SpMat K = from_triplets(nf_ + np_, nf_ + np_, t);
        std::vector<char> mask(vmask);
        mask.resize(static_cast<std::size_t>(nf_ + np_), 0);
        return dirichlet_matrix(K, mask, lift);
    }

    std::vector<char> saddle_mask() const {
        std::vector<char> mask(f_mask_);
        mask.resize(static_cast<std::size_t>(nf_ + np_), 0);
        return mask;
    }

    SpMat robin_block() const {
        Triplets t;
        add_trace_block(t, Mt_, f_of_trace_, p_.rho_m * p_.h / dt_);
        return from_triplets(nf_, nf_, t);
    }

    // ------------------------------------------------------------- full mode
    StepInfo full_step(FsiState& s, double p_in, double p_out) {
        StepInfo info;
        LedgerRow& row = info.ledger;
        const double E_start = energies_cached(s).total();
        const Vec v_n = s.v;

        // A1
        Vec xi_half = s.xi;
        Vec U_prev = s.U;
        Vec load = Vec::Zero(nt_);
        if (opt_.structure_active) {
            if (opt_.fluid_active && !opt_.dirichlet_neumann && !opt_.rigid_interface) transfer_trace(s, fluid_trace(m_, s.v));
            load = opt_.dirichlet_neumann ? dn_load_ : beta_load(s);
            structure_step(s, load);
            xi_half = s.xi;
            row.work += load.dot(structure_trace(m_, s.U - U_prev));
        }

        // ALE
        std::vector<Vec2> X_new = s.X;
        Vec w = Vec::Zero(nf_);
        if (opt_.move_mesh && opt_.structure_active) {
            const auto d = ext_(m_, s.eta);
            X_new = moved_coordinates(m_, d);
            w = coordinate_velocity(X_new, s.X);
        }

        if (opt_.fluid_active) {
            const FluidForms& F = fluid_forms(s.X);
            // A2(a)
            if (!stokes_valid_) {
                Triplets t;
                append_triplets(t, F.M, p_.rho_f / dt_);
                append_triplets(t, F.A);
                if (robin_active()) add_trace_block(t, Mt_, f_of_trace_, p_.rho_m * p_.h / dt_);
                stokes_A_ = from_triplets(nf_, nf_, t);
                stokes_K_ = saddle_matrix(stokes_A_, F.B, f_mask_, &stokes_lift_);
                stokes_lu_.factor(stokes_K_);
                stokes_valid_ = !opt_.move_mesh;
            }
            const Vec bload = assemble_boundary_load(m_.fluid, s.X, p_in, p_out);
            Vec rhs_v = (p_.rho_f / dt_) * (F.M * v_n) + bload;
            const Vec iface_load = embed_trace_fluid(load);
            if (robin_active()) rhs_v += (p_.rho_m * p_.h / dt_) * embed_trace_fluid(Mt_ * xi_half);
            if (!opt_.dirichlet_neumann) rhs_v -= iface_load;
            Vec g = Vec::Zero(nf_ + np_);
            if (opt_.dirichlet_neumann) set_interface_values(g, xi_half);
            Vec rhs(nf_ + np_);
            rhs << rhs_v, Vec::Zero(np_);
            const Vec sol = stokes_lu_.solve(dirichlet_rhs(rhs, saddle_mask(), g, stokes_lift_), opt_.tol);
            Vec v23 = sol.head(nf_);
            s.p = sol.tail(np_);
            info.divergence_residual = (F.B * v23).norm();
            if (opt_.dirichlet_neumann) dn_load_ = -interface_traction(F, v23, s.p, v_n, bload);

            row.work += dt_ * bload.dot(v23);
            if (!opt_.dirichlet_neumann) row.work -= dt_ * iface_load.dot(v23);
            row.dissipation = 0.5 * dt_ * v23.dot(F.A * v23);
            const Vec dv1 = v23 - v_n;
            row.jump_f = 0.5 * p_.rho_f * dv1.dot(F.M * dv1);

            // A2(b)
            Vec v1 = v23;
            if (opt_.advection) {
                const Vec adv = v_n - w;
                std::vector<char> mask(f_mask_);
                for (int i = 0; i < nf_; ++i)
                    if (iface_mask_[i]) mask[i] = 1;
                info.inflow_edges = mark_inflow(s.X, adv, mask);
                Triplets t;
                append_triplets(t, F.M, p_.rho_f / dt_);
                append_triplets(t, assemble_advection(m_.fluid, s.X, adv, false, p_.rho_f));
                SpMat C = from_triplets(nf_, nf_, t);
                Vec b = (p_.rho_f / dt_) * (F.M * v23);
                apply_dirichlet(C, b, mask, v23);
                v1 = solve_nonsym(C, b, opt_.tol);
                const Vec dv2 = v1 - v23;
                row.jump_f += 0.5 * p_.rho_f * dv2.dot(F.M * dv2);
                row.work -= dt_ * boundary_kinetic_flux(m_.fluid, s.X, adv, v1, p_.rho_f);
            }
            s.v = v1;
            const Vec xi_f = fluid_trace(m_, s.v);
            if (opt_.structure_active && !opt_.dirichlet_neumann && !opt_.rigid_interface) {
                const Vec dxi = xi_f - xi_half;
                row.jump_m = 0.5 * p_.rho_m * p_.h * dxi.dot(Mt_ * dxi);
                s.xi = xi_f;
            }
        }

        s.X = X_new;
        s.w = w;
        s.t += dt_;
        s.n += 1;
        finish_row(s, row, E_start, p_in, p_out);
        return info;
    }

    // -------------------------------------------------------- stability mode
    StepInfo stability_step(FsiState& s, double p_in, double p_out) {
        StepInfo info;
        LedgerRow& row = info.ledger;
        const double E_start = energies_cached(s).total();
        const Vec v_n = s.v;

        // A1
        Vec xi_half = s.xi;
        Vec load = Vec::Zero(nt_);
        if (opt_.structure_active) {
            if (opt_.fluid_active && !opt_.dirichlet_neumann && !opt_.rigid_interface) transfer_trace(s, fluid_trace(m_, s.v));
            if (opt_.dirichlet_neumann) {
                load = dn_load_;
                Vec U_prev = s.U;
                structure_step(s, load);
                row.work += load.dot(structure_trace(m_, s.U - U_prev));
            } else {
                structure_step(s, load);
            }
            xi_half = s.xi;
        }

        // radial ALE map from eta^n to eta^{n+1}
        std::vector<Vec2> X_new = s.X;
        Vec w = Vec::Zero(nf_);
        if (opt_.move_mesh && opt_.structure_active) {
            std::vector<double> en(m_.num_trace_nodes()), e1(m_.num_trace_nodes());
            for (int k = 0; k < m_.num_trace_nodes(); ++k) {
                en[k] = s.X[f_of_trace_[k]].r - p_.R;
                e1[k] = s.eta[2 * k + 1];
            }
            auto ale = radial_ale(m_, en, e1, p_.R, dt_, s.X);
            X_new = ale.X;
            w = ale.w;
            const auto areas = triangle_areas(m_.fluid, X_new);
            for (std::size_t t = 0; t < areas.size(); ++t)
                if (!(areas[t] > 0.0)) throw InvertedElement(static_cast<int>(t), areas[t]);
        }

        if (opt_.fluid_active) {
            const FluidForms& F = fluid_forms(s.X);
            Triplets t;
            append_triplets(t, F.M, p_.rho_f / dt_);
            append_triplets(t, F.A);
            const Vec adv = v_n - w;
            append_triplets(t, assemble_advection(m_.fluid, s.X, adv, true, p_.rho_f, &w));
            if (robin_active()) add_trace_block(t, Mt_, f_of_trace_, p_.rho_m * p_.h / dt_);
            const SpMat Avel = from_triplets(nf_, nf_, t);
            SpMat lift;
            const SpMat K = saddle_matrix(Avel, F.B, f_mask_, &lift);
            LuSolver lu(K);

            const Vec bload = assemble_boundary_load(m_.fluid, s.X, p_in, p_out);
            Vec rhs_v = (p_.rho_f / dt_) * (F.M * v_n) + bload;
            if (robin_active()) rhs_v += (p_.rho_m * p_.h / dt_) * embed_trace_fluid(Mt_ * xi_half);
            Vec g = Vec::Zero(nf_ + np_);
            if (opt_.dirichlet_neumann) set_interface_values(g, xi_half);
            Vec rhs(nf_ + np_);
            rhs << rhs_v, Vec::Zero(np_);
            const Vec sol = lu.solve(dirichlet_rhs(rhs, saddle_mask(), g, lift), opt_.tol);
            s.v = sol.head(nf_);
            s.p = sol.tail(np_);
            info.divergence_residual = (F.B * s.v).norm();
            if (opt_.dirichlet_neumann) {
                // traction uses the full fluid operator, advection included
                Vec r = Avel * s.v - F.B.transpose() * s.p - rhs_v;
                Vec tr = Vec::Zero(nt_);
                for (int k = 0; k < m_.num_trace_nodes(); ++k) tr[2 * k + 1] = r[2 * f_of_trace_[k] + 1];
                dn_load_ = -tr;
            }

            row.work += dt_ * bload.dot(s.v);
            row.dissipation = 0.5 * dt_ * s.v.dot(F.A * s.v);
            const Vec dv = s.v - v_n;
            row.jump_f = 0.5 * p_.rho_f * dv.dot(F.M * dv);
            if (opt_.structure_active && !opt_.dirichlet_neumann && !opt_.rigid_interface) {
                const Vec xi_f = fluid_trace(m_, s.v);
                const Vec dxi = xi_f - xi_half;
                row.jump_m = 0.5 * p_.rho_m * p_.h * dxi.dot(Mt_ * dxi);
                s.xi = xi_f;
            }
        }

        s.X = X_new;
        s.w = w;
        s.t += dt_;
        s.n += 1;
        finish_row(s, row, E_start, p_in, p_out);
        return info;
    }

    // -------------------------------------------------------------- helpers
    Vec coordinate_velocity(const std::vector<Vec2>& X1, const std::vector<Vec2>& X0) const {
        Vec w(nf_);
        for (std::size_t n = 0; n < X1.size(); ++n) {
            w[2 * n] = (X1[n].z - X0[n].z) / dt_;
            w[2 * n + 1] = (X1[n].r - X0[n].r) / dt_;
        }
        return w;
    }

    void set_interface_values(Vec& g, const Vec& xi) const {
        for (int k = 0; k < m_.num_trace_nodes(); ++k)
            for (int c = 0; c < 2; ++c) {
                const int i = 2 * f_of_trace_[k] + c;
                if (f_mask_[i] && iface_mask_[i]) g[i] = xi[2 * k + c];
            }
        // clamped end nodes stay at rest
        for (int k : {0, m_.num_trace_nodes() - 1}) g[2 * f_of_trace_[k]] = g[2 * f_of_trace_[k] + 1] = 0.0;
        if (opt_.radial_only_interface)
            for (int k = 0; k < m_.num_trace_nodes(); ++k) g[2 * f_of_trace_[k]] = 0.0;
    }

    /// Consistent interface traction int_Gamma sigma n . phi of a Stokes solution, as a trace vector.
    Vec interface_traction(const FluidForms& F, const Vec& v, const Vec& p, const Vec& v_n, const Vec& bload) const {
        Vec r = (p_.rho_f / dt_) * (F.M * (v - v_n)) + F.A * v - F.B.transpose() * p - bload;
        Vec tr = Vec::Zero(nt_);
        for (int k = 0; k < m_.num_trace_nodes(); ++k) {
            tr[2 * k] = r[2 * f_of_trace_[k]];
            tr[2 * k + 1] = r[2 * f_of_trace_[k] + 1];
        }
        return tr;
    }

    /// Pins all three nodes of every inlet/outlet edge where (adv . n) < 0 at the edge midpoint.
    int mark_inflow(const std::vector<Vec2>& X, const Vec& adv, std::vector<char>& mask) const {
        int count = 0;
        for (const auto& e : m_.fluid.edges) {
            if (e.tag != Tag::Inlet && e.tag != Tag::Outlet) continue;
            const Vec2 n = outward_normal(e, X);
            const double an = adv[2 * e.mid] * n.z + adv[2 * e.mid + 1] * n.r;
            if (an < 0.0) {
                ++count;
                for (int node : {e.a, e.b, e.mid}) mask[2 * node] = mask[2 * node + 1] = 1;
            }
        }
        return count;
    }

    Energies energies_cached(const FsiState& s) {
        const FluidForms& F = fluid_forms(s.X);
        return {energy_.fluid(F.M, s.v), energy_.structure(s.U, s.V), energy_.membrane(s.eta, s.xi)};
    }

    void finish_row(const FsiState& s, LedgerRow& row, double E_start, double p_in, double p_out) {
        const Energies E = energies_cached(s);
        row.n = s.n;
        row.t = s.t;
        row.Ef = E.Ef;
        row.Es = E.Es;
        row.Em = E.Em;
        row.pressure_sq = dt_ * (p_in * p_in + p_out * p_out) * p_.R;
        close_row(row, E_start);
    }

    PhysicalParams p_;
    Mesh m_;
    SchemeOptions opt_;
    double dt_;
    MembraneCoeffs coeffs_;
    int nf_ = 0, np_ = 0, ns_ = 0, nt_ = 0;
    std::vector<int> f_of_trace_, s_of_trace_;

    std::vector<char> s_mask_;
    Vec s_bc_;
    SpMat Ms_, Mt_, Mbb_, Kst_, st_lift_, merge_lift_;
    SpdSolver st_solver_, merge_solver_;

    std::vector<char> f_mask_, iface_mask_;
    HarmonicExtension ext_;
    EnergyForms energy_;

    FluidForms forms_;
    bool stokes_valid_ = false;
    SpMat stokes_A_, stokes_K_, stokes_lift_;
    LuSolver stokes_lu_;
    Vec dn_load_;
};

}  // namespace fsi
