#pragma once

// Radial semilinear heat flow  u_t = u_rr + (N-1)/r u_r + |u|^{p-1} u
// on [0, R_max] with symmetry at the origin and a pinned far-field value.
//
// Space: conservative finite volumes on the radial grid (three-point,
// second order). Off-diagonal couplings are positive, so the implicit
// stepper satisfies a discrete maximum principle; this is what makes the
// ordering and sweeping diagnostics exact in the discrete system.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "supercrit/diagnostics.hpp"

namespace supercrit {

/// (A u)_i = lower_i (u_{i-1} - u_i) + upper_i (u_{i+1} - u_i) for i < n-1;
/// the last node carries Dirichlet data.
class RadialOperator {
public:
    RadialOperator(GridPtr grid, int dim) : grid_(std::move(grid)), dim_(dim) {
        const RadialGrid& g = *grid_;
        const std::size_t n = g.size();
        require(n >= 3, ErrorKind::InvalidArgument, "grid too small");
        lower_.assign(n - 1, 0.0);
        upper_.assign(n - 1, 0.0);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double face_out = 0.5 * (g[i] + g[i + 1]);
            const double face_in = i == 0 ? 0.0 : 0.5 * (g[i - 1] + g[i]);
            const double rho = face_in / face_out;
            // cell volume / (face_out^N / N), computed without forming r^N
            const double shell = i == 0 ? 1.0 : -std::expm1(dim * std::log(rho));
            upper_[i] = dim / ((g[i + 1] - g[i]) * face_out * shell);
            if (i > 0) lower_[i] = dim * std::pow(rho, dim - 1) / ((g[i] - g[i - 1]) * face_out * shell);
        }
    }

    const RadialGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return grid_->size(); }
    double lower(std::size_t i) const { return lower_[i]; }
    double upper(std::size_t i) const { return upper_[i]; }

    double apply_at(std::span<const double> u, std::size_t i) const {
        double s = upper_[i] * (u[i + 1] - u[i]);
        if (i > 0) s += lower_[i] * (u[i - 1] - u[i]);
        return s;
    }

private:
    GridPtr grid_;
    int dim_;
    std::vector<double> lower_;
    std::vector<double> upper_;
};

/// Discrete u_t = A u + |u|^{p-1} u, zero at the pinned node.
inline std::vector<double> discrete_rate(const RadialOperator& op, std::span<const double> u, double p) {
    std::vector<double> v(u.size(), 0.0);
    for (std::size_t i = 0; i + 1 < u.size(); ++i) v[i] = op.apply_at(u, i) + signed_pow(u[i], p);
    return v;
}

/// Exact equilibrium of the discrete operator with center value gamma, by
/// marching the three-point rows outward. The far-field value is whatever
/// the march produces; pinning it there makes the profile a fixed point.
inline RadialProfile discrete_equilibrium(const RadialOperator& op, double p, double gamma) {
    const std::size_t n = op.size();
    std::vector<double> u(n), du(n);
    u[0] = gamma;
    double prev_diff = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = (-signed_pow(u[i], p) + op.lower(i) * prev_diff) / op.upper(i);
        u[i + 1] = u[i] + d;
        prev_diff = d;
    }
    for (std::size_t i = 0; i < n; ++i) {
        // centered difference for the interpolation slope
        if (i == 0) du[i] = 0.0;
        else if (i + 1 == n) du[i] = (u[i] - u[i - 1]) / (op.grid()[i] - op.grid()[i - 1]);
        else du[i] = (u[i + 1] - u[i - 1]) / (op.grid()[i + 1] - op.grid()[i - 1]);
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!(u[i] > 0.0))
            throw Error(ErrorKind::NonPositiveProfile, "discrete equilibrium loses positivity at r=" +
                                                           std::to_string(op.grid()[i]));
    return RadialProfile(op.grid_ptr(), std::move(u), "phi_h_" + std::to_string(gamma));
}

/// d/dgamma of the discrete equilibrium family: the exact kernel of the
/// discrete linearization at `equilibrium`, normalized to 1 at the origin.
inline KernelElement discrete_kernel(const RadialOperator& op, double p, const RadialProfile& equilibrium) {
    const std::size_t n = op.size();
    std::vector<double> z(n);
    z[0] = 1.0;
    double prev_diff = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double fprime = p * std::pow(std::abs(equilibrium[i]), p - 1);
        const double d = (-fprime * z[i] + op.lower(i) * prev_diff) / op.upper(i);
        z[i + 1] = z[i] + d;
        prev_diff = d;
    }
    RadialProfile prof(op.grid_ptr(), std::move(z), "Z_h");
    detail::check_kernel_positive(prof);
    return {std::move(prof), KernelKind::Regular};
}

enum class Scheme { ImplicitEuler, CrankNicolson };

struct PinToProfile {
    RadialProfile profile;
};
struct PinToAsymptotic {
    double L = 0.0;
    double m = 0.0;
    double a = 0.0;
    double lambda1 = 0.0;
};
using FarField = std::variant<PinToProfile, PinToAsymptotic>;

inline double far_field_value(const FarField& ff, double r_max) {
    if (const auto* pin = std::get_if<PinToProfile>(&ff)) return pin->profile.at(r_max);
    const auto& asym = std::get<PinToAsymptotic>(ff);
    return asym.L * std::pow(r_max, -asym.m) + asym.a * std::pow(r_max, -asym.m - asym.lambda1);
}

/// Per-step diagnostics requested from evolve_until.
struct DiagnosticsSpec {
    std::optional<DecayWindow> decay;
    std::optional<KernelElement> sweep_kernel;
    std::optional<RadialProfile> lower;
    std::optional<RadialProfile> upper;
};

struct EvolutionConfig {
    SpectralConstants constants;
    GridPtr grid;
    Scheme scheme = Scheme::ImplicitEuler;
    double dt = 1e-3;
    /// Local error tolerance for dt adaptation; 0 keeps dt fixed.
    double dt_control = 1e-6;
    double dt_max = std::numeric_limits<double>::infinity();
    double t_max = 10.0;
    std::optional<FarField> far_field;  // default: pin to u0's own far-field value
    /// Stop once ||A u + |u|^{p-1}u||_inf drops below this; 0 disables.
    double convergence_eps = 0.0;
    double newton_tol = 1e-10;
    int newton_max_iter = 30;
    int max_retries = 10;
    long max_steps = 2'000'000;
    int store_every = 1;

    /// Tolerance used for ordering flags: 10x the Newton tolerance.
    double ordering_tol() const noexcept { return 10 * newton_tol; }

    void validate() const {
        require(grid != nullptr, ErrorKind::ConfigInvalid, "evolution.grid missing");
        require(dt > 0.0 && std::isfinite(dt), ErrorKind::ConfigInvalid, "evolution.dt must be > 0");
        require(t_max > 0.0, ErrorKind::ConfigInvalid, "evolution.t_max must be > 0");
        require(dt_control >= 0.0, ErrorKind::ConfigInvalid, "evolution.dt_control must be >= 0");
        require(store_every >= 1, ErrorKind::ConfigInvalid, "evolution.store_every must be >= 1");
    }
};

struct StepRecord {
    long step = 0;
    double t = 0.0;
    double dt = 0.0;
    double residual = 0.0;
    double gamma_est = 0.0;
    double weighted_decay = std::numeric_limits<double>::quiet_NaN();
    double sweep_plus = std::numeric_limits<double>::quiet_NaN();
    double sweep_minus = std::numeric_limits<double>::quiet_NaN();
    std::optional<bool> ordering_ok;
    int newton_iterations = 0;
};

struct Trajectory {
    std::vector<EvolutionState> states;
    std::vector<StepRecord> diagnostics;
    bool converged = false;

    const EvolutionState& final_state() const { return states.back(); }
};

namespace detail {

/// Solves tridiagonal (sub, diag, sup) x = rhs in place of rhs.
inline void thomas(std::vector<double>& sub, std::vector<double>& diag, std::vector<double>& sup,
                   std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double w = sub[i] / diag[i - 1];
        diag[i] -= w * sup[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    rhs[n - 1] /= diag[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
}

inline bool within_bounds(const RadialProfile& u, const RadialProfile& lower, const RadialProfile& upper,
                          double tol) {
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] < lower[i] - tol || u[i] > upper[i] + tol) return false;
    return true;
}

} // namespace detail

inline double steady_residual(const RadialOperator& op, std::span<const double> u, double p) {
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < u.size(); ++i)
        worst = std::max(worst, std::abs(op.apply_at(u, i) + signed_pow(u[i], p)));
    return worst;
}

/// One theta-scheme step with Newton on the interior unknowns. Returns the
/// new values and the Newton iteration count; throws NewtonDiverged.
struct StepOutcome {
    std::vector<double> u;
    int iterations = 0;
};

inline StepOutcome theta_step(const RadialOperator& op, double p, std::span<const double> u_old, double boundary,
                              double dt, double theta, const EvolutionConfig& cfg) {
    const std::size_t n = op.size();
    const std::size_t k = n - 1;  // unknowns 0..n-2
    std::vector<double> u(u_old.begin(), u_old.end());
    u[n - 1] = boundary;
    std::vector<double> explicit_part(k, 0.0);
    if (theta < 1.0) {
        for (std::size_t i = 0; i < k; ++i)
            explicit_part[i] = (1 - theta) * dt * (op.apply_at(u_old, i) + signed_pow(u_old[i], p));
    }
    std::vector<double> sub(k), diag(k), sup(k), rhs(k);
    for (int it = 1; it <= cfg.newton_max_iter; ++it) {
        double scaled_res = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double fp = p * std::pow(std::abs(u[i]), p - 1);
            const double lo = i > 0 ? op.lower(i) : 0.0, up = op.upper(i);
            sub[i] = -theta * dt * lo;
            sup[i] = i + 1 < k ? -theta * dt * up : 0.0;
            diag[i] = 1.0 + theta * dt * (lo + up - fp);
            const double g = u[i] - u_old[i] - theta * dt * (op.apply_at(u, i) + signed_pow(u[i], p)) - explicit_part[i];
            rhs[i] = -g;
            const double scale = 1.0 + theta * dt * (lo + up);
            scaled_res = std::max(scaled_res, std::abs(g) / scale);
        }
        if (!std::isfinite(scaled_res)) break;
        if (scaled_res < cfg.newton_tol && it > 1) return {std::move(u), it - 1};
        detail::thomas(sub, diag, sup, rhs);
        double du = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            u[i] += rhs[i];
            du = std::max(du, std::abs(rhs[i]));
        }
        if (!std::isfinite(du)) break;
        if (du < 1e-3 * cfg.newton_tol * std::max(1.0, sup_norm(u))) return {std::move(u), it};
    }
    throw Error(ErrorKind::NewtonDiverged, "Newton failed at dt=" + std::to_string(dt));
}

class Evolver {
public:
    Evolver(EvolutionConfig cfg, const RadialProfile& u0)
        : cfg_(std::move(cfg)), op_(cfg_.grid, cfg_.constants.dim()), p_(cfg_.constants.p()) {
        cfg_.validate();
        require(u0.size() == cfg_.grid->size(), ErrorKind::InvalidArgument, "u0 not on the evolution grid");
        const double r_max = cfg_.grid->r_max();
        boundary_ = cfg_.far_field ? far_field_value(*cfg_.far_field, r_max) : u0[u0.size() - 1];
        std::vector<double> v = u0.values();
        v.back() = boundary_;
        state_ = make_state(0.0, std::move(v));
        const double r1 = (*cfg_.grid)[1];
        if (cfg_.constants.L) blowup_threshold_ = 10 * cfg_.constants.amplitude() * std::pow(r1, -cfg_.constants.m);
        dt_ = cfg_.dt;
    }

    const EvolutionState& state() const noexcept { return state_; }
    const RadialOperator& op() const noexcept { return op_; }
    double dt() const noexcept { return dt_; }
    double boundary() const noexcept { return boundary_; }
    double residual() const { return steady_residual(op_, state_.u.values(), p_); }

    /// Advances by one accepted step (halving dt on Newton failure or
    /// local-error rejection), then proposes the next dt.
    int step() {
        const double theta = cfg_.scheme == Scheme::ImplicitEuler ? 1.0 : 0.5;
        int retries = 0;
        for (;;) {
            const double dt = std::min({dt_, cfg_.dt_max, cfg_.t_max - state_.t});
            StepOutcome out;
            try {
                out = theta_step(op_, p_, state_.u.values(), boundary_, dt, theta, cfg_);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NewtonDiverged || ++retries > cfg_.max_retries) throw;
                dt_ = dt / 2;
                continue;
            }
            for (double x : out.u)
                if (!(std::abs(x) <= blowup_threshold_))
                    throw Error(ErrorKind::BlowupDetected, "max|u| exceeds 10 phi_inf(r_1) at t=" +
                                                               std::to_string(state_.t + dt));
            std::vector<double> rate = discrete_rate(op_, out.u, p_);
            if (cfg_.dt_control > 0.0) {
                double change = 0.0;
                for (std::size_t i = 0; i < rate.size(); ++i)
                    change = std::max(change, std::abs(rate[i] - state_.u_t[i]));
                const double est = 0.5 * dt * change;
                if (est > cfg_.dt_control && dt > 1e-14) {
                    dt_ = dt / 2;
                    continue;
                }
                dt_ = est < 0.5 * cfg_.dt_control ? 2 * dt : dt;
            } else {
                dt_ = cfg_.dt;
            }
            last_dt_ = dt;
            const double t_new = (cfg_.t_max - state_.t - dt <= 1e-12 * cfg_.t_max) ? cfg_.t_max : state_.t + dt;
            state_ = make_state(t_new, std::move(out.u), std::move(rate));
            return out.iterations;
        }
    }

    double last_dt() const noexcept { return last_dt_; }

private:
    EvolutionState make_state(double t, std::vector<double> u, std::vector<double> rate = {}) const {
        if (rate.empty()) rate = discrete_rate(op_, u, p_);
        return {t, RadialProfile(cfg_.grid, std::move(u), "u"), RadialProfile(cfg_.grid, std::move(rate), "u_t")};
    }

    EvolutionConfig cfg_;
    RadialOperator op_;
    double p_;
    double boundary_ = 0.0;
    double blowup_threshold_ = std::numeric_limits<double>::infinity();
    double dt_ = 0.0;
    double last_dt_ = 0.0;
    EvolutionState state_;
};

/// Single step from an arbitrary state with the configured dt and far field.
inline EvolutionState step(const EvolutionState& state, const EvolutionConfig& cfg) {
    EvolutionConfig one = cfg;
    one.dt_control = 0.0;
    one.t_max = state.t + cfg.dt;
    Evolver ev(one, state.u);
    ev.step();
    EvolutionState out = ev.state();
    out.t = state.t + cfg.dt;
    return out;
}

inline StepRecord record_for(const EvolutionState& s, long step, double dt, double residual, int newton,
                             const EvolutionConfig& cfg, const DiagnosticsSpec& diag) {
    StepRecord rec;
    rec.step = step;
    rec.t = s.t;
    rec.dt = dt;
    rec.residual = residual;
    rec.gamma_est = s.u[0];
    rec.newton_iterations = newton;
    if (diag.decay) rec.weighted_decay = weighted_decay(s, cfg.constants, *diag.decay).weighted_sup;
    if (diag.sweep_kernel) {
        const SweepRecord sw = sweeping_ratio(s, *diag.sweep_kernel);
        rec.sweep_plus = sw.lambda_plus;
        rec.sweep_minus = sw.lambda_minus;
    }
    if (diag.lower && diag.upper) rec.ordering_ok = detail::within_bounds(s.u, *diag.lower, *diag.upper, cfg.ordering_tol());
    return rec;
}

/// Runs until t_max or until the steady residual drops below convergence_eps.
inline Trajectory evolve_until(const EvolutionConfig& cfg, const RadialProfile& u0, const DiagnosticsSpec& diag = {}) {
    Evolver ev(cfg, u0);
    Trajectory traj;
    traj.states.push_back(ev.state());
    double res = ev.residual();
    traj.diagnostics.push_back(record_for(ev.state(), 0, 0.0, res, 0, cfg, diag));
    long steps = 0;
    while (!(cfg.convergence_eps > 0.0 && res < cfg.convergence_eps) && ev.state().t < cfg.t_max) {
        require(steps < cfg.max_steps, ErrorKind::NotConverged, "step budget exhausted");
        const int newton = ev.step();
        ++steps;
        res = ev.residual();
        traj.diagnostics.push_back(record_for(ev.state(), steps, ev.last_dt(), res, newton, cfg, diag));
        if (steps % cfg.store_every == 0) traj.states.push_back(ev.state());
    }
    if (traj.states.back().t != ev.state().t) traj.states.push_back(ev.state());
    traj.converged = cfg.convergence_eps > 0.0 && res < cfg.convergence_eps;
    return traj;
}

/// lower - tol <= u <= upper + tol at every node, for each stored state.
inline std::vector<bool> comparison_check(const Trajectory& traj, const RadialProfile& lower,
                                          const RadialProfile& upper, double tol) {
    std::vector<bool> flags;
    flags.reserve(traj.states.size());
    for (const auto& s : traj.states) flags.push_back(detail::within_bounds(s.u, lower, upper, tol));
    return flags;
}

// ---------------------------------------------------------------------------
// Initial data and the quasiconvergence experiment

struct SteadyPreset {
    double alpha = 1.0;
};
struct BlendPreset {
    double alpha = 1.0;
    double beta = 2.0;
    double weight = 0.5;
};
/// phi_alpha + smooth compactly supported bump, optionally capped by phi_cap.
struct BumpPreset {
    double alpha = 1.0;
    double center = 2.0;
    double width = 1.0;
    double height = 0.1;
    std::optional<double> cap;
};
using InitialSpec = std::variant<SteadyPreset, BlendPreset, BumpPreset>;

inline double smooth_bump(double r, double center, double width) {
    const double s = (r - center) / width;
    if (std::abs(s) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

/// Builds u0 from discrete equilibria of the evolution operator.
inline RadialProfile make_initial(const RadialOperator& op, double p, const InitialSpec& spec) {
    const GridPtr& grid = op.grid_ptr();
    std::vector<double> v(grid->size());
    if (const auto* s = std::get_if<SteadyPreset>(&spec)) return discrete_equilibrium(op, p, s->alpha);
    if (const auto* b = std::get_if<BlendPreset>(&spec)) {
        require(b->weight >= 0.0 && b->weight <= 1.0, ErrorKind::ConfigInvalid, "blend weight must be in [0,1]");
        const RadialProfile lo = discrete_equilibrium(op, p, b->alpha);
        const RadialProfile hi = discrete_equilibrium(op, p, b->beta);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1 - b->weight) * lo[i] + b->weight * hi[i];
        return RadialProfile(grid, std::move(v), "blend");
    }
    const auto& bump = std::get<BumpPreset>(spec);
    require(bump.width > 0.0, ErrorKind::ConfigInvalid, "bump width must be > 0");
    const RadialProfile base = discrete_equilibrium(op, p, bump.alpha);
    std::optional<RadialProfile> cap;
    if (bump.cap) cap = discrete_equilibrium(op, p, *bump.cap);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = base[i] + bump.height * smooth_bump((*grid)[i], bump.center, bump.width);
        if (cap) v[i] = std::min(v[i], (*cap)[i]);
    }
    return RadialProfile(grid, std::move(v), "bump");
}

struct QuasiconvergenceResult {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma_est = 0.0;
    double match_error = 0.0;
    bool gamma_in_bracket = false;
    bool ordering_ok = true;
    double final_residual = 0.0;
    Trajectory trajectory;
};

/// Evolves u0 bracketed by the discrete equilibria with centers alpha < beta
/// and compares the limit with phi_gamma, gamma = u(0, T).
/// `base` is the alpha = 1 ground state used for phi_gamma.
inline QuasiconvergenceResult quasiconvergence_experiment(double alpha, double beta, const InitialSpec& u0_spec,
                                                          const EvolutionConfig& cfg, const SteadyStateSolution& base,
                                                          std::optional<DecayWindow> decay = DecayWindow{}) {
    require(alpha > 0.0 && beta > alpha && std::isfinite(beta), ErrorKind::InvalidArgument,
            "need 0 < alpha < beta < inf");
    const double p = cfg.constants.p();
    const RadialOperator op(cfg.grid, cfg.constants.dim());
    const RadialProfile lower = discrete_equilibrium(op, p, alpha);
    const RadialProfile upper = discrete_equilibrium(op, p, beta);
    const RadialProfile u0 = make_initial(op, p, u0_spec);
    require(detail::within_bounds(u0, lower, upper, cfg.ordering_tol()), ErrorKind::InvalidArgument,
            "u0 is not between phi_alpha and phi_beta");

    DiagnosticsSpec diag;
    diag.lower = lower;
    diag.upper = upper;
    diag.sweep_kernel = discrete_kernel(op, p, upper);
    if (decay && decay->r_hi <= cfg.grid->r_max() / 2) diag.decay = decay;

    QuasiconvergenceResult res;
    res.alpha = alpha;
    res.beta = beta;
    res.trajectory = evolve_until(cfg, u0, diag);
    res.final_residual = res.trajectory.diagnostics.back().residual;
    if (!res.trajectory.converged)
        throw Error(ErrorKind::NotConverged, "steady residual " + std::to_string(res.final_residual) +
                                                 " above " + std::to_string(cfg.convergence_eps) + " at t_max");
    for (const auto& rec : res.trajectory.diagnostics) res.ordering_ok = res.ordering_ok && rec.ordering_ok.value_or(true);

    const RadialProfile& u = res.trajectory.final_state().u;
    res.gamma_est = u[0];
    const double slack = cfg.ordering_tol();
    res.gamma_in_bracket = res.gamma_est >= alpha - slack && res.gamma_est <= beta + slack;
    const RadialProfile target = scale_family(base, res.gamma_est, cfg.grid);
    const double r_hi = cfg.grid->r_max() / 2;
    for (std::size_t i = 0; i < u.size() && u.r(i) <= r_hi; ++i)
        res.match_error = std::max(res.match_error, std::abs(u[i] - target[i]) / target[i]);
    return res;
}

} // namespace supercrit
