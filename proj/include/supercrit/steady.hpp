#pragma once

// Radial ground state of  u'' + (N-1)/r u' + |u|^{p-1} u = 0,  u(0) = alpha,
// its scaling family, the singular solution L r^{-m}, and the far-field
// coefficient of the first kernel mode.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "supercrit/constants.hpp"
#include "supercrit/profile.hpp"
#include "supercrit/stencil.hpp"

namespace supercrit {

inline double signed_pow(double u, double p) { return std::copysign(std::pow(std::abs(u), p), u); }

struct FitWindow {
    double r_lo = 5.0;
    double r_hi = 50.0;
};

/// Far-field fit of q(r) = (u - L r^{-m}) r^{m+lambda1}.
/// For p > p_c the model is a + c1 r^{-(lambda2-lambda1)} + c2 r^{-lambda1}: the
/// second kernel mode and the first nonlinear correction both contaminate a
/// plain constant fit at the radii where double precision still resolves q.
/// For p = p_c the model is b ln r + c.
struct TailFit {
    double coefficient = 0.0;
    bool logarithmic = false;
    FitWindow window;
    double residual = 0.0;
    std::vector<double> model;  // all fitted model coefficients, leading first
    std::size_t nodes = 0;
};

struct SolverTolerances {
    double abs = 1e-15;
    double rel = 1e-13;
    /// r0 = start_fraction * r_max, the radius where the series start hands over.
    double start_fraction = 1e-6;
    /// Max-norm bound on the fourth-order residual over [0, r_max/2].
    double residual = 1e-6;
};

struct SteadyStateSolution {
    SpectralConstants constants;
    double alpha = 1.0;
    RadialProfile phi;
    RadialProfile dphi;
    std::optional<TailFit> tail;
    double ode_residual = 0.0;

    double tail_a() const {
        require(tail && !tail->logarithmic, ErrorKind::InvalidArgument, "no power-law tail coefficient");
        return tail->coefficient;
    }
    double tail_b() const {
        require(tail && tail->logarithmic, ErrorKind::InvalidArgument, "no logarithmic tail coefficient");
        return tail->coefficient;
    }
};

namespace detail {

using State2 = std::array<double, 2>;
using State4 = std::array<double, 4>;

/// Series u = alpha (1 - s^2/(2N) + p s^4/(8N(N+2))), s = alpha^{(p-1)/2} r.
inline State2 ground_series(double alpha, double p, int n, double r) {
    const double k2 = std::pow(alpha, p - 1);
    const double c2 = -1.0 / (2.0 * n), c4 = p / (8.0 * n * (n + 2));
    const double s2 = k2 * r * r;
    return {alpha * (1 + c2 * s2 + c4 * s2 * s2), alpha * k2 * r * (2 * c2 + 4 * c4 * s2)};
}

/// Series for the kernel Z = 1 - p s^2/(2N) + p(2p-1) s^4/(8N(N+2)) of the alpha = 1 state.
inline std::array<double, 2> kernel_series(double p, int n, double r) {
    const double z2 = -p / (2.0 * n), z4 = p * (2 * p - 1) / (8.0 * n * (n + 2));
    return {1 + z2 * r * r + z4 * r * r * r * r, 2 * z2 * r + 4 * z4 * r * r * r};
}

template <class State, class System>
void integrate_segment(System&& sys, State& y, double r0, double r1, const SolverTolerances& tol) {
    namespace odeint = boost::numeric::odeint;
    auto stepper = odeint::make_controlled(tol.abs, tol.rel, odeint::runge_kutta_fehlberg78<State>());
    odeint::integrate_adaptive(stepper, sys, y, r0, r1, (r1 - r0) / 4);
}

} // namespace detail

/// Default fit window: keeps the first-mode correction r^{-lambda1} between
/// 1e-12 and 1e-2 of the leading term.
inline FitWindow default_fit_window(const SpectralConstants& sc, double r_max) {
    const double lambda1 = sc.lambda1();
    const double lo = std::max(5.0, std::pow(10.0, 2.0 / lambda1));
    const double hi = std::min({10.0 * lo, std::pow(10.0, 12.0 / lambda1), r_max / 2});
    return {lo, hi};
}

inline TailFit fit_tail(const SpectralConstants& sc, std::span<const double> r, std::span<const double> u,
                        FitWindow window) {
    require(window.r_lo > 0.0 && window.r_hi > window.r_lo, ErrorKind::InvalidArgument, "invalid fit window");
    const double m = sc.m, L = sc.amplitude();
    const LambdaRoots roots = sc.lambdas();
    const double lambda1 = roots.lambda1;
    const bool log_branch = roots.repeated;

    // relative size of a unit-coefficient correction at the outer edge
    const double outer = std::pow(window.r_hi, -lambda1) * (log_branch ? std::log(window.r_hi) : 1.0);
    if (outer < 100 * std::numeric_limits<double>::epsilon())
        throw Error(ErrorKind::PrecisionLoss, "correction term below 100 eps at r=" + std::to_string(window.r_hi));

    std::vector<double> rs, qs;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r[i] < window.r_lo || r[i] > window.r_hi) continue;
        rs.push_back(r[i]);
        qs.push_back((u[i] - L * std::pow(r[i], -m)) * std::pow(r[i], m + lambda1));
    }
    if (rs.size() < 10)
        throw Error(ErrorKind::WindowTooNarrow, std::to_string(rs.size()) + " nodes in fit window (need 10)");

    const double gap = roots.lambda2 - lambda1;
    const int cols = log_branch ? 2 : (gap > 0.05 ? 3 : 2);
    Eigen::MatrixXd A(rs.size(), cols);
    Eigen::VectorXd b(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) {
        const double x = rs[i];
        if (log_branch) {
            A(i, 0) = std::log(x);
            A(i, 1) = 1.0;
        } else {
            A(i, 0) = 1.0;
            if (cols == 3) A(i, 1) = std::pow(x, -gap);
            A(i, cols - 1) = std::pow(x, -lambda1);
        }
        b(i) = qs[i];
    }
    const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(b);
    const Eigen::VectorXd res = A * coef - b;

    TailFit fit;
    fit.logarithmic = log_branch;
    fit.window = window;
    fit.coefficient = coef(0);
    fit.model.assign(coef.data(), coef.data() + coef.size());
    fit.nodes = rs.size();
    const double scale = std::max(std::abs(coef(0)), b.cwiseAbs().maxCoeff());
    fit.residual = scale > 0 ? std::sqrt(res.squaredNorm() / rs.size()) / scale : 0.0;
    return fit;
}

inline TailFit fit_asymptotic_coefficient(const SteadyStateSolution& sol, FitWindow window) {
    require(window.r_hi <= sol.phi.grid().r_max(), ErrorKind::InvalidArgument, "fit window beyond computed range");
    return fit_tail(sol.constants, sol.phi.grid().nodes(), sol.phi.values(), window);
}

/// Max-norm of  Delta u + |u|^{p-1} u  over nodes with r <= r_hi, using the fourth-order stencil.
inline double steady_residual4(const RadialProfile& u, int dim, double p, double r_hi) {
    const RadialLaplacian4 lap(u.grid(), dim);
    double worst = 0.0;
    for (std::size_t i = 0; i < u.size() && u.r(i) <= r_hi; ++i)
        worst = std::max(worst, std::abs(lap.apply_at(u.values(), i) + signed_pow(u[i], p)));
    return worst;
}

/// Shoots the radial ODE outward from u(0) = alpha. Any valid (N, p) is
/// integrated; the tail fit needs p >= p_c.
inline SteadyStateSolution solve_ground_profile(const ProblemParams& params, const GridPtr& grid, double alpha = 1.0,
                                                const SolverTolerances& tol = {}, bool fit = true) {
    const SpectralConstants sc = SpectralConstants::compute(params);
    require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::InvalidArgument, "alpha must be positive");
    const int n = params.dim;
    const double p = params.exponent;
    const RadialGrid& g = *grid;
    const double r0 = tol.start_fraction * g.r_max();

    auto rhs = [n, p](const detail::State2& y, detail::State2& dy, double r) {
        dy[0] = y[1];
        dy[1] = -signed_pow(y[0], p) - (n - 1) / r * y[1];
    };

    std::vector<double> phi(g.size()), dphi(g.size());
    std::size_t i = 0;
    for (; i < g.size() && g[i] <= r0; ++i) {
        const auto s = detail::ground_series(alpha, p, n, g[i]);
        phi[i] = s[0];
        dphi[i] = s[1];
    }
    detail::State2 y = detail::ground_series(alpha, p, n, r0);
    double r = r0;
    for (; i < g.size(); ++i) {
        detail::integrate_segment(rhs, y, r, g[i], tol);
        r = g[i];
        if (!(y[0] > 0.0))
            throw Error(ErrorKind::NonPositiveProfile, "profile reaches " + std::to_string(y[0]) + " at r=" +
                                                           std::to_string(r) + " (subcritical input?)");
        phi[i] = y[0];
        dphi[i] = y[1];
    }

    SteadyStateSolution sol;
    sol.constants = sc;
    sol.alpha = alpha;
    const std::string tag = alpha == 1.0 ? "Phi" : "phi_" + std::to_string(alpha);
    sol.phi = RadialProfile(grid, phi, tag, dphi);
    // phi'' from the ODE itself, so phi' interpolates to the same order as phi
    std::vector<double> ddphi(g.size());
    ddphi[0] = -std::pow(alpha, p) / n;
    for (std::size_t k = 1; k < g.size(); ++k) ddphi[k] = -signed_pow(phi[k], p) - (n - 1) / g[k] * dphi[k];
    sol.dphi = RadialProfile(grid, dphi, tag + "'", ddphi);
    sol.ode_residual = steady_residual4(sol.phi, n, p, g.r_max() / 2);
    if (sol.ode_residual > tol.residual)
        throw Error(ErrorKind::ResidualTooLarge, "steady residual " + std::to_string(sol.ode_residual));
    if (!sc.supercritical())
        throw Error(ErrorKind::DiscriminantNegative, "p below p_c: no positive ordered family / tail expansion");
    if (fit) sol.tail = fit_tail(sc, g.nodes(), phi, default_fit_window(sc, g.r_max()));
    return sol;
}

inline SteadyStateSolution solve_ground_profile(const ProblemParams& params, const GridSpec& spec = {}) {
    return solve_ground_profile(params, make_grid(spec));
}

/// Phi(s) for any s >= 0; beyond the computed range the two-term tail is
/// continued from the last node.
inline std::array<double, 2> ground_value(const SteadyStateSolution& base, double s) {
    const RadialGrid& g = base.phi.grid();
    if (s <= g.r_max()) return {base.phi.at(s), base.dphi.at(s)};
    const double m = base.constants.m, L = base.constants.amplitude();
    const double R = g.r_max();
    const double k = base.constants.supercritical() ? m + base.constants.lambda1() : m + 2.0;
    const double corr = base.phi[g.size() - 1] - L * std::pow(R, -m);
    const double v = L * std::pow(s, -m) + corr * std::pow(s / R, -k);
    const double dv = -m * L * std::pow(s, -m - 1) - k * corr * std::pow(s / R, -k) / s;
    return {v, dv};
}

/// phi_alpha(r) = alpha Phi(alpha^{(p-1)/2} r) on the requested grid, carrying its derivative.
inline RadialProfile scale_family(const SteadyStateSolution& base, double alpha, const GridPtr& grid) {
    require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::InvalidArgument, "alpha must be positive");
    require(base.alpha == 1.0, ErrorKind::InvalidArgument, "scale_family expects the alpha = 1 ground state");
    const double p = base.constants.p();
    const double k = std::pow(alpha, (p - 1) / 2);
    std::vector<double> v(grid->size()), dv(grid->size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const auto [phi, dphi] = ground_value(base, k * (*grid)[i]);
        v[i] = alpha * phi;
        dv[i] = alpha * k * dphi;
    }
    v[0] = alpha;
    return RadialProfile(grid, std::move(v), "phi_" + std::to_string(alpha), std::move(dv));
}

inline RadialProfile scale_family(const SteadyStateSolution& base, double alpha) {
    return scale_family(base, alpha, base.phi.grid_ptr());
}

/// L r^{-m}; the origin node, if present, is flagged unbounded.
inline RadialProfile singular_profile(const SpectralConstants& sc, const GridPtr& grid) {
    const double L = sc.amplitude(), m = sc.m;
    std::vector<double> v(grid->size()), dv(grid->size());
    bool origin = false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = (*grid)[i];
        if (r == 0.0) {
            origin = true;
            v[i] = std::numeric_limits<double>::infinity();
            dv[i] = -std::numeric_limits<double>::infinity();
            continue;
        }
        v[i] = L * std::pow(r, -m);
        dv[i] = -m * v[i] / r;
    }
    return RadialProfile(grid, std::move(v), "phi_inf", std::move(dv), origin);
}

} // namespace supercrit
