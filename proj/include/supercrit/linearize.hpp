#pragma once

// Kernel elements of the linearized steady operator  Delta w + p |u|^{p-1} w
// at the ground state (Z) and at the singular solution (Z_inf and its partner).

#include <cmath>
#include <string>
#include <vector>

#include "supercrit/steady.hpp"

namespace supercrit {

enum class KernelKind { Regular, Singular, SingularSecond };

struct KernelElement {
    RadialProfile profile;
    KernelKind kind = KernelKind::Regular;

    double operator[](std::size_t i) const { return profile[i]; }
    std::size_t size() const noexcept { return profile.size(); }
};

namespace detail {

inline void check_kernel_positive(const RadialProfile& z) {
    for (std::size_t i = z.singular_origin() ? 1 : 0; i < z.size(); ++i)
        if (!(z[i] > 0.0))
            throw Error(ErrorKind::NonPositiveKernel,
                        "kernel value " + std::to_string(z[i]) + " at r=" + std::to_string(z.r(i)));
}

} // namespace detail

/// Z = Phi + (1/m) r Phi', the derivative of the scaling family at alpha = 1.
inline KernelElement kernel_from_steady(const SteadyStateSolution& sol) {
    require(sol.alpha == 1.0, ErrorKind::InvalidArgument, "kernel_from_steady expects the alpha = 1 ground state");
    const double m = sol.constants.m, p = sol.constants.p();
    const int n = sol.constants.dim();
    const RadialGrid& g = sol.phi.grid();
    std::vector<double> z(g.size()), dz(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double r = g[i], phi = sol.phi[i], dphi = sol.dphi[i];
        const double ddphi = i == 0 ? -1.0 / n : -signed_pow(phi, p) - (n - 1) / r * dphi;
        z[i] = phi + r * dphi / m;
        dz[i] = dphi * (1 + 1 / m) + r * ddphi / m;
    }
    z[0] = 1.0;
    RadialProfile prof(sol.phi.grid_ptr(), std::move(z), "Z", std::move(dz));
    detail::check_kernel_positive(prof);
    return {std::move(prof), KernelKind::Regular};
}

/// Independent route: integrate Z'' + (N-1)/r Z' + p Phi^{p-1} Z = 0, Z(0) = 1,
/// together with the ground state itself.
inline KernelElement kernel_by_ode(const SteadyStateSolution& sol, const SolverTolerances& tol = {}) {
    require(sol.alpha == 1.0, ErrorKind::InvalidArgument, "kernel_by_ode expects the alpha = 1 ground state");
    const int n = sol.constants.dim();
    const double p = sol.constants.p();
    const GridPtr& grid = sol.phi.grid_ptr();
    const RadialGrid& g = *grid;
    const double r0 = tol.start_fraction * g.r_max();

    auto rhs = [n, p](const detail::State4& y, detail::State4& dy, double r) {
        dy[0] = y[1];
        dy[1] = -signed_pow(y[0], p) - (n - 1) / r * y[1];
        dy[2] = y[3];
        dy[3] = -p * std::pow(std::abs(y[0]), p - 1) * y[2] - (n - 1) / r * y[3];
    };
    auto start = [&](double r) {
        const auto u = detail::ground_series(1.0, p, n, r);
        const auto z = detail::kernel_series(p, n, r);
        return detail::State4{u[0], u[1], z[0], z[1]};
    };

    std::vector<double> z(g.size()), dz(g.size());
    std::size_t i = 0;
    for (; i < g.size() && g[i] <= r0; ++i) {
        const auto s = start(g[i]);
        z[i] = s[2];
        dz[i] = s[3];
    }
    detail::State4 y = start(r0);
    double r = r0;
    for (; i < g.size(); ++i) {
        detail::integrate_segment(rhs, y, r, g[i], tol);
        r = g[i];
        if (!(y[0] > 0.0)) throw Error(ErrorKind::NonPositiveProfile, "ground state lost positivity");
        z[i] = y[2];
        dz[i] = y[3];
    }
    RadialProfile prof(grid, std::move(z), "Z_ode", std::move(dz));
    detail::check_kernel_positive(prof);
    return {std::move(prof), KernelKind::Regular};
}

enum class SingularWhich { First, Second };

/// r^{-m-lambda1}; the second element is r^{-m-lambda2} (p > p_c) or
/// ln r r^{-m-lambda1} (p = p_c), which changes sign at r = 1.
inline KernelElement singular_kernel(const SpectralConstants& sc, const GridPtr& grid, SingularWhich which) {
    const LambdaRoots& roots = sc.lambdas();
    const double g1 = sc.m + roots.lambda1, g2 = sc.m + roots.lambda2;
    const bool log_partner = which == SingularWhich::Second && roots.repeated;
    std::vector<double> w(grid->size()), dw(grid->size());
    bool origin = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = (*grid)[i];
        if (r == 0.0) {
            origin = true;
            w[i] = log_partner ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
            dw[i] = 0.0;
            continue;
        }
        if (which == SingularWhich::First) {
            w[i] = std::pow(r, -g1);
            dw[i] = -g1 * w[i] / r;
        } else if (!log_partner) {
            w[i] = std::pow(r, -g2);
            dw[i] = -g2 * w[i] / r;
        } else {
            const double base = std::pow(r, -g1);
            w[i] = std::log(r) * base;
            dw[i] = base / r * (1 - g1 * std::log(r));
        }
    }
    const char* label = which == SingularWhich::First ? "Z_inf" : (log_partner ? "Z_inf_log" : "Z_inf2");
    RadialProfile prof(grid, std::move(w), label, std::move(dw), origin);
    if (which == SingularWhich::First) detail::check_kernel_positive(prof);
    return {std::move(prof), which == SingularWhich::First ? KernelKind::Singular : KernelKind::SingularSecond};
}

/// Pointwise residual of Delta w + V w with the fourth-order stencil, relative
/// to |V w|, over nodes in [r_lo, r_hi]. Returns the max.
inline double linear_residual4(const RadialProfile& w, std::span<const double> potential, int dim, double r_lo,
                               double r_hi) {
    const RadialLaplacian4 lap(w.grid(), dim);
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = w.r(i);
        if (r < r_lo || r > r_hi || (w.singular_origin() && i < 3)) continue;
        const double vw = potential[i] * w[i];
        const double res = lap.apply_at(w.values(), i) + vw;
        worst = std::max(worst, std::abs(res) / std::max(std::abs(vw), std::numeric_limits<double>::min()));
    }
    return worst;
}

/// p (bound^{p-1} - |u|^{p-1}) Z: how far Z is from solving the linearization
/// at u, given that it solves the one at `bound`. Nonnegative when |u| <= bound.
inline RadialProfile supersolution_residual(const KernelElement& z, const RadialProfile& u, const RadialProfile& bound,
                                            double p) {
    require(z.size() == u.size() && u.size() == bound.size(), ErrorKind::InvalidArgument,
            "supersolution_residual: profiles on different grids");
    std::vector<double> out(u.size());
    bool origin = false;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (bound.singular_origin() && i == 0) {
            origin = true;
            out[i] = std::numeric_limits<double>::infinity();
            continue;
        }
        const double au = std::abs(u[i]);
        if (au > bound[i] * (1 + 1e-12))
            throw Error(ErrorKind::BoundViolated,
                        "|u|=" + std::to_string(au) + " > bound=" + std::to_string(bound[i]) + " at r=" +
                            std::to_string(u.r(i)));
        const double zi = z[i];
        out[i] = std::isfinite(zi) ? std::max(0.0, p * (std::pow(bound[i], p - 1) - std::pow(au, p - 1)) * zi)
                                   : std::numeric_limits<double>::infinity();
    }
    return RadialProfile(u.grid_ptr(), std::move(out), "supersolution_residual", std::nullopt, origin);
}

} // namespace supercrit
