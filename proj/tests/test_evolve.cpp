#include <cmath>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "supercrit/evolve.hpp"

using namespace supercrit;

namespace {

struct Small {
    SpectralConstants sc = SpectralConstants::compute({13, 3.0});
    GridPtr grid = make_grid({1.0, 60, 300.0});
    SteadyStateSolution base = solve_ground_profile({13, 3.0}, grid);
    RadialOperator op{grid, 13};

    EvolutionConfig config(double t_max = 1.0) const {
        EvolutionConfig cfg;
        cfg.constants = sc;
        cfg.grid = grid;
        cfg.dt = 1e-3;
        cfg.dt_control = 1e-6;
        cfg.t_max = t_max;
        return cfg;
    }
};

const Small& small() {
    static const Small s;
    return s;
}

RadialProfile mix(const RadialProfile& a, const RadialProfile& b, double w) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1 - w) * a[i] + w * b[i];
    return RadialProfile(a.grid_ptr(), v);
}

} // namespace

TEST(RadialOperator, ExactOnConstantsAndQuadratics) {
    const auto& s = small();
    std::vector<double> one(s.grid->size(), 1.0), sq(s.grid->size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = (*s.grid)[i] * (*s.grid)[i];
    for (std::size_t i = 0; i + 1 < sq.size(); ++i) {
        ASSERT_NEAR(s.op.apply_at(one, i), 0.0, 1e-12);
        // midpoint fluxes are exact for r^2, so the cell average of Delta r^2 = 2N is exact
        ASSERT_NEAR(s.op.apply_at(sq, i), 2.0 * 13, 1e-7) << "i=" << i;
    }
}

TEST(RadialOperator, OffDiagonalsPositive) {
    const auto& s = small();
    for (std::size_t i = 0; i + 1 < s.grid->size(); ++i) {
        ASSERT_GT(s.op.upper(i), 0.0);
        if (i > 0) ASSERT_GT(s.op.lower(i), 0.0);
    }
    EXPECT_EQ(s.op.lower(0), 0.0);
}

TEST(DiscreteEquilibrium, IsAFixedPointCloseToContinuous) {
    const auto& s = small();
    for (double g : {0.5, 1.0, 2.0}) {
        const auto eq = discrete_equilibrium(s.op, 3.0, g);
        EXPECT_EQ(eq[0], g);
        EXPECT_LT(steady_residual(s.op, eq.values(), 3.0), 1e-9 * g * g * g);
        const auto cont = scale_family(s.base, g, s.grid);
        for (std::size_t i = 0; i < eq.size(); ++i) {
            // second-order scheme, core spacing 1/60
            ASSERT_LT(std::abs(eq[i] - cont[i]) / cont[i], 1e-3) << "gamma=" << g << " r=" << eq.r(i);
            if (i) ASSERT_LT(eq[i], eq[i - 1]);
        }
    }
}

TEST(DiscreteKernel, IsDerivativeOfDiscreteFamily) {
    const auto& s = small();
    const auto eq = discrete_equilibrium(s.op, 3.0, 1.5);
    const auto z = discrete_kernel(s.op, 3.0, eq);
    const double h = 1e-5;
    const auto up = discrete_equilibrium(s.op, 3.0, 1.5 + h), dn = discrete_equilibrium(s.op, 3.0, 1.5 - h);
    for (std::size_t i = 0; i < z.size(); ++i) {
        ASSERT_GT(z[i], 0.0);
        ASSERT_NEAR((up[i] - dn[i]) / (2 * h), z[i], 1e-7);
    }
}

TEST(Step, DiscreteEquilibriumIsFixedPoint) {
    const auto& s = small();
    const auto eq = discrete_equilibrium(s.op, 3.0, 2.0);
    EvolutionConfig cfg = s.config();
    cfg.dt = 0.05;
    const EvolutionState st{0.0, eq, RadialProfile(s.grid, discrete_rate(s.op, eq.values(), 3.0))};
    const auto next = step(st, cfg);
    EXPECT_DOUBLE_EQ(next.t, 0.05);
    EXPECT_LT(sup_difference(next.u, eq), 1e-10);
    EXPECT_LT(sup_norm(next.u_t.values()), 1e-8);
}

TEST(EvolveUntil, EquilibriumTerminatesImmediately) {
    const auto& s = small();
    EvolutionConfig cfg = s.config(100.0);
    cfg.convergence_eps = 1e-6;
    const auto traj = evolve_until(cfg, discrete_equilibrium(s.op, 3.0, 1.0));
    EXPECT_TRUE(traj.converged);
    EXPECT_EQ(traj.diagnostics.size(), 1u);
    EXPECT_EQ(traj.final_state().t, 0.0);
}

TEST(EvolveUntil, LinearRegimeMatchesLinearStepper) {
    const auto& s = small();
    const auto phi = discrete_equilibrium(s.op, 3.0, 1.0);
    const std::size_t n = s.grid->size();
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = smooth_bump((*s.grid)[i], 1.0, 0.8);
    const double eps = 1e-6, dt = 0.01;
    const int steps = 20;
    std::vector<double> u0(n);
    for (std::size_t i = 0; i < n; ++i) u0[i] = phi[i] + eps * w[i];
    EvolutionConfig cfg = s.config(dt * steps);
    cfg.dt = dt;
    cfg.dt_control = 0.0;
    const auto traj = evolve_until(cfg, RadialProfile(s.grid, u0));

    // separate implicit Euler for w_t = A w + p Phi^{p-1} w, dense LU, w = 0 at the last node
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double lo = i ? s.op.lower(i) : 0.0, up = s.op.upper(i);
        M(i, i) += dt * (lo + up - 3.0 * phi[i] * phi[i]);
        if (i) M(i, i - 1) -= dt * lo;
        M(i, i + 1) -= dt * up;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
    Eigen::VectorXd lin = Eigen::Map<const Eigen::VectorXd>(w.data(), n);
    lin[n - 1] = 0.0;
    for (int k = 0; k < steps; ++k) lin = lu.solve(lin);

    const auto& u = traj.final_state().u;
    double err = 0.0;
    for (std::size_t i = 0; i < n; ++i) err = std::max(err, std::abs((u[i] - phi[i]) / eps - lin[i]));
    EXPECT_LT(err, 1e-4 * lin.cwiseAbs().maxCoeff());
}

TEST(EvolveUntil, OrderPreservation) {
    const auto& s = small();
    const auto lo = discrete_equilibrium(s.op, 3.0, 1.0), hi = discrete_equilibrium(s.op, 3.0, 2.0);
    EvolutionConfig cfg = s.config(5.0);
    cfg.dt = 0.01;
    cfg.dt_control = 0.0;
    const auto a = evolve_until(cfg, mix(lo, hi, 0.3));
    const auto b = evolve_until(cfg, mix(lo, hi, 0.7));
    ASSERT_EQ(a.states.size(), b.states.size());
    for (std::size_t k = 0; k < a.states.size(); ++k) {
        ASSERT_EQ(a.states[k].t, b.states[k].t);
        for (std::size_t i = 0; i < a.states[k].u.size(); ++i)
            ASSERT_LE(a.states[k].u[i], b.states[k].u[i] + cfg.ordering_tol());
    }
}

TEST(EvolveUntil, TimesStrictlyIncreasingAndThinned) {
    const auto& s = small();
    EvolutionConfig cfg = s.config(2.0);
    cfg.store_every = 7;
    const auto lo = discrete_equilibrium(s.op, 3.0, 1.0), hi = discrete_equilibrium(s.op, 3.0, 2.0);
    const auto traj = evolve_until(cfg, mix(lo, hi, 0.5));
    EXPECT_LT(traj.states.size(), traj.diagnostics.size());
    for (std::size_t k = 1; k < traj.states.size(); ++k) ASSERT_GT(traj.states[k].t, traj.states[k - 1].t);
    for (std::size_t k = 1; k < traj.diagnostics.size(); ++k) ASSERT_GT(traj.diagnostics[k].t, traj.diagnostics[k - 1].t);
    EXPECT_DOUBLE_EQ(traj.final_state().t, 2.0);
}

namespace {

double refinement_ratio(Scheme scheme, double dt) {
    const auto& s = small();
    const auto u0 = scale_family(s.base, 2.0, s.grid);  // not a discrete equilibrium: nontrivial flow
    std::vector<RadialProfile> fin;
    for (double h : {dt, dt / 2, dt / 4}) {
        EvolutionConfig cfg = s.config(1.0);
        cfg.scheme = scheme;
        cfg.dt = h;
        cfg.dt_control = 0.0;
        cfg.newton_tol = 1e-13;
        fin.push_back(evolve_until(cfg, u0).final_state().u);
    }
    return sup_difference(fin[0], fin[1]) / sup_difference(fin[1], fin[2]);
}

} // namespace

TEST(TimeRefinement, ImplicitEulerFirstOrder) { EXPECT_NEAR(refinement_ratio(Scheme::ImplicitEuler, 0.02), 2.0, 0.3); }

TEST(TimeRefinement, CrankNicolsonSecondOrder) { EXPECT_NEAR(refinement_ratio(Scheme::CrankNicolson, 0.02), 4.0, 0.6); }

TEST(EvolveUntil, SteadyResidualEventuallyMonotone) {
    const auto& s = small();
    EvolutionConfig cfg = s.config(1e9);
    cfg.convergence_eps = 1e-7;
    const auto lo = discrete_equilibrium(s.op, 3.0, 1.0), hi = discrete_equilibrium(s.op, 3.0, 2.0);
    const auto traj = evolve_until(cfg, mix(lo, hi, 0.5));
    ASSERT_TRUE(traj.converged);
    const auto& d = traj.diagnostics;
    for (std::size_t k = d.size() / 10 + 1; k < d.size(); ++k) ASSERT_LE(d[k].residual, d[k - 1].residual + 1e-9);
}

TEST(ComparisonCheck, FlagsBracketAndViolation) {
    const auto& s = small();
    const auto lo = discrete_equilibrium(s.op, 3.0, 1.0), hi = discrete_equilibrium(s.op, 3.0, 2.0);
    EvolutionConfig cfg = s.config(0.5);
    const auto at_lower = comparison_check(evolve_until(cfg, lo), lo, hi, cfg.ordering_tol());
    for (bool f : at_lower) EXPECT_TRUE(f);
    const auto between = comparison_check(evolve_until(cfg, mix(lo, hi, 0.2)), lo, hi, cfg.ordering_tol());
    for (bool f : between) EXPECT_TRUE(f);
    std::vector<double> above(hi.values());
    for (std::size_t i = 0; i + 1 < above.size(); ++i) above[i] += 0.01 * smooth_bump(hi.r(i), 0.5, 0.5);
    const auto violated = comparison_check(evolve_until(cfg, RadialProfile(s.grid, above)), lo, hi, cfg.ordering_tol());
    EXPECT_FALSE(violated.front());
}

TEST(Quasiconvergence, EquilibriumStartIsItsOwnLimit) {
    const auto& s = small();
    EvolutionConfig cfg = s.config(1e9);
    cfg.convergence_eps = 1e-6;
    const auto q = quasiconvergence_experiment(1.0, 2.0, SteadyPreset{1.5}, cfg, s.base);
    EXPECT_DOUBLE_EQ(q.gamma_est, 1.5);
    EXPECT_LT(q.match_error, 1e-3);  // discrete vs continuous phi_1.5 on the coarse test grid
    EXPECT_TRUE(q.gamma_in_bracket);
}

TEST(Quasiconvergence, CappedBumpStaysBracketed) {
    const auto& s = small();
    EvolutionConfig cfg = s.config(1e9);
    cfg.convergence_eps = 1e-6;
    const auto q = quasiconvergence_experiment(1.0, 2.0, BumpPreset{1.0, 1.0, 0.8, 2.0, 2.0}, cfg, s.base);
    EXPECT_TRUE(q.gamma_in_bracket);
    EXPECT_GT(q.gamma_est, 1.0);
    EXPECT_LT(q.gamma_est, 2.0);
    EXPECT_TRUE(q.ordering_ok);
    EXPECT_LT(q.match_error, 1e-3);
    for (const auto& r : q.trajectory.diagnostics) {
        ASSERT_TRUE(r.ordering_ok.has_value());
        ASSERT_TRUE(*r.ordering_ok);
    }
}

TEST(Quasiconvergence, NotConvergedWithinHorizon) {
    const auto& s = small();
    EvolutionConfig cfg = s.config(0.01);
    cfg.convergence_eps = 1e-12;
    try {
        quasiconvergence_experiment(1.0, 2.0, BlendPreset{1.0, 2.0, 0.5}, cfg, s.base);
        FAIL() << "expected NotConverged";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotConverged);
    }
}

TEST(Quasiconvergence, RejectsUnorderedInput) {
    const auto& s = small();
    EXPECT_THROW(quasiconvergence_experiment(1.0, 2.0, SteadyPreset{3.0}, s.config(), s.base), Error);
    EXPECT_THROW(quasiconvergence_experiment(2.0, 1.0, SteadyPreset{1.5}, s.config(), s.base), Error);
}

TEST(Step, BlowupGuard) {
    const auto& s = small();
    std::vector<double> big(discrete_equilibrium(s.op, 3.0, 1.0).values());
    for (auto& v : big) v *= 200.0;
    EvolutionConfig cfg = s.config(1.0);
    cfg.dt = 1e-6;
    cfg.dt_control = 0.0;
    try {
        evolve_until(cfg, RadialProfile(s.grid, big));
        FAIL() << "expected BlowupDetected";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BlowupDetected);
    }
}

TEST(FarField, AsymptoticPinValue) {
    const auto& s = small();
    const FarField ff = PinToAsymptotic{s.sc.amplitude(), s.sc.m, -995.7, s.sc.lambda1()};
    const double R = 300.0;
    EXPECT_DOUBLE_EQ(far_field_value(ff, R),
                     s.sc.amplitude() / R - 995.7 * std::pow(R, -s.sc.kernel_decay()));
    EvolutionConfig cfg = s.config(0.1);
    cfg.far_field = ff;
    Evolver ev(cfg, discrete_equilibrium(s.op, 3.0, 1.0));
    EXPECT_DOUBLE_EQ(ev.state().u[s.grid->size() - 1], far_field_value(ff, R));
}

TEST(EvolutionConfig, Validation) {
    const auto& s = small();
    EvolutionConfig cfg = s.config();
    cfg.dt = 0.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = s.config();
    cfg.t_max = -1.0;
    EXPECT_THROW(cfg.validate(), Error);
    cfg = s.config();
    cfg.grid = nullptr;
    EXPECT_THROW(cfg.validate(), Error);
}
