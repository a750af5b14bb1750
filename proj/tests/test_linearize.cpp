#include <cmath>

#include <gtest/gtest.h>

#include "supercrit/linearize.hpp"

using namespace supercrit;

namespace {

const SteadyStateSolution& ground_13_3() {
    static const SteadyStateSolution sol = solve_ground_profile({13, 3.0}, make_grid({}));
    return sol;
}

std::vector<double> singular_potential(const SpectralConstants& sc, const RadialGrid& g) {
    std::vector<double> v(g.size(), 0.0);
    const double c = sc.p() * std::pow(sc.amplitude(), sc.p() - 1);
    for (std::size_t i = 1; i < g.size(); ++i) v[i] = c / (g[i] * g[i]);
    return v;
}

} // namespace

TEST(Kernel, TwoRoutesAgree) {
    const auto& sol = ground_13_3();
    const auto z = kernel_from_steady(sol);
    const auto zo = kernel_by_ode(sol);
    EXPECT_EQ(z[0], 1.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        ASSERT_GT(z[i], 0.0);
        if (z.profile.r(i) <= 5e3) ASSERT_LT(std::abs(z[i] - zo[i]) / zo[i], 1e-3) << "r=" << z.profile.r(i);
    }
}

TEST(Kernel, SeriesNearOrigin) {
    // Z = 1 - p r^2/(2N) + p(2p-1) r^4/(8N(N+2)) + ...
    const auto z = kernel_from_steady(ground_13_3());
    const double r = 0.05, p = 3, n = 13;
    EXPECT_NEAR(z.profile.at(r), 1 - p * r * r / (2 * n) + p * (2 * p - 1) * std::pow(r, 4) / (8 * n * (n + 2)), 1e-9);
}

TEST(Kernel, IsScalingDerivative) {
    const auto& sol = ground_13_3();
    const auto z = kernel_from_steady(sol);
    const double h = 1e-4;
    const auto up = solve_ground_profile({13, 3.0}, sol.phi.grid_ptr(), 1 + h, {}, false);
    const auto dn = solve_ground_profile({13, 3.0}, sol.phi.grid_ptr(), 1 - h, {}, false);
    for (std::size_t i = 0; i < z.size(); ++i) ASSERT_NEAR((up.phi[i] - dn.phi[i]) / (2 * h), z[i], 1e-6);
}

TEST(Kernel, SolvesLinearizationWithFourthOrderStencil) {
    const auto& sol = ground_13_3();
    const auto z = kernel_from_steady(sol);
    std::vector<double> pot(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) pot[i] = 3 * sol.phi[i] * sol.phi[i];
    EXPECT_LT(linear_residual4(z.profile, pot, 13, 0.1, 20.0), 1e-4);
}

TEST(SingularKernel, IndicialExponentsSolveLinearization) {
    const GridPtr annulus = make_annulus_grid(0.5, 200.0, 4000);
    for (const ProblemParams pp : {ProblemParams{13, 3.0}, ProblemParams{20, 2.0}, ProblemParams{30, 5.0}}) {
        const auto sc = SpectralConstants::compute(pp);
        const auto pot = singular_potential(sc, *annulus);
        for (auto which : {SingularWhich::First, SingularWhich::Second}) {
            const auto w = singular_kernel(sc, annulus, which);
            EXPECT_LT(linear_residual4(w.profile, pot, pp.dim, 1.0, 100.0), 1e-4) << pp.dim << "," << pp.exponent;
        }
    }
}

TEST(SingularKernel, LogPartnerAtCriticalExponent) {
    const auto sc = SpectralConstants::compute({11, critical_exponents(11).joseph_lundgren.value()});
    const GridPtr annulus = make_annulus_grid(0.5, 200.0, 4000);
    const auto second = singular_kernel(sc, annulus, SingularWhich::Second);
    EXPECT_EQ(second.profile.label(), "Z_inf_log");
    const auto pot = singular_potential(sc, *annulus);
    // ln r vanishes at r = 1, so measure on [2, 100]
    EXPECT_LT(linear_residual4(second.profile, pot, 11, 2.0, 100.0), 1e-4);
    EXPECT_LT(linear_residual4(singular_kernel(sc, annulus, SingularWhich::First).profile, pot, 11, 1.0, 100.0), 1e-4);
}

TEST(SingularKernel, WrongExponentHasLargeResidual) {
    const auto sc = SpectralConstants::compute({13, 3.0});
    const GridPtr annulus = make_annulus_grid(0.5, 200.0, 4000);
    std::vector<double> w(annulus->size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = i == 0 ? 1.0 : std::pow((*annulus)[i], -sc.kernel_decay() * 1.01);
    const RadialProfile off(annulus, w, "off");
    EXPECT_GT(linear_residual4(off, singular_potential(sc, *annulus), 13, 1.0, 100.0), 1e-3);
}

TEST(Supersolution, NonnegativeBelowBoundAndRejectsViolation) {
    const auto& sol = ground_13_3();
    const auto z = kernel_from_steady(sol);
    const auto upper = scale_family(sol, 2.0);
    const auto lower = scale_family(sol, 1.0);
    const auto res = supersolution_residual(z, lower, upper, 3.0);
    for (std::size_t i = 0; i < res.size(); ++i) ASSERT_GE(res[i], 0.0);
    EXPECT_EQ(supersolution_residual(z, upper, upper, 3.0)[5], 0.0);
    try {
        supersolution_residual(z, upper, lower, 3.0);
        FAIL() << "expected BoundViolated";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::BoundViolated);
    }
}

TEST(Supersolution, SingularBoundIsInfiniteAtOrigin) {
    const auto& sol = ground_13_3();
    const auto sing = singular_profile(sol.constants, sol.phi.grid_ptr());
    const auto zinf = singular_kernel(sol.constants, sol.phi.grid_ptr(), SingularWhich::First);
    const auto res = supersolution_residual(zinf, sol.phi, sing, 3.0);
    EXPECT_TRUE(std::isinf(res[0]));
    for (std::size_t i = 1; i < res.size(); ++i) ASSERT_GE(res[i], 0.0);
}
