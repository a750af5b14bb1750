#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "supercrit/constants.hpp"

using namespace supercrit;

namespace {

// Oracle: Joseph-Lundgren exponent from the zero of the indicial
// discriminant (N-2-2m)^2 - 8(N-2-m) in m, found by bisection on the
// branch m < (N-4)/2. Independent of both closed forms.
double pc_by_bisection(int n) {
    auto disc = [n](double m) { return (n - 2 - 2 * m) * (n - 2 - 2 * m) - 8 * (n - 2 - m); };
    double lo = 1e-12, hi = (n - 4) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (disc(mid) > 0 ? lo : hi) = mid;
    }
    return 1 + 2 / (0.5 * (lo + hi));
}

} // namespace

TEST(CriticalExponents, LowDimensionsAreUnbounded) {
    const auto n1 = critical_exponents(1);
    EXPECT_DOUBLE_EQ(n1.fujita.value(), 3.0);
    EXPECT_FALSE(n1.sobolev.is_finite());
    EXPECT_FALSE(n1.joseph_lundgren.is_finite());
    EXPECT_FALSE(critical_exponents(10).joseph_lundgren.is_finite());
    EXPECT_DOUBLE_EQ(critical_exponents(3).sobolev.value(), 5.0);
}

TEST(CriticalExponents, EleventhDimensionClosedFormsAgree) {
    const auto ce = critical_exponents(11);
    ASSERT_TRUE(ce.joseph_lundgren.is_finite());
    EXPECT_NEAR(ce.joseph_lundgren.value(), 6.92202458681634, 1e-12);
    EXPECT_LT(ce.jl_form_gap, 1e-10);
    EXPECT_NEAR(ce.joseph_lundgren.value(), pc_by_bisection(11), 1e-10);
}

TEST(CriticalExponents, DecreasingTowardOne) {
    double prev = std::numeric_limits<double>::infinity();
    for (int n = 11; n <= 200; ++n) {
        const auto ce = critical_exponents(n);
        const double pc = ce.joseph_lundgren.value();
        EXPECT_LT(pc, prev) << "N=" << n;
        EXPECT_GT(pc, 1.0);
        EXPECT_LT(ce.jl_form_gap, 1e-10) << "N=" << n;
        EXPECT_NEAR(pc, pc_by_bisection(n), 1e-9 * pc);
        prev = pc;
    }
    EXPECT_LT(critical_exponents(200).joseph_lundgren.value() - 1.0, 0.03);
}

TEST(Exponent, UnboundedOrdersAboveEverything) {
    EXPECT_TRUE(Exponent::unbounded() > 1e300);
    EXPECT_TRUE(Exponent::finite(2.0) < Exponent::unbounded());
    EXPECT_TRUE(Exponent::unbounded() == Exponent::unbounded());
    EXPECT_THROW(Exponent::unbounded().value(), Error);
}

TEST(DecayRate, Values) {
    EXPECT_DOUBLE_EQ(decay_rate(3.0), 1.0);
    EXPECT_DOUBLE_EQ(decay_rate(2.0), 2.0);
    const double ps = critical_exponents(11).sobolev.value();
    EXPECT_NEAR(decay_rate(ps), 4.5, 1e-14);
    EXPECT_THROW(decay_rate(1.0), Error);
    EXPECT_THROW(decay_rate(0.5), Error);
}

TEST(SingularAmplitude, Values) {
    EXPECT_NEAR(singular_amplitude({13, 3.0}), std::sqrt(10.0), 1e-14);
    const double ps = 13.0 / 9.0;
    EXPECT_NEAR(singular_amplitude({11, ps}), std::pow(4.5 * 4.5, 1 / (ps - 1)), 1e-9);
    // N - 2 - m <= 0: p close to 1 in N = 3
    try {
        singular_amplitude({3, 2.0});
        FAIL() << "expected InvalidArgument";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
}

TEST(LambdaRoots, ThirteenDimensionsCubic) {
    const auto roots = lambda_roots({13, 3.0});
    EXPECT_NEAR(roots.lambda1, 4.0, 1e-14);
    EXPECT_NEAR(roots.lambda2, 5.0, 1e-14);
    EXPECT_FALSE(roots.repeated);
    const auto sc = SpectralConstants::compute({13, 3.0});
    EXPECT_NEAR(indicial_residual(sc, sc.m + roots.lambda1), 0.0, 1e-12);
    // gamma = 5: 5 * (5 - 11) + 3 * 10 = 0
    EXPECT_DOUBLE_EQ(5.0 * (5.0 - 11.0) + 3.0 * 10.0, 0.0);
}

TEST(LambdaRoots, RepeatedAtCriticalExponent) {
    for (int n : {11, 14, 30}) {
        const double pc = critical_exponents(n).joseph_lundgren.value();
        const auto roots = lambda_roots({n, pc});
        EXPECT_TRUE(roots.repeated);
        const double m = decay_rate(pc);
        EXPECT_DOUBLE_EQ(roots.lambda1, (n - 2 - 2 * m) / 2);
        EXPECT_EQ(roots.lambda1, roots.lambda2);
        EXPECT_GT(roots.lambda1, 2.0);
    }
}

TEST(LambdaRoots, DiscriminantNegativeExactlyBelowCritical) {
    for (int n : {11, 12, 13, 25, 60}) {
        const double pc = critical_exponents(n).joseph_lundgren.value();
        try {
            lambda_roots({n, pc * (1 - 1e-8)});
            FAIL() << "expected DiscriminantNegative at N=" << n;
        } catch (const Error& e) {
            EXPECT_EQ(e.kind(), ErrorKind::DiscriminantNegative);
        }
        EXPECT_NO_THROW(lambda_roots({n, pc * (1 - 5e-10)}));  // inside the band
        EXPECT_NO_THROW(lambda_roots({n, pc * (1 + 1e-8)}));
    }
    EXPECT_THROW(lambda_roots({10, 50.0}), Error);
    EXPECT_THROW(lambda_roots({13, 1.1}), Error);  // real roots exist there, but p < p_c
}

// Sweep: N = 11..100, p in [pc, pc + 10]
TEST(SpectralConstants, IdentitiesHoldAcrossSupercriticalRange) {
    for (int n = 11; n <= 100; ++n) {
        const double pc = critical_exponents(n).joseph_lundgren.value();
        for (int k = 0; k <= 10; ++k) {
            const double p = pc + k;
            const auto sc = SpectralConstants::compute({n, p});
            ASSERT_TRUE(sc.supercritical());
            const double m = sc.m, l1 = sc.lambda1(), l2 = sc.lambda2();
            EXPECT_NEAR(std::pow(sc.amplitude(), p - 1), m * (n - 2 - m), 1e-12 * m * (n - 2 - m));
            EXPECT_NEAR(l1 + l2, n - 2 - 2 * m, 1e-10);
            EXPECT_NEAR(l1 * l2, 2 * (n - 2 - m), 1e-10 * (n - 2 - m));
            EXPECT_LE(l1, l2);
            EXPECT_GT(l1, 2.0);
            EXPECT_LT(std::abs(indicial_residual(sc, m + l1)), 1e-9);
            EXPECT_LT(std::abs(indicial_residual(sc, m + l2)), 1e-9);
        }
    }
}

TEST(SpectralConstants, SubcriticalHasNoRoots) {
    const auto sc = SpectralConstants::compute({13, 2.0});
    EXPECT_FALSE(sc.supercritical());
    EXPECT_THROW(sc.lambda1(), Error);
    EXPECT_NEAR(sc.amplitude(), std::pow(2.0 * 9.0, 1.0), 1e-12);
}

TEST(ProblemParams, Validation) {
    EXPECT_THROW((ProblemParams{2, 3.0}.validate()), Error);
    EXPECT_THROW((ProblemParams{13, 1.0}.validate()), Error);
    EXPECT_NO_THROW((ProblemParams{3, 1.5}.validate()));
}
