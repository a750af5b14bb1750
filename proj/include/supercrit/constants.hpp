#pragma once

// Critical exponents and the spectral constants of the singular steady state.

#include <cmath>
#include <compare>
#include <limits>
#include <optional>
#include <string>

#include "supercrit/error.hpp"

namespace supercrit {

/// An exponent that is either a finite real or unbounded. Unbounded compares
/// greater than every finite value, so orderings against it are total.
class Exponent {
public:
    static constexpr Exponent finite(double v) noexcept { return Exponent(v, true); }
    static constexpr Exponent unbounded() noexcept { return Exponent(0.0, false); }

    constexpr bool is_finite() const noexcept { return finite_; }

    double value() const {
        require(finite_, ErrorKind::InvalidArgument, "exponent is unbounded");
        return value_;
    }

    /// Finite value or +inf; only meant for output.
    constexpr double as_double() const noexcept {
        return finite_ ? value_ : std::numeric_limits<double>::infinity();
    }

    friend constexpr std::weak_ordering operator<=>(const Exponent& a, const Exponent& b) noexcept {
        if (a.finite_ != b.finite_) return a.finite_ ? std::weak_ordering::less : std::weak_ordering::greater;
        if (!a.finite_) return std::weak_ordering::equivalent;
        if (a.value_ < b.value_) return std::weak_ordering::less;
        if (a.value_ > b.value_) return std::weak_ordering::greater;
        return std::weak_ordering::equivalent;
    }
    friend constexpr bool operator==(const Exponent& a, const Exponent& b) noexcept {
        return (a <=> b) == std::weak_ordering::equivalent;
    }
    friend constexpr std::weak_ordering operator<=>(const Exponent& a, double b) noexcept {
        return a <=> Exponent::finite(b);
    }
    friend constexpr bool operator==(const Exponent& a, double b) noexcept { return a == Exponent::finite(b); }

    std::string to_string() const { return finite_ ? std::to_string(value_) : std::string("inf"); }

private:
    constexpr Exponent(double v, bool f) noexcept : value_(v), finite_(f) {}
    double value_;
    bool finite_;
};

/// Relative band around the Joseph-Lundgren exponent inside which p is
/// treated as equal to it (repeated indicial root, logarithmic kernel).
inline constexpr double kCriticalBand = 1e-9;

struct ProblemParams {
    int dim = 3;
    double exponent = 3.0;

    void validate() const {
        require(dim >= 3, ErrorKind::InvalidArgument, "dimension must be >= 3, got " + std::to_string(dim));
        require(std::isfinite(exponent) && exponent > 1.0, ErrorKind::InvalidArgument,
                "exponent must be > 1, got " + std::to_string(exponent));
    }
};

struct CriticalExponents {
    Exponent fujita;
    Exponent sobolev;
    Exponent joseph_lundgren;
    /// |rational form - reduced form| of the Joseph-Lundgren exponent; 0 when unbounded.
    double jl_form_gap = 0.0;
};

/// Joseph-Lundgren exponent in its rational form.
inline double joseph_lundgren_rational(int n) {
    const double N = n;
    return ((N - 2) * (N - 2) - 4 * N + 8 * std::sqrt(N - 1)) / ((N - 2) * (N - 10));
}

/// Joseph-Lundgren exponent in its reduced form 1 + 4/(N-4-2 sqrt(N-1)).
inline double joseph_lundgren_reduced(int n) {
    const double N = n;
    return 1.0 + 4.0 / (N - 4 - 2 * std::sqrt(N - 1));
}

inline CriticalExponents critical_exponents(int n) {
    require(n >= 1, ErrorKind::InvalidArgument, "dimension must be >= 1");
    CriticalExponents out{Exponent::finite(1.0 + 2.0 / n), Exponent::unbounded(), Exponent::unbounded(), 0.0};
    if (n >= 3) out.sobolev = Exponent::finite(static_cast<double>(n + 2) / (n - 2));
    if (n > 10) {
        const double rational = joseph_lundgren_rational(n);
        const double reduced = joseph_lundgren_reduced(n);
        out.joseph_lundgren = Exponent::finite(reduced);
        out.jl_form_gap = std::abs(rational - reduced);
    }
    return out;
}

inline double decay_rate(double p) {
    require(std::isfinite(p) && p > 1.0, ErrorKind::InvalidArgument, "decay rate needs p > 1");
    return 2.0 / (p - 1.0);
}

/// Amplitude L of the singular solution L r^{-m}; requires N - 2 - m > 0.
inline double singular_amplitude(const ProblemParams& params) {
    params.validate();
    const double m = decay_rate(params.exponent);
    const double base = m * (params.dim - 2 - m);
    require(base > 0.0, ErrorKind::InvalidArgument,
            "singular amplitude undefined: N - 2 - m <= 0 for N=" + std::to_string(params.dim) +
                ", p=" + std::to_string(params.exponent));
    return std::pow(base, 1.0 / (params.exponent - 1.0));
}

struct LambdaRoots {
    double lambda1;
    double lambda2;
    bool repeated;
};

/// True when p lies within the relative band around p_c.
inline bool is_critical(const ProblemParams& params) {
    const Exponent pc = critical_exponents(params.dim).joseph_lundgren;
    if (!pc.is_finite()) return false;
    return std::abs(params.exponent - pc.value()) <= kCriticalBand * pc.value();
}

/// Roots of l^2 - (N-2-2m) l + 2(N-2-m) = 0, ordered. Only defined for p >= p_c.
inline LambdaRoots lambda_roots(const ProblemParams& params) {
    params.validate();
    const Exponent pc = critical_exponents(params.dim).joseph_lundgren;
    const double p = params.exponent;
    const bool critical = is_critical(params);
    if (!critical && pc > p) {
        throw Error(ErrorKind::DiscriminantNegative,
                    "p=" + std::to_string(p) + " is below p_c=" + pc.to_string() +
                        "; indicial roots are not real");
    }
    const double m = decay_rate(p);
    const double sum = params.dim - 2 - 2 * m;
    const double product = 2 * (params.dim - 2 - m);
    if (critical) return {sum / 2, sum / 2, true};
    const double disc = sum * sum - 4 * product;
    require(disc >= 0.0, ErrorKind::DiscriminantNegative, "negative discriminant above p_c");
    const double root = std::sqrt(disc);
    const double lambda2 = (sum + root) / 2;
    return {product / lambda2, lambda2, false};
}

/// Every constant the other modules consume, computed once per (N, p).
struct SpectralConstants {
    ProblemParams params;
    Exponent fujita = Exponent::unbounded();
    Exponent sobolev = Exponent::unbounded();
    Exponent joseph_lundgren = Exponent::unbounded();
    double jl_form_gap = 0.0;
    double m = 0.0;
    std::optional<double> L;
    std::optional<LambdaRoots> roots;
    bool critical = false;

    static SpectralConstants compute(const ProblemParams& params) {
        params.validate();
        const CriticalExponents ce = critical_exponents(params.dim);
        SpectralConstants sc;
        sc.params = params;
        sc.fujita = ce.fujita;
        sc.sobolev = ce.sobolev;
        sc.joseph_lundgren = ce.joseph_lundgren;
        sc.jl_form_gap = ce.jl_form_gap;
        sc.m = decay_rate(params.exponent);
        if (params.dim - 2 - sc.m > 0.0) sc.L = singular_amplitude(params);
        sc.critical = is_critical(params);
        if (sc.critical || ce.joseph_lundgren <= params.exponent) sc.roots = lambda_roots(params);
        return sc;
    }

    bool supercritical() const noexcept { return roots.has_value(); }

    double amplitude() const {
        require(L.has_value(), ErrorKind::InvalidArgument, "singular amplitude undefined for these parameters");
        return *L;
    }
    const LambdaRoots& lambdas() const {
        if (!roots) throw Error(ErrorKind::DiscriminantNegative, "p below p_c: indicial roots are not real");
        return *roots;
    }
    double lambda1() const { return lambdas().lambda1; }
    double lambda2() const { return lambdas().lambda2; }

    /// Decay exponent m + lambda1 of the first singular kernel element.
    double kernel_decay() const { return m + lambda1(); }

    double p() const noexcept { return params.exponent; }
    int dim() const noexcept { return params.dim; }
};

/// gamma(gamma - N + 2) + p L^{p-1}; vanishes when r^{-gamma} solves the
/// radial linearization at the singular solution.
inline double indicial_residual(const SpectralConstants& sc, double gamma) {
    const double p = sc.p();
    return gamma * (gamma - sc.dim() + 2) + p * std::pow(sc.amplitude(), p - 1);
}

} // namespace supercrit
