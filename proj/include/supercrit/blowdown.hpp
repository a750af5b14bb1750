#pragma once

// Blow-down rescaling w_R(r) = R^m u(R r), classification of the far-field
// limit, and the sphere identity that forces the limit to be 0 or +-L.

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "supercrit/steady.hpp"

namespace supercrit {

/// w_R = R^m u(R r) on `target`. Needs R r_max(target) <= r_max(u).
inline RadialProfile rescale(const RadialProfile& u, double R, const SpectralConstants& sc, const GridPtr& target) {
    require(R > 0.0 && std::isfinite(R), ErrorKind::InvalidArgument, "blow-down scale must be positive");
    const double reach = R * target->r_max();
    if (reach > u.grid().r_max() * (1 + 1e-12))
        throw Error(ErrorKind::DomainExceeded, "R*r_max=" + std::to_string(reach) + " exceeds profile range " +
                                                   std::to_string(u.grid().r_max()));
    const double scale = std::pow(R, sc.m);
    std::vector<double> w(target->size());
    bool origin = false;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = (*target)[i];
        if (r == 0.0) {
            w[i] = scale * u[0];
            origin = u.singular_origin();
            continue;
        }
        w[i] = scale * u.at(std::min(R * r, u.grid().r_max()));
    }
    return RadialProfile(target, std::move(w), "w_" + std::to_string(R), std::nullopt, origin);
}

enum class LimitClass { MinusL, Zero, PlusL, Undetermined };

inline std::string to_string(LimitClass c) {
    switch (c) {
    case LimitClass::MinusL: return "minus_L";
    case LimitClass::Zero: return "zero";
    case LimitClass::PlusL: return "plus_L";
    case LimitClass::Undetermined: return "undetermined";
    }
    return "?";
}

inline constexpr double kLimitTolerance = 0.05;

/// Looks at r^m u(r) over the outer decade [r_max/10, r_max].
inline LimitClass classify_limit(const RadialProfile& u, const SpectralConstants& sc) {
    const double r_max = u.grid().r_max();
    require(r_max >= 100.0, ErrorKind::InvalidArgument, "classify_limit needs the profile out to r >= 100");
    const double L = sc.amplitude();
    bool plus = true, minus = true, zero = true;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double r = u.r(i);
        if (r < r_max / 10) continue;
        const double v = std::pow(r, sc.m) * u[i];
        plus = plus && std::abs(v - L) <= kLimitTolerance * L;
        minus = minus && std::abs(v + L) <= kLimitTolerance * L;
        zero = zero && std::abs(v) < kLimitTolerance * L;
    }
    if (plus) return LimitClass::PlusL;
    if (minus) return LimitClass::MinusL;
    if (zero) return LimitClass::Zero;
    return LimitClass::Undetermined;
}

/// sup over nodes in [r_lo, r_hi] of |w - L r^{-m}|.
inline double annulus_error(const RadialProfile& w, const SpectralConstants& sc, double r_lo = 0.5, double r_hi = 2.0) {
    const double L = sc.amplitude();
    double worst = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double r = w.r(i);
        if (r < r_lo || r > r_hi) continue;
        worst = std::max(worst, std::abs(w[i] - L * std::pow(r, -sc.m)));
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Sphere identity on axisymmetric profiles f(theta), theta in [0, pi].

struct SphereProfile {
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    ProblemParams params;
    std::string name;

    /// amplitude * L * cos(theta)
    static SphereProfile cosine(const SpectralConstants& sc, double amplitude) {
        const double a = amplitude * sc.amplitude();
        return {[a](double t) { return a * std::cos(t); }, [a](double t) { return -a * std::sin(t); }, sc.params,
                "cos"};
    }

    static SphereProfile constant(const SpectralConstants& sc, double value) {
        return {[value](double) { return value; }, [](double) { return 0.0; }, sc.params, "const"};
    }

    /// sum_k c_k cos(k theta), k <= degree, scaled so that max|f| = scale * L
    /// on a dense sample. Smooth on the sphere since f'(0) = f'(pi) = 0.
    static SphereProfile random_trig(const SpectralConstants& sc, std::mt19937_64& rng, int degree = 6) {
        std::uniform_real_distribution<double> coef(-1.0, 1.0), amp(0.1, 0.99);
        std::vector<double> c(degree + 1);
        for (auto& x : c) x = coef(rng);
        if (std::abs(c[1]) < 0.1) c[1] = 0.5;  // keep it nonconstant
        auto eval = [](const std::vector<double>& cs, double t) {
            double s = 0.0;
            for (std::size_t k = 0; k < cs.size(); ++k) s += cs[k] * std::cos(k * t);
            return s;
        };
        double peak = 0.0;
        constexpr int samples = 20000;
        for (int j = 0; j <= samples; ++j) peak = std::max(peak, std::abs(eval(c, M_PI * j / samples)));
        const double s = amp(rng) * sc.amplitude() / peak;
        for (auto& x : c) x *= s;
        auto value = [c, eval](double t) { return eval(c, t); };
        auto deriv = [c](double t) {
            double d = 0.0;
            for (std::size_t k = 1; k < c.size(); ++k) d -= c[k] * k * std::sin(k * t);
            return d;
        };
        return {value, deriv, sc.params, "random_trig"};
    }
};

inline constexpr int kSpherePanels = 256;

/// int_0^pi { f'^2 + f^2 (L^{p-1} - |f|^{p-1}) } sin^{N-2}(theta) dtheta
/// by composite 10-point Gauss-Legendre over kSpherePanels panels.
inline double sphere_identity(const SphereProfile& f, int panels = kSpherePanels) {
    require(panels >= 200, ErrorKind::InvalidArgument, "sphere quadrature needs >= 200 panels");
    const SpectralConstants sc = SpectralConstants::compute(f.params);
    const double L = sc.amplitude(), p = sc.p();
    const double Lp = std::pow(L, p - 1);
    const int n = sc.dim();
    auto check = [&](double t) {
        const double v = std::abs(f.value(t));
        if (v > L * (1 + 1e-12))
            throw Error(ErrorKind::BoundViolated,
                        "|f|=" + std::to_string(v) + " > L=" + std::to_string(L) + " at theta=" + std::to_string(t));
        return v;
    };
    auto integrand = [&](double t) {
        const double v = check(t);
        const double d = f.derivative(t);
        const double fv = f.value(t);
        return (d * d + fv * fv * (Lp - std::pow(v, p - 1))) * std::pow(std::sin(t), n - 2);
    };
    using Rule = boost::math::quadrature::gauss<double, 10>;
    double total = 0.0;
    const double h = M_PI / panels;
    for (int k = 0; k < panels; ++k) {
        check(k * h);
        total += Rule::integrate(integrand, k * h, (k + 1) * h);
    }
    check(M_PI);
    return total;
}

} // namespace supercrit
