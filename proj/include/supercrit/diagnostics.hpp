#pragma once

// Measurable consequences of the Liouville argument: weighted decay of u_t,
// the sweeping ratios against a positive kernel, and an empirical check of
// the parabolic gradient interpolation inequality.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "supercrit/linearize.hpp"
#include "supercrit/state.hpp"

namespace supercrit {

struct DecayWindow {
    double r_lo = 20.0;
    double r_hi = 200.0;
};

struct DecayRecord {
    double t = 0.0;
    double weighted_sup = 0.0;
    DecayWindow window;
};

struct SweepRecord {
    double t = 0.0;
    double lambda_plus = 0.0;
    double lambda_minus = 0.0;
};

/// sup over the window of r^{m+lambda1} |u_t|, divided by ln r when p = p_c.
inline DecayRecord weighted_decay(const EvolutionState& state, const SpectralConstants& sc, DecayWindow window) {
    require(window.r_lo >= 10.0 && window.r_hi > window.r_lo, ErrorKind::InvalidArgument,
            "decay window must sit in the far field (r_lo >= 10)");
    const double gamma = sc.kernel_decay();
    const bool log_branch = sc.lambdas().repeated;
    DecayRecord rec{state.t, 0.0, window};
    const RadialProfile& v = state.u_t;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double r = v.r(i);
        if (r < window.r_lo || r > window.r_hi) continue;
        double w = std::pow(r, gamma) * std::abs(v[i]);
        if (log_branch) w /= std::log(r);
        rec.weighted_sup = std::max(rec.weighted_sup, w);
    }
    return rec;
}

/// lambda_plus = max(0, max u_t/Z), lambda_minus = max(0, max -u_t/Z), over nodes with finite Z > 0.
inline SweepRecord sweeping_ratio(const EvolutionState& state, const KernelElement& z) {
    require(z.size() == state.u_t.size(), ErrorKind::InvalidArgument, "kernel and state on different grids");
    SweepRecord rec{state.t, 0.0, 0.0};
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double zi = z[i];
        if (!std::isfinite(zi)) continue;
        require(zi > 0.0, ErrorKind::NonPositiveKernel, "sweeping needs Z > 0 at r=" + std::to_string(z.profile.r(i)));
        const double ratio = state.u_t[i] / zi;
        rec.lambda_plus = std::max(rec.lambda_plus, ratio);
        rec.lambda_minus = std::max(rec.lambda_minus, -ratio);
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Gradient interpolation inequality
//   |grad psi(0,0)|^2 <= C ||f|| ||psi|| + C/R^2 ||psi||^2  on  |x| < R, |t| < R^2,
// with f = psi_t - Delta psi, checked on manufactured pairs.

/// Polynomial in (x1, x2, t) with exact differentiation.
class SpaceTimePoly {
public:
    using Key = std::array<int, 3>;

    void add(int i, int j, int k, double c) { terms_[{i, j, k}] += c; }

    double operator()(double x1, double x2, double t) const {
        double s = 0.0;
        for (const auto& [key, c] : terms_) s += c * std::pow(x1, key[0]) * std::pow(x2, key[1]) * std::pow(t, key[2]);
        return s;
    }

    SpaceTimePoly derivative(int var) const {
        SpaceTimePoly d;
        for (const auto& [key, c] : terms_) {
            if (key[var] == 0) continue;
            Key k = key;
            k[var] -= 1;
            d.terms_[k] += c * key[var];
        }
        return d;
    }

    SpaceTimePoly operator-(const SpaceTimePoly& o) const {
        SpaceTimePoly d = *this;
        for (const auto& [key, c] : o.terms_) d.terms_[key] -= c;
        return d;
    }
    SpaceTimePoly operator+(const SpaceTimePoly& o) const {
        SpaceTimePoly d = *this;
        for (const auto& [key, c] : o.terms_) d.terms_[key] += c;
        return d;
    }

private:
    std::map<Key, double> terms_;
};

struct ManufacturedCase {
    std::string name;
    std::function<double(double, double, double)> psi;
    std::function<double(double, double, double)> f;
    std::array<double, 2> grad_at_origin{};
};

struct InterpResult {
    std::string name;
    double radius = 0.0;
    double lhs = 0.0;
    double f_sup = 0.0;
    double psi_sup = 0.0;
    double rhs_f = 0.0;    // ||f|| ||psi||
    double rhs_psi = 0.0;  // ||psi||^2 / R^2
    double fitted_C = 0.0;
};

struct InterpLattice {
    int space = 41;
    int time = 21;
};

/// Dense sup-norm sampling over the closed cylinder. Functions depend on
/// (x1, x2) only, so the ball is sampled in that plane.
inline InterpResult interp_check(const ManufacturedCase& c, double R, InterpLattice lattice = {}) {
    require(R > 0.0, ErrorKind::InvalidArgument, "cylinder radius must be positive");
    InterpResult out;
    out.name = c.name;
    out.radius = R;
    out.lhs = c.grad_at_origin[0] * c.grad_at_origin[0] + c.grad_at_origin[1] * c.grad_at_origin[1];
    for (int a = 0; a < lattice.space; ++a) {
        const double x1 = -R + 2 * R * a / (lattice.space - 1);
        for (int b = 0; b < lattice.space; ++b) {
            const double x2 = -R + 2 * R * b / (lattice.space - 1);
            if (x1 * x1 + x2 * x2 > R * R * (1 + 1e-12)) continue;
            for (int k = 0; k < lattice.time; ++k) {
                const double t = -R * R + 2 * R * R * k / (lattice.time - 1);
                out.psi_sup = std::max(out.psi_sup, std::abs(c.psi(x1, x2, t)));
                out.f_sup = std::max(out.f_sup, std::abs(c.f(x1, x2, t)));
            }
        }
    }
    out.rhs_f = out.f_sup * out.psi_sup;
    out.rhs_psi = out.psi_sup * out.psi_sup / (R * R);
    const double rhs = out.rhs_f + out.rhs_psi;
    out.fitted_C = out.lhs == 0.0 ? 0.0 : out.lhs / rhs;
    return out;
}

inline ManufacturedCase poly_case(std::string name, const SpaceTimePoly& psi) {
    const SpaceTimePoly lap = psi.derivative(0).derivative(0) + psi.derivative(1).derivative(1);
    const SpaceTimePoly f = psi.derivative(2) - lap;
    const double g1 = psi.derivative(0)(0, 0, 0), g2 = psi.derivative(1)(0, 0, 0);
    return {std::move(name), [psi](double a, double b, double t) { return psi(a, b, t); },
            [f](double a, double b, double t) { return f(a, b, t); }, {g1, g2}};
}

/// Fixed members plus `random_count` seeded random space-time polynomials
/// (degree <= 3 in x, <= 1 in t).
inline std::vector<ManufacturedCase> manufactured_family(int dim, double R, int random_count = 20,
                                                         std::uint64_t seed = 20240611) {
    std::vector<ManufacturedCase> cases;
    {
        SpaceTimePoly x1;
        x1.add(1, 0, 0, 1.0);
        cases.push_back(poly_case("linear_x1", x1));
    }
    {
        SpaceTimePoly one;
        one.add(0, 0, 0, 1.0);
        cases.push_back(poly_case("constant", one));
    }
    cases.push_back({"heat_sin_x1",
                     [](double a, double, double t) { return std::sin(a) * std::exp(-t); },
                     [](double, double, double) { return 0.0; },
                     {1.0, 0.0}});
    {
        const double k = 1.0 / R;  // mode adapted to the cylinder
        cases.push_back({"heat_mode_scaled",
                         [k](double a, double b, double t) { return std::sin(k * (a + b)) * std::exp(-2 * k * k * t); },
                         [](double, double, double) { return 0.0; },
                         {k, k}});
    }
    {
        // psi = t + |x|^2 / N  gives  f = 1 - 2 = -1; radial, so the plane sampling is exact
        const double n = dim;
        cases.push_back({"t_plus_radial_quadratic",
                         [n](double a, double b, double t) { return t + (a * a + b * b) / n; },
                         [](double, double, double) { return -1.0; },
                         {0.0, 0.0}});
    }
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(R * 1000));
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    for (int c = 0; c < random_count; ++c) {
        SpaceTimePoly poly;
        for (int i = 0; i <= 3; ++i)
            for (int j = 0; i + j <= 3; ++j)
                for (int k = 0; k <= 1; ++k) poly.add(i, j, k, coef(rng));
        cases.push_back(poly_case("random_poly_" + std::to_string(c), poly));
    }
    return cases;
}

struct InterpSummary {
    int dim = 0;
    std::vector<InterpResult> results;
    double constant = 0.0;  // smallest C valid for every case
};

inline InterpSummary interp_sweep(int dim, const std::vector<double>& radii, int random_count = 20) {
    InterpSummary s;
    s.dim = dim;
    for (double R : radii)
        for (const auto& c : manufactured_family(dim, R, random_count)) {
            s.results.push_back(interp_check(c, R));
            s.constant = std::max(s.constant, s.results.back().fitted_C);
        }
    return s;
}

} // namespace supercrit
