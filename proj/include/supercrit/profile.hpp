#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "supercrit/grid.hpp"

namespace supercrit {

/// A function sampled on a radial grid. Copies share the (immutable) grid.
/// `slopes`, when present, holds exact derivatives used by the interpolant.
class RadialProfile {
public:
    RadialProfile() = default;

    RadialProfile(GridPtr grid, std::vector<double> values, std::string label = {},
                  std::optional<std::vector<double>> slopes = std::nullopt, bool singular_origin = false)
        : grid_(std::move(grid)), values_(std::move(values)), slopes_(std::move(slopes)), label_(std::move(label)),
          singular_origin_(singular_origin) {
        require(grid_ != nullptr, ErrorKind::InvalidArgument, "profile without grid");
        require(values_.size() == grid_->size(), ErrorKind::InvalidArgument, "profile/grid size mismatch");
        if (slopes_) require(slopes_->size() == grid_->size(), ErrorKind::InvalidArgument, "slope/grid size mismatch");
        for (std::size_t i = singular_origin_ ? 1 : 0; i < values_.size(); ++i)
            require(std::isfinite(values_[i]), ErrorKind::InvalidArgument,
                    "non-finite value in profile '" + label_ + "' at r=" + std::to_string((*grid_)[i]));
        build_slopes();
    }

    static RadialProfile from_function(GridPtr grid, const std::function<double(double)>& f, std::string label = {}) {
        std::vector<double> v(grid->size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*grid)[i]);
        return RadialProfile(std::move(grid), std::move(v), std::move(label));
    }

    const RadialGrid& grid() const noexcept { return *grid_; }
    const GridPtr& grid_ptr() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }
    double r(std::size_t i) const { return (*grid_)[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }
    const std::optional<std::vector<double>>& slopes() const noexcept { return slopes_; }
    const std::string& label() const noexcept { return label_; }
    void set_label(std::string label) { label_ = std::move(label); }
    bool singular_origin() const noexcept { return singular_origin_; }

    /// Monotone cubic Hermite evaluation; r must lie inside the grid.
    double at(double r) const;

private:
    GridPtr grid_;
    std::vector<double> values_;
    std::optional<std::vector<double>> slopes_;
    std::string label_;
    bool singular_origin_ = false;
    std::vector<double> limited_slopes_;

    void build_slopes();
};

namespace detail {

/// Fritsch-Carlson limiting: keeps the Hermite cubic monotone on every
/// interval where the data is monotone. With exact derivatives on a fine
/// grid the limiter is almost never active.
inline std::vector<double> monotone_slopes(std::span<const double> x, std::span<const double> y,
                                           const std::optional<std::vector<double>>& exact) {
    const std::size_t n = x.size();
    std::vector<double> secant(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    std::vector<double> d(n);
    if (exact) {
        d = *exact;
    } else {
        d[0] = secant[0];
        d[n - 1] = secant[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            // weighted harmonic mean (PCHIP)
            if (secant[i - 1] * secant[i] <= 0.0) {
                d[i] = 0.0;
            } else {
                const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
                const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
                d[i] = (w1 + w2) / (w1 / secant[i - 1] + w2 / secant[i]);
            }
        }
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (secant[i] == 0.0) {
            d[i] = d[i + 1] = 0.0;
            continue;
        }
        if (d[i] * secant[i] < 0.0) d[i] = 0.0;
        if (d[i + 1] * secant[i] < 0.0) d[i + 1] = 0.0;
        const double a = d[i] / secant[i], b = d[i + 1] / secant[i];
        const double s = a * a + b * b;
        if (s > 9.0) {
            const double tau = 3.0 / std::sqrt(s);
            d[i] = tau * a * secant[i];
            d[i + 1] = tau * b * secant[i];
        }
    }
    return d;
}

inline double hermite(double x0, double x1, double y0, double y1, double d0, double d1, double x) {
    const double h = x1 - x0;
    const double t = (x - x0) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 + (t3 - t2) * h * d1;
}

} // namespace detail

inline void RadialProfile::build_slopes() {
    const RadialGrid& g = *grid_;
    if (singular_origin_) {
        // the origin value is infinite; interpolate only on r > 0
        std::vector<double> x(g.nodes().begin() + 1, g.nodes().end());
        std::vector<double> y(values_.begin() + 1, values_.end());
        std::optional<std::vector<double>> s;
        if (slopes_) s = std::vector<double>(slopes_->begin() + 1, slopes_->end());
        limited_slopes_ = x.size() >= 2 ? detail::monotone_slopes(x, y, s) : std::vector<double>(x.size(), 0.0);
        limited_slopes_.insert(limited_slopes_.begin(), 0.0);
    } else {
        limited_slopes_ = detail::monotone_slopes(g.nodes(), values_, slopes_);
    }
}

inline double RadialProfile::at(double r) const {
    const RadialGrid& g = *grid_;
    require(r >= 0.0 && r <= g.r_max() * (1 + 1e-14), ErrorKind::DomainExceeded,
            "r=" + std::to_string(r) + " outside profile '" + label_ + "'");
    std::size_t i = g.interval(std::min(r, g.r_max()));
    if (singular_origin_) {
        require(r > 0.0, ErrorKind::DomainExceeded, "singular profile is unbounded at r = 0");
        if (i == 0) return values_[1] * std::pow(r / g[1], std::log(values_[2] / values_[1]) / std::log(g[2] / g[1]));
    }
    if (r == g[i]) return values_[i];
    if (r == g[i + 1]) return values_[i + 1];
    return detail::hermite(g[i], g[i + 1], values_[i], values_[i + 1], limited_slopes_[i], limited_slopes_[i + 1],
                           r);
}

/// Resample onto another grid by monotone cubic interpolation.
inline RadialProfile resample(const RadialProfile& src, GridPtr target, std::string label = {}) {
    std::vector<double> v(target->size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = src.at((*target)[i]);
    return RadialProfile(std::move(target), std::move(v), label.empty() ? src.label() : std::move(label));
}

inline double sup_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s = std::max(s, std::abs(x));
    return s;
}

/// max_i |a_i - b_i| over nodes with r in [r_lo, r_hi].
inline double sup_difference(const RadialProfile& a, const RadialProfile& b, double r_lo = 0.0,
                             double r_hi = std::numeric_limits<double>::infinity()) {
    require(a.size() == b.size(), ErrorKind::InvalidArgument, "profiles on different grids");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.r(i) < r_lo || a.r(i) > r_hi) continue;
        s = std::max(s, std::abs(a[i] - b[i]));
    }
    return s;
}

} // namespace supercrit
