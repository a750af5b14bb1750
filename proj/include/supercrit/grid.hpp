#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "supercrit/error.hpp"

namespace supercrit {

/// Uniform spacing on [0, core_radius], then geometric stretching out to r_max.
/// The stretch factor continues the core spacing smoothly: q ~ 1 + h / core_radius.
struct GridSpec {
    double core_radius = 1.0;
    int core_cells = 200;
    double r_max = 1e4;
};

class RadialGrid {
public:
    RadialGrid() = default;

    explicit RadialGrid(std::vector<double> nodes, GridSpec layout = {})
        : nodes_(std::move(nodes)), layout_(layout) {
        require(nodes_.size() >= 2, ErrorKind::InvalidArgument, "grid needs at least two nodes");
        require(nodes_.front() == 0.0, ErrorKind::InvalidArgument, "first grid node must be exactly 0");
        for (std::size_t i = 1; i < nodes_.size(); ++i)
            require(nodes_[i] > nodes_[i - 1], ErrorKind::InvalidArgument, "grid nodes must be strictly increasing");
        layout_.r_max = nodes_.back();
    }

    std::size_t size() const noexcept { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    std::span<const double> nodes() const noexcept { return nodes_; }
    double r_max() const noexcept { return nodes_.back(); }
    const GridSpec& layout() const noexcept { return layout_; }

    /// Index of the first node >= r.
    std::size_t lower_index(double r) const {
        std::size_t lo = 0, hi = nodes_.size();
        while (lo < hi) {
            const std::size_t mid = (lo + hi) / 2;
            if (nodes_[mid] < r) lo = mid + 1;
            else hi = mid;
        }
        return lo;
    }

    /// Largest index i with nodes[i] <= r (clamped to the last interval start).
    std::size_t interval(double r) const {
        std::size_t i = lower_index(r);
        if (i < nodes_.size() && nodes_[i] == r) return std::min(i, nodes_.size() - 2);
        return i == 0 ? 0 : std::min(i - 1, nodes_.size() - 2);
    }

    friend bool operator==(const RadialGrid& a, const RadialGrid& b) { return a.nodes_ == b.nodes_; }

private:
    std::vector<double> nodes_;
    GridSpec layout_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(const GridSpec& spec) {
    require(spec.r_max > 0.0 && std::isfinite(spec.r_max), ErrorKind::InvalidArgument, "r_max must be positive");
    require(spec.core_radius > 0.0, ErrorKind::InvalidArgument, "core radius must be positive");
    require(spec.core_cells >= 4, ErrorKind::InvalidArgument, "need at least 4 core cells");
    const double core = std::min(spec.core_radius, spec.r_max);
    const double h = spec.core_radius / spec.core_cells;
    std::vector<double> nodes;
    const int uniform_cells = static_cast<int>(std::ceil(core / h - 1e-9));
    for (int i = 0; i <= uniform_cells; ++i) nodes.push_back(std::min(i * h, core));
    nodes.back() = core;
    if (spec.r_max > core) {
        const double span = std::log(spec.r_max / core);
        const int cells = std::max(1, static_cast<int>(std::ceil(span / std::log1p(h / core))));
        const double q = std::exp(span / cells);
        double r = core;
        for (int k = 1; k < cells; ++k) {
            r *= q;
            nodes.push_back(r);
        }
        nodes.push_back(spec.r_max);
    }
    GridSpec layout = spec;
    return std::make_shared<const RadialGrid>(std::move(nodes), layout);
}

/// Geometric grid on [r_lo, r_hi] prefixed with the origin; used for annuli and blow-down targets.
inline GridPtr make_annulus_grid(double r_lo, double r_hi, int cells) {
    require(r_lo > 0.0 && r_hi > r_lo && cells >= 2, ErrorKind::InvalidArgument, "invalid annulus");
    std::vector<double> nodes{0.0};
    const double q = std::pow(r_hi / r_lo, 1.0 / cells);
    double r = r_lo;
    for (int k = 0; k < cells; ++k, r *= q) nodes.push_back(r);
    nodes.push_back(r_hi);
    GridSpec layout{r_lo, cells, r_hi};
    return std::make_shared<const RadialGrid>(std::move(nodes), layout);
}

} // namespace supercrit
