#pragma once

// Finite-difference weights on arbitrary nodes and the fourth-order radial
// Laplacian used by every residual check.

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "supercrit/grid.hpp"

namespace supercrit {

/// Fornberg's recursion: weights[k][j] approximate the k-th derivative at z
/// from values at x[j], for k = 0..max_order.
template <std::size_t M>
std::array<std::array<double, M>, 3> fd_weights(double z, const std::array<double, M>& x) {
    constexpr int max_order = 2;
    std::array<std::array<double, M>, 3> c{};
    double c1 = 1.0;
    double c4 = x[0] - z;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < M; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), max_order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - z;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

/// Fourth-order (on smooth grids) radial Laplacian u'' + (N-1)/r u'.
/// Near the origin the stencil uses even reflection u(-r) = u(r); at the
/// origin the operator is N u''(0). The last two nodes use shifted stencils.
class RadialLaplacian4 {
public:
    RadialLaplacian4(const RadialGrid& grid, int dim) : dim_(dim) {
        const std::size_t n = grid.size();
        require(n >= 5, ErrorKind::InvalidArgument, "fourth-order stencil needs at least 5 nodes");
        rows_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            Row row;
            std::array<double, 5> x{};
            // choose 5 consecutive logical nodes; negative indices reflect
            long start = static_cast<long>(i) - 2;
            if (start + 4 > static_cast<long>(n) - 1) start = static_cast<long>(n) - 5;
            for (int k = 0; k < 5; ++k) {
                const long j = start + k;
                row.idx[k] = static_cast<std::size_t>(j < 0 ? -j : j);
                x[k] = j < 0 ? -grid[static_cast<std::size_t>(-j)] : grid[static_cast<std::size_t>(j)];
            }
            const double r = grid[i];
            const auto w = fd_weights(r, x);
            for (int k = 0; k < 5; ++k) {
                row.w[k] = (i == 0) ? dim * w[2][k] : w[2][k] + (dim - 1) / r * w[1][k];
            }
            rows_[i] = row;
        }
    }

    double apply_at(std::span<const double> u, std::size_t i) const {
        const Row& row = rows_[i];
        double s = 0.0;
        for (int k = 0; k < 5; ++k) s += row.w[k] * u[row.idx[k]];
        return s;
    }

    std::vector<double> apply(std::span<const double> u) const {
        std::vector<double> out(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) out[i] = apply_at(u, i);
        return out;
    }

    int dim() const noexcept { return dim_; }

private:
    struct Row {
        std::array<std::size_t, 5> idx{};
        std::array<double, 5> w{};
    };
    int dim_;
    std::vector<Row> rows_;
};

} // namespace supercrit
