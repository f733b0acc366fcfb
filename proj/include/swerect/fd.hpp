#pragma once

#include <span>
#include <vector>

#include "swerect/errors.hpp"
#include "swerect/grid.hpp"

namespace swerect {

// Fornberg weights for the m-th derivative at x0 on the given nodes.
inline std::vector<double> fd_weights(double x0, std::span<const double> xs, int m) {
    const int n = static_cast<int>(xs.size());
    if (n < m + 1) {
        throw GridTooCoarse("fd_weights: need at least m+1 nodes");
    }
    std::vector<double> c(static_cast<std::size_t>(n) * static_cast<std::size_t>(m + 1), 0.0);
    auto at = [&](int i, int j) -> double& {
        return c[static_cast<std::size_t>(i) * static_cast<std::size_t>(m + 1) +
                 static_cast<std::size_t>(j)];
    };
    double c1 = 1.0;
    double c4 = xs[0] - x0;
    at(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = i < m ? i : m;
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    at(i, k) = c1 * (k * at(i - 1, k - 1) - c5 * at(i - 1, k)) / c2;
                }
                at(i, 0) = -c1 * c5 * at(i - 1, 0) / c2;
            }
            for (int k = mn; k >= 1; --k) {
                at(j, k) = (c4 * at(j, k) - k * at(j, k - 1)) / c3;
            }
            at(j, 0) = c4 * at(j, 0) / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = at(i, m);
    return w;
}

namespace detail {

// Per-node stencils for the j-th derivative on n uniformly spaced nodes:
// centered of the minimal width reaching the accuracy in the interior,
// edge-anchored one-sided stencils of the same accuracy near the ends.
struct DerivPlan {
    int width_center = 0;   // odd
    int width_edge = 0;     // j + acc
    std::vector<double> center;             // weights at offset -r..r, scaled by h^-j
    std::vector<std::vector<double>> left;  // per node i < r, on nodes 0..width_edge-1
    std::vector<std::vector<double>> right; // per node n-1-i' < r, mirrored window
};

inline DerivPlan make_deriv_plan(int n, int j, int acc, double h) {
    DerivPlan plan;
    int wc = j + acc - 1;
    if (wc % 2 == 0) ++wc;
    const int we = j + acc;
    if (n < we || n < wc) {
        throw GridTooCoarse("derivative: stencil wider than the grid");
    }
    plan.width_center = wc;
    plan.width_edge = we;
    const int r = (wc - 1) / 2;

    std::vector<double> offs(static_cast<std::size_t>(wc));
    for (int k = 0; k < wc; ++k) offs[static_cast<std::size_t>(k)] = (k - r) * h;
    plan.center = fd_weights(0.0, offs, j);

    std::vector<double> edge(static_cast<std::size_t>(we));
    for (int k = 0; k < we; ++k) edge[static_cast<std::size_t>(k)] = k * h;
    for (int i = 0; i < r; ++i) {
        plan.left.push_back(fd_weights(i * h, edge, j));
    }
    for (int i = 0; i < r; ++i) {
        // node n-1-i evaluated on the last we nodes
        std::vector<double> w = fd_weights((we - 1 - i) * h, edge, j);
        plan.right.push_back(std::move(w));
    }
    return plan;
}

}  // namespace detail

// j-th partial derivative along x, accuracy acc (2 for the module standard,
// 4 for refinement-study measurements).
inline Field deriv_x(const Field& f, int j, int acc = 2) {
    if (j == 0) return f;
    const Grid& g = f.grid;
    const auto plan = detail::make_deriv_plan(g.nx, j, acc, g.dx);
    const int r = (plan.width_center - 1) / 2;
    Field out(g);
    for (int i = 0; i < g.nx; ++i) {
        const double* w = nullptr;
        int base = 0;
        int width = 0;
        if (i < r) {
            w = plan.left[static_cast<std::size_t>(i)].data();
            base = 0;
            width = plan.width_edge;
        } else if (i > g.nx - 1 - r) {
            w = plan.right[static_cast<std::size_t>(g.nx - 1 - i)].data();
            base = g.nx - plan.width_edge;
            width = plan.width_edge;
        } else {
            w = plan.center.data();
            base = i - r;
            width = plan.width_center;
        }
        for (int jj = 0; jj < g.ny; ++jj) {
            double acc_v = 0.0;
            for (int k = 0; k < width; ++k) {
                acc_v += w[k] * f(base + k, jj);
            }
            out(i, jj) = acc_v;
        }
    }
    return out;
}

inline Field deriv_y(const Field& f, int j, int acc = 2) {
    if (j == 0) return f;
    const Grid& g = f.grid;
    const auto plan = detail::make_deriv_plan(g.ny, j, acc, g.dy);
    const int r = (plan.width_center - 1) / 2;
    Field out(g);
    for (int jj = 0; jj < g.ny; ++jj) {
        const double* w = nullptr;
        int base = 0;
        int width = 0;
        if (jj < r) {
            w = plan.left[static_cast<std::size_t>(jj)].data();
            base = 0;
            width = plan.width_edge;
        } else if (jj > g.ny - 1 - r) {
            w = plan.right[static_cast<std::size_t>(g.ny - 1 - jj)].data();
            base = g.ny - plan.width_edge;
            width = plan.width_edge;
        } else {
            w = plan.center.data();
            base = jj - r;
            width = plan.width_center;
        }
        for (int i = 0; i < g.nx; ++i) {
            double acc_v = 0.0;
            for (int k = 0; k < width; ++k) {
                acc_v += w[k] * f(i, base + k);
            }
            out(i, jj) = acc_v;
        }
    }
    return out;
}

}  // namespace swerect
