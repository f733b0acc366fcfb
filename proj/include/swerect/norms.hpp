#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "swerect/errors.hpp"
#include "swerect/fd.hpp"
#include "swerect/grid.hpp"
#include "swerect/state.hpp"

namespace swerect {

inline double quadrature_weight(const Grid& g, int i, int j) {
    const double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
    const double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
    return wx * wy * g.dx * g.dy;
}

// Trapezoid-weighted squared L2 integral of one field.
inline double l2_sq(const Field& f) {
    const Grid& g = f.grid;
    double s = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        const double wx = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
        for (int j = 0; j < g.ny; ++j) {
            const double wy = (j == 0 || j == g.ny - 1) ? 0.5 : 1.0;
            const double v = f(i, j);
            s += wx * wy * v * v;
        }
    }
    return s * g.dx * g.dy;
}

inline double l2_field(const Field& f) { return std::sqrt(l2_sq(f)); }

// Uniform-weight variant used for convolution mass bounds.
inline double l2_field_plain(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.dx * f.grid.dy);
}

inline double l2_norm(const State& s) {
    if (!s.finite()) {
        throw NumericError("l2_norm: state has non-finite values");
    }
    return std::sqrt(l2_sq(s.u) + l2_sq(s.v) + l2_sq(s.phi));
}

// Discrete H^k norm: sum over all partial derivatives up to total order k,
// 2nd-order stencils (one-sided at the boundary).
inline double sobolev_norm(const State& s, int k) {
    if (k < 0) throw NumericError("sobolev_norm: negative order");
    const Grid& g = s.grid();
    if (k > 0 && (g.nx <= 2 * k || g.ny <= 2 * k)) {
        throw GridTooCoarse("sobolev_norm: grid cannot support the requested order");
    }
    if (!s.finite()) {
        throw NumericError("sobolev_norm: state has non-finite values");
    }
    double total = 0.0;
    for (int c = 0; c < 3; ++c) {
        const Field& comp = s.component(c);
        for (int a = 0; a <= k; ++a) {
            const Field dxa = deriv_x(comp, a);
            for (int b = 0; a + b <= k; ++b) {
                const Field dab = deriv_y(dxa, b);
                total += l2_sq(dab);
            }
        }
    }
    return std::sqrt(total);
}

inline double linf_l2_norm(std::span<const State> traj) {
    if (traj.empty()) {
        throw EmptyTrajectory("linf_l2_norm: empty trajectory");
    }
    double m = 0.0;
    for (const State& s : traj) {
        const double n = l2_norm(s);
        if (n > m) m = n;
    }
    return m;
}

inline double linf_l2_norm(const std::vector<State>& traj) {
    return linf_l2_norm(std::span<const State>(traj.data(), traj.size()));
}

}  // namespace swerect
