#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "swerect/errors.hpp"
#include "swerect/fd.hpp"
#include "swerect/grid.hpp"
#include "swerect/norms.hpp"
#include "swerect/state.hpp"

namespace swerect::prep {

// C-infinity radial profile: 1 at the center, identically 0 for r >= 1.
inline double bump_profile(double r2) {
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
}

inline Field bump_field(const Grid& g, double cx, double cy, double width) {
    Field out(g);
    for (int i = 0; i < g.nx; ++i) {
        const double px = (g.x(i) - cx) / width;
        for (int j = 0; j < g.ny; ++j) {
            const double py = (g.y(j) - cy) / width;
            out(i, j) = bump_profile(px * px + py * py);
        }
    }
    return out;
}

// Convolution with a nonnegative unit-mass kernel supported in the cone
// {0 < x/2 < y < 2x} scaled by eps (a radial bump on the ball centered at
// (eps,eps) with radius 0.4*eps, which lies strictly inside the cone). The
// result vanishes on the strip of width 0.6*eps along both inflow edges.
inline Field directional_mollify(const Field& f, double eps) {
    const Grid& g = f.grid;
    if (!(eps > 0.0)) {
        throw NumericError("directional_mollify: eps must be positive");
    }
    const double cap = (g.L1 < g.L2 ? g.L1 : g.L2) / 4.0;
    if (eps > cap) {
        throw KernelTooWide("directional_mollify: eps exceeds min(L1,L2)/4");
    }

    struct Tap {
        int k, l;
        double w;
    };
    std::vector<Tap> taps;
    double mass = 0.0;
    const int kmin = static_cast<int>(std::ceil(0.6 * eps / g.dx));
    const int kmax = static_cast<int>(std::floor(1.4 * eps / g.dx));
    const int lmin = static_cast<int>(std::ceil(0.6 * eps / g.dy));
    const int lmax = static_cast<int>(std::floor(1.4 * eps / g.dy));
    for (int k = kmin; k <= kmax; ++k) {
        const double xi = k * g.dx / eps - 1.0;
        for (int l = lmin; l <= lmax; ++l) {
            const double eta = l * g.dy / eps - 1.0;
            const double w = bump_profile((xi * xi + eta * eta) / 0.16);
            if (w > 0.0) {
                taps.push_back({k, l, w});
                mass += w;
            }
        }
    }
    if (taps.empty()) {
        throw GridTooCoarse("directional_mollify: no grid node falls in the kernel support");
    }
    for (auto& t : taps) t.w /= mass;

    Field out(g);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            double acc = 0.0;
            for (const Tap& t : taps) {
                const int ii = i - t.k;
                const int jj = j - t.l;
                if (ii >= 0 && jj >= 0) {
                    acc += t.w * f(ii, jj);
                }
            }
            out(i, j) = acc;
        }
    }
    return out;
}

// Smooth state supported on a disk kept clear of the inflow edges by at
// least order+2 cells, so every one-sided compatibility stencil up to the
// given order reads exact zeros.
inline State compatible_bump(const Grid& g, int order, double amplitude,
                             std::array<double, 2> center, double width) {
    if (order < 0) throw NumericError("compatible_bump: negative order");
    if (!(width > 0.0)) throw NumericError("compatible_bump: width must be positive");
    const double margin_x = (order + 2) * g.dx;
    const double margin_y = (order + 2) * g.dy;
    if (center[0] - width < margin_x || center[1] - width < margin_y ||
        center[0] + width > g.L1 - g.dx || center[1] + width > g.L2 - g.dy) {
        throw SupportTouchesBoundary("compatible_bump: support reaches the boundary");
    }
    State out(g);
    const Field b = bump_field(g, center[0], center[1], width);
    for (int q = 0; q < g.size(); ++q) {
        const double v = amplitude * b.values[static_cast<std::size_t>(q)];
        out.u.values[static_cast<std::size_t>(q)] = v;
        out.v.values[static_cast<std::size_t>(q)] = v;
        out.phi.values[static_cast<std::size_t>(q)] = v;
    }
    return out;
}

// Max over components, inflow-boundary nodes, and derivative orders j <= k of
// the one-sided normal derivative, normalized by sobolev_norm(s,k) + 1.
inline double compatibility_residual(const State& s, int k) {
    const Grid& g = s.grid();
    if (g.nx < k + 2 || g.ny < k + 2) {
        throw GridTooCoarse("compatibility_residual: grid cannot support the order");
    }
    double worst = 0.0;
    for (int j = 0; j <= k; ++j) {
        const int width = j + 2;
        std::vector<double> xs(static_cast<std::size_t>(width));
        // x = 0 edge: d^j/dx^j at i = 0
        for (int q = 0; q < width; ++q) xs[static_cast<std::size_t>(q)] = q * g.dx;
        const std::vector<double> wx = fd_weights(0.0, xs, j);
        for (int c = 0; c < 3; ++c) {
            const Field& comp = s.component(c);
            for (int jy = 0; jy < g.ny; ++jy) {
                double val = 0.0;
                for (int q = 0; q < width; ++q) val += wx[static_cast<std::size_t>(q)] * comp(q, jy);
                const double av = std::fabs(val);
                if (av > worst) worst = av;
            }
        }
        // y = 0 edge: d^j/dy^j at j = 0
        for (int q = 0; q < width; ++q) xs[static_cast<std::size_t>(q)] = q * g.dy;
        const std::vector<double> wy = fd_weights(0.0, xs, j);
        for (int c = 0; c < 3; ++c) {
            const Field& comp = s.component(c);
            for (int ix = 0; ix < g.nx; ++ix) {
                double val = 0.0;
                for (int q = 0; q < width; ++q) val += wy[static_cast<std::size_t>(q)] * comp(ix, q);
                const double av = std::fabs(val);
                if (av > worst) worst = av;
            }
        }
    }
    return worst / (sobolev_norm(s, k) + 1.0);
}

}  // namespace swerect::prep
