#pragma once

#include <array>
#include <cmath>
#include <string>

#include "swerect/algebra.hpp"
#include "swerect/errors.hpp"
#include "swerect/fd.hpp"
#include "swerect/norms.hpp"
#include "swerect/state.hpp"

namespace swerect::stationary {

enum class Kind { constant, y_independent };

struct StationarySolution {
    State state;
    double residual_norm = 0.0;
    Kind kind = Kind::constant;
    // Drift of the conserved mass flux u*phi along the march (diagnostic).
    double mass_flux_drift = 0.0;
};

// Residual of the time-independent system E1(U) U_x + E2(U) U_y + l(U) = 0,
// measured with 4th-order-accurate derivatives so the march's own order is
// observable under refinement.
inline double stationary_residual(const State& s, const Params& p) {
    const Grid& g = s.grid();
    std::array<Field, 3> dx_, dy_;
    for (int c = 0; c < 3; ++c) {
        dx_[static_cast<std::size_t>(c)] = deriv_x(s.component(c), 1, 4);
        dy_[static_cast<std::size_t>(c)] = deriv_y(s.component(c), 1, 4);
    }
    double acc = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            const double u = s.u(i, j);
            const double v = s.v(i, j);
            const double phi = s.phi(i, j);
            const double ux = dx_[0](i, j), vx = dx_[1](i, j), phix = dx_[2](i, j);
            const double uy = dy_[0](i, j), vy = dy_[1](i, j), phiy = dy_[2](i, j);
            const double r0 = u * ux + p.g * phix + v * uy - p.f * v;
            const double r1 = u * vx + v * vy + p.g * phiy + p.f * u;
            const double r2 = phi * ux + u * phix + phi * vy + v * phiy;
            acc += quadrature_weight(g, i, j) * (r0 * r0 + r1 * r1 + r2 * r2);
        }
    }
    return std::sqrt(acc);
}

inline void require_strong_point(double u, double v, double phi, const Params& p,
                                 const char* where, double x_loc) {
    const double lo = 2.0 * p.c0;
    const double hi = 0.5 * p.c1;
    const double wave = 2.0 * p.c2 * p.c2;
    const bool ok = u >= lo && v >= lo && phi >= lo && u <= hi && v <= hi && phi <= hi &&
                    u * u - p.g * phi >= wave && v * v - p.g * phi >= wave;
    if (!ok) {
        throw RegimeLost(std::string(where) + ": strong supercritical condition lost at x=" +
                             std::to_string(x_loc),
                         x_loc);
    }
}

inline StationarySolution constant_state(double u0, double v0, double phi0, const Params& p,
                                         const Grid& grid) {
    p.validate();
    if (p.f != 0.0) {
        throw CoriolisRequiresProfile(
            "constant_state: constant states solve the system only for f = 0");
    }
    const auto one = [&] {
        State s(grid);
        s.u.fill(u0);
        s.v.fill(v0);
        s.phi.fill(phi0);
        return s;
    }();
    const auto rep = algebra::check_supercritical(one, p, true);
    if (!rep.ok) {
        throw NotStrongSupercritical(std::string("constant_state: ") + std::string(rep.worst_name) +
                                     " margin " + std::to_string(rep.worst_margin));
    }
    StationarySolution sol{one, 0.0, Kind::constant, 0.0};
    sol.residual_norm = stationary_residual(sol.state, p);
    return sol;
}

namespace detail {

inline std::array<double, 3> profile_rhs(const std::array<double, 3>& q, const Params& p) {
    // dU/dx = -E1(U)^-1 l(U) with l = (-f v, f u, 0).
    const double u = q[0], v = q[1], phi = q[2];
    const double det = u * (u * u - p.g * phi);
    if (std::fabs(det) < 1e-14) {
        throw IntegrationFailure("y_independent_stationary: E1 is singular along the march");
    }
    // E1^-1 = 1/det * [[u^2, 0, -g u], [0, u^2 - g phi, 0], [-u phi, 0, u^2]]
    const double l0 = -p.f * v;
    const double l1 = p.f * u;
    return {-(u * u * l0) / det, -((u * u - p.g * phi) * l1) / det, -(-u * phi * l0) / det};
}

inline std::array<double, 3> rk4_step(const std::array<double, 3>& q, double h, const Params& p) {
    const auto k1 = profile_rhs(q, p);
    std::array<double, 3> t{};
    for (int c = 0; c < 3; ++c) t[c] = q[c] + 0.5 * h * k1[c];
    const auto k2 = profile_rhs(t, p);
    for (int c = 0; c < 3; ++c) t[c] = q[c] + 0.5 * h * k2[c];
    const auto k3 = profile_rhs(t, p);
    for (int c = 0; c < 3; ++c) t[c] = q[c] + h * k3[c];
    const auto k4 = profile_rhs(t, p);
    std::array<double, 3> out{};
    for (int c = 0; c < 3; ++c) {
        out[c] = q[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    return out;
}

// One grid interval with step-doubling control: accept when a full step and
// two half steps agree, otherwise subdivide.
inline std::array<double, 3> march_interval(std::array<double, 3> q, double h, const Params& p) {
    int pieces = 1;
    constexpr int max_pieces = 4096;
    while (true) {
        const auto full = rk4_step(q, h / pieces, p);
        auto half = rk4_step(q, 0.5 * h / pieces, p);
        half = rk4_step(half, 0.5 * h / pieces, p);
        double err = 0.0;
        double mag = 0.0;
        for (int c = 0; c < 3; ++c) {
            err = std::max(err, std::fabs(full[c] - half[c]));
            mag = std::max(mag, std::fabs(half[c]));
        }
        if (err <= 1e-12 + 1e-10 * mag) break;
        pieces *= 2;
        if (pieces > max_pieces) {
            throw IntegrationFailure("y_independent_stationary: step control failed to converge");
        }
    }
    const double sub = h / pieces;
    for (int k = 0; k < pieces; ++k) {
        q = rk4_step(q, sub, p);
        for (int c = 0; c < 3; ++c) {
            if (!std::isfinite(q[c])) {
                throw IntegrationFailure("y_independent_stationary: non-finite state");
            }
        }
    }
    return q;
}

}  // namespace detail

// Marches dU/dx = -E1(U)^-1 l(U) from the inlet trace across [0, L1] with
// classical RK4 at grid resolution and replicates the profile in y.
inline StationarySolution y_independent_stationary(double u0, double v0, double phi0,
                                                   const Params& p, const Grid& grid) {
    p.validate();
    require_strong_point(u0, v0, phi0, p, "y_independent_stationary", 0.0);

    std::vector<std::array<double, 3>> profile(static_cast<std::size_t>(grid.nx));
    profile[0] = {u0, v0, phi0};
    const double flux0 = u0 * phi0;
    double drift = 0.0;
    for (int i = 0; i + 1 < grid.nx; ++i) {
        profile[static_cast<std::size_t>(i + 1)] =
            detail::march_interval(profile[static_cast<std::size_t>(i)], grid.dx, p);
        const auto& q = profile[static_cast<std::size_t>(i + 1)];
        require_strong_point(q[0], q[1], q[2], p, "y_independent_stationary", grid.x(i + 1));
        drift = std::max(drift, std::fabs(q[0] * q[2] - flux0));
    }

    StationarySolution sol;
    sol.kind = Kind::y_independent;
    sol.mass_flux_drift = drift;
    sol.state = State(grid);
    for (int i = 0; i < grid.nx; ++i) {
        const auto& q = profile[static_cast<std::size_t>(i)];
        for (int j = 0; j < grid.ny; ++j) {
            sol.state.u(i, j) = q[0];
            sol.state.v(i, j) = q[1];
            sol.state.phi(i, j) = q[2];
        }
    }
    sol.residual_norm = stationary_residual(sol.state, p);
    return sol;
}

}  // namespace swerect::stationary
