#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "swerect/algebra.hpp"
#include "swerect/errors.hpp"
#include "swerect/fd.hpp"
#include "swerect/linear.hpp"
#include "swerect/norms.hpp"
#include "swerect/prep.hpp"
#include "swerect/state.hpp"
#include "swerect/stationary.hpp"

namespace swerect::nonlinear {

// Per-iteration record of the fixed-point loop.
struct IterationReport {
    int iterates = 0;
    std::vector<double> diffs;    // max-over-samples L2 distance between iterates
    std::vector<double> ratios;   // successive diff ratios (skipped below 1e-14)
    std::vector<double> hm;       // max-over-samples H^m norm of each iterate
    bool converged = false;
    double final_residual = 0.0;
};

struct NoConvergence : Error {
    IterationReport report;

    NoConvergence(const std::string& msg, IterationReport rep)
        : Error(msg), report(std::move(rep)) {}
};

namespace detail {

struct StationaryDerivs {
    Field usx, usy, vsx, vsy, psx, psy;
};

inline StationaryDerivs stationary_derivs(const State& us) {
    return {deriv_x(us.u, 1),   deriv_y(us.u, 1), deriv_x(us.v, 1),
            deriv_y(us.v, 1),   deriv_x(us.phi, 1), deriv_y(us.phi, 1)};
}

// F^U of the perturbation system: the commutator terms that survive after
// subtracting the stationary balance, linear in the perturbation.
inline State forcing_from(const State& U, const StationaryDerivs& d) {
    State f(U.grid());
    const int n = U.grid().size();
    for (int q = 0; q < n; ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double u = U.u.values[k];
        const double v = U.v.values[k];
        const double phi = U.phi.values[k];
        f.u.values[k] = -(u * d.usx.values[k] + v * d.usy.values[k]);
        f.v.values[k] = -(u * d.vsx.values[k] + v * d.vsy.values[k]);
        f.phi.values[k] = -(u * d.psx.values[k] + v * d.psy.values[k] +
                            phi * (d.usx.values[k] + d.vsy.values[k]));
    }
    return f;
}

}  // namespace detail

inline State perturbation_forcing(const State& U, const stationary::StationarySolution& Us) {
    require_same_grid(U.grid(), Us.state.grid(), "perturbation_forcing");
    return detail::forcing_from(U, detail::stationary_derivs(Us.state));
}

namespace detail {

// Conservative step bound: CFL speeds of any state within the delta ball
// around the stationary profile.
inline double ball_dt(const State& us, const Params& p, double cfl) {
    const Grid& g = us.grid();
    double su = 0.0;
    double sv = 0.0;
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double c = std::sqrt(p.g * (us.phi.values[k] + p.delta));
        su = std::max(su, us.u.values[k] + p.delta + c);
        sv = std::max(sv, us.v.values[k] + p.delta + c);
    }
    return cfl * std::min(g.dx / su, g.dy / sv);
}

inline void require_in_regime(const State& pert, const State& us, const Params& p,
                              double t) {
    if (max_abs(pert) > p.delta * (1.0 + 1e-12)) {
        throw RegimeLost("picard_solve: perturbation left the delta ball",
                         std::numeric_limits<double>::quiet_NaN(), t);
    }
    const State total = add(pert, us);
    const auto rep = algebra::check_supercritical(total, p, false);
    if (!rep.ok) {
        throw RegimeLost(std::string("picard_solve: supercriticality lost (") +
                             std::string(rep.worst_name) + " margin " +
                             std::to_string(rep.worst_margin) + ")",
                         total.grid().x(rep.worst_i), t);
    }
}

// Discrete residual of the perturbation system on the stored samples:
// centered differences in time, the scheme's backward differences in space.
inline double trajectory_residual(const std::vector<State>& samples,
                                  const std::vector<double>& times, const State& us,
                                  const StationaryDerivs& d, const Params& p) {
    if (samples.size() < 3) return 0.0;
    const Grid& g = us.grid();
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
        const double inv2dt = 1.0 / (times[k + 1] - times[k - 1]);
        const State f = forcing_from(samples[k], d);
        const State& S = samples[k];
        double acc = 0.0;
        for (int i = 1; i < g.nx; ++i) {
            for (int j = 1; j < g.ny; ++j) {
                const int q = g.index(i, j);
                const int qx = g.index(i - 1, j);
                const int qy = g.index(i, j - 1);
                const std::size_t kq = static_cast<std::size_t>(q);
                const double ut = (samples[k + 1].u.values[kq] -
                                   samples[k - 1].u.values[kq]) * inv2dt;
                const double vt = (samples[k + 1].v.values[kq] -
                                   samples[k - 1].v.values[kq]) * inv2dt;
                const double pt = (samples[k + 1].phi.values[kq] -
                                   samples[k - 1].phi.values[kq]) * inv2dt;
                const double wu = S.u.values[kq] + us.u.values[kq];
                const double wv = S.v.values[kq] + us.v.values[kq];
                const double wp = S.phi.values[kq] + us.phi.values[kq];
                const double ux = (S.u.values[kq] - S.u.values[static_cast<std::size_t>(qx)]) / g.dx;
                const double vx = (S.v.values[kq] - S.v.values[static_cast<std::size_t>(qx)]) / g.dx;
                const double px = (S.phi.values[kq] - S.phi.values[static_cast<std::size_t>(qx)]) / g.dx;
                const double uy = (S.u.values[kq] - S.u.values[static_cast<std::size_t>(qy)]) / g.dy;
                const double vy = (S.v.values[kq] - S.v.values[static_cast<std::size_t>(qy)]) / g.dy;
                const double py = (S.phi.values[kq] - S.phi.values[static_cast<std::size_t>(qy)]) / g.dy;
                const double r0 = ut + wu * ux + p.g * px + wv * uy - p.f * S.v.values[kq] -
                                  f.u.values[kq];
                const double r1 = vt + wu * vx + wv * vy + p.g * py + p.f * S.u.values[kq] -
                                  f.v.values[kq];
                const double r2 = pt + wp * ux + wu * px + wp * vy + wv * py -
                                  f.phi.values[kq];
                acc += quadrature_weight(g, i, j) * (r0 * r0 + r1 * r1 + r2 * r2);
            }
        }
        worst = std::max(worst, std::sqrt(acc));
    }
    return worst;
}

}  // namespace detail

struct PicardResult {
    StateSeries trajectory;
    IterationReport report;
};

// Fixed-point loop for the perturbation around a stationary profile: freeze
// the coefficients at the previous iterate, solve the linear system, repeat
// until the trajectory is Cauchy in the max-over-time L2 metric.
inline PicardResult picard_solve(const State& U0, const stationary::StationarySolution& Us,
                                 const Params& p, double t_end, double tol = 1e-10,
                                 int max_iter = 25, double cfl = 0.45,
                                 int sample_count = 33) {
    p.validate();
    require_same_grid(U0.grid(), Us.state.grid(), "picard_solve");
    if (!(t_end > 0.0)) throw NumericError("picard_solve: t_end must be positive");
    if (!(tol > 0.0)) throw NumericError("picard_solve: tol must be positive");
    if (max_iter < 1) throw NumericError("picard_solve: max_iter must be at least 1");
    if (sample_count < 3) throw NumericError("picard_solve: need at least 3 samples");
    {
        const auto rep = algebra::check_supercritical(Us.state, p, true);
        if (!rep.ok) {
            throw NotStrongSupercritical(
                std::string("picard_solve: stationary profile fails the strong regime (") +
                std::string(rep.worst_name) + ")");
        }
    }
    if (prep::compatibility_residual(U0, p.m) > linear::kCompatibilityGate) {
        throw IncompatibleData("picard_solve: initial data fails the compatibility gate");
    }
    detail::require_in_regime(U0, Us.state, p, 0.0);

    const double dt0 = detail::ball_dt(Us.state, p, cfl);
    const auto d = detail::stationary_derivs(Us.state);

    IterationReport rep;
    std::vector<double> times;
    std::vector<State> prev;   // samples of U^k at the shared sample times
    bool prev_constant = true; // U^0 is the constant-in-time initial state

    for (int k = 0; k < max_iter; ++k) {
        linear::LinearProblem prob;
        if (prev_constant) {
            prob.background = StateSeries::constant(add(U0, Us.state));
            prob.forcing = StateSeries::constant(detail::forcing_from(U0, d));
        } else {
            StateSeries bg, fc;
            bg.times = times;
            fc.times = times;
            bg.states.reserve(prev.size());
            fc.states.reserve(prev.size());
            for (const State& s : prev) {
                bg.states.push_back(add(s, Us.state));
                fc.states.push_back(detail::forcing_from(s, d));
            }
            prob.background = std::move(bg);
            prob.forcing = std::move(fc);
        }
        prob.initial = U0;
        prob.params = p;
        prob.t_end = t_end;
        prob.cfl = cfl;
        prob.sample_count = sample_count;
        prob.dt_override = dt0;

        linear::LinearSolution sol = linear::solve_linear(prob);
        for (std::size_t s = 0; s < sol.trajectory.size(); ++s) {
            detail::require_in_regime(sol.trajectory[s], Us.state, p, sol.sample_times[s]);
        }

        double diff = 0.0;
        if (prev_constant) {
            for (const State& s : sol.trajectory) diff = std::max(diff, l2_norm(sub(s, U0)));
        } else {
            for (std::size_t s = 0; s < sol.trajectory.size(); ++s) {
                diff = std::max(diff, l2_norm(sub(sol.trajectory[s], prev[s])));
            }
        }
        rep.diffs.push_back(diff);
        if (k >= 1 && rep.diffs[static_cast<std::size_t>(k - 1)] > 1e-14) {
            rep.ratios.push_back(diff / rep.diffs[static_cast<std::size_t>(k - 1)]);
        }
        double hm = 0.0;
        for (const State& s : sol.trajectory) hm = std::max(hm, sobolev_norm(s, p.m));
        rep.hm.push_back(hm);
        rep.iterates = k + 1;

        times = sol.sample_times;
        prev = std::move(sol.trajectory);
        prev_constant = false;

        if (diff < tol) {
            rep.converged = true;
            for (double r : rep.ratios) {
                if (!(r < 1.0)) rep.converged = false;
            }
            break;
        }
    }

    if (!rep.converged) {
        throw NoConvergence("picard_solve: no convergence within " +
                                std::to_string(max_iter) + " iterations (last diff " +
                                std::to_string(rep.diffs.back()) + ")",
                            rep);
    }
    rep.final_residual = detail::trajectory_residual(prev, times, Us.state, d, p);

    PicardResult out;
    out.trajectory.times = std::move(times);
    out.trajectory.states = std::move(prev);
    out.trajectory.validate();
    out.report = rep;
    return out;
}

namespace detail {

// rhs of the quasilinear perturbation step at frozen perturbation X:
// F^X - E1(X+Us) D-x X - E2(X+Us) D-y X - l(X); inflow rows zero.
inline void quasilinear_rhs(const State& X, const State& us, const StationaryDerivs& d,
                            const Params& p, State& out) {
    const Grid& g = X.grid();
    const State f = forcing_from(X, d);
    out.u.fill(0.0);
    out.v.fill(0.0);
    out.phi.fill(0.0);
    for (int i = 1; i < g.nx; ++i) {
        for (int j = 1; j < g.ny; ++j) {
            const std::size_t q = static_cast<std::size_t>(g.index(i, j));
            const std::size_t qx = static_cast<std::size_t>(g.index(i - 1, j));
            const std::size_t qy = static_cast<std::size_t>(g.index(i, j - 1));
            const double wu = X.u.values[q] + us.u.values[q];
            const double wv = X.v.values[q] + us.v.values[q];
            const double wp = X.phi.values[q] + us.phi.values[q];
            const double ux = (X.u.values[q] - X.u.values[qx]) / g.dx;
            const double vx = (X.v.values[q] - X.v.values[qx]) / g.dx;
            const double px = (X.phi.values[q] - X.phi.values[qx]) / g.dx;
            const double uy = (X.u.values[q] - X.u.values[qy]) / g.dy;
            const double vy = (X.v.values[q] - X.v.values[qy]) / g.dy;
            const double py = (X.phi.values[q] - X.phi.values[qy]) / g.dy;
            out.u.values[q] = f.u.values[q] - (wu * ux + p.g * px) - wv * uy +
                              p.f * X.v.values[q];
            out.v.values[q] = f.v.values[q] - wu * vx - (wv * vy + p.g * py) -
                              p.f * X.u.values[q];
            out.phi.values[q] = f.phi.values[q] - (wp * ux + wu * px) -
                                (wp * vy + wv * py);
        }
    }
}

inline void zero_inflow_state(State& s) {
    const Grid& g = s.grid();
    for (int i = 0; i < g.nx; ++i) {
        s.u(i, 0) = 0.0;
        s.v(i, 0) = 0.0;
        s.phi(i, 0) = 0.0;
    }
    for (int j = 0; j < g.ny; ++j) {
        s.u(0, j) = 0.0;
        s.v(0, j) = 0.0;
        s.phi(0, j) = 0.0;
    }
}

}  // namespace detail

// One two-stage upwind step of the quasilinear perturbation system with
// coefficients re-evaluated at the current state.
inline State direct_nonlinear_step(const State& U, const stationary::StationarySolution& Us,
                                   double dt, const Params& p) {
    require_same_grid(U.grid(), Us.state.grid(), "direct_nonlinear_step");
    p.validate();
    if (!(dt > 0.0)) throw NumericError("direct_nonlinear_step: dt must be positive");
    State x = U;
    detail::zero_inflow_state(x);
    const State total = add(x, Us.state);
    {
        const auto rep = algebra::check_supercritical(total, p, false);
        if (!rep.ok) {
            throw NotSupercritical(std::string("direct_nonlinear_step: state fails ") +
                                   std::string(rep.worst_name));
        }
    }
    const double bound = linear::cfl_dt(total, p, 1.0);
    if (dt > bound * (1.0 + 1e-12)) {
        throw UnstableStep("direct_nonlinear_step: dt exceeds the stability limit");
    }
    const auto d = detail::stationary_derivs(Us.state);
    State k1(U.grid()), k2(U.grid());
    detail::quasilinear_rhs(x, Us.state, d, p, k1);
    State xstar = add(x, scale(dt, k1));
    {
        const auto rep = algebra::check_supercritical(add(xstar, Us.state), p, false);
        if (!rep.ok) {
            throw NotSupercritical("direct_nonlinear_step: stage state fails supercriticality");
        }
    }
    detail::quasilinear_rhs(xstar, Us.state, d, p, k2);
    State out = add(x, scale(0.5 * dt, add(k1, k2)));
    detail::zero_inflow_state(out);
    return out;
}

namespace detail {

// rhs of the unshifted full system: -E1(V) D-x V - E2(V) D-y V - l(V);
// inflow rows zero so boundary values are carried through unchanged.
inline void full_rhs(const State& V, const Params& p, State& out) {
    const Grid& g = V.grid();
    out.u.fill(0.0);
    out.v.fill(0.0);
    out.phi.fill(0.0);
    for (int i = 1; i < g.nx; ++i) {
        for (int j = 1; j < g.ny; ++j) {
            const std::size_t q = static_cast<std::size_t>(g.index(i, j));
            const std::size_t qx = static_cast<std::size_t>(g.index(i - 1, j));
            const std::size_t qy = static_cast<std::size_t>(g.index(i, j - 1));
            const double u = V.u.values[q];
            const double v = V.v.values[q];
            const double phi = V.phi.values[q];
            const double ux = (V.u.values[q] - V.u.values[qx]) / g.dx;
            const double vx = (V.v.values[q] - V.v.values[qx]) / g.dx;
            const double px = (V.phi.values[q] - V.phi.values[qx]) / g.dx;
            const double uy = (V.u.values[q] - V.u.values[qy]) / g.dy;
            const double vy = (V.v.values[q] - V.v.values[qy]) / g.dy;
            const double py = (V.phi.values[q] - V.phi.values[qy]) / g.dy;
            out.u.values[q] = -(u * ux + p.g * px) - v * uy + p.f * v;
            out.v.values[q] = -u * vx - (v * vy + p.g * py) - p.f * u;
            out.phi.values[q] = -(phi * ux + u * px) - (phi * vy + v * py);
        }
    }
}

}  // namespace detail

// One two-stage upwind step of the unshifted system with the inflow rows held
// at their incoming values (time-independent inflow data).
inline State direct_full_step(const State& V, double dt, const Params& p) {
    p.validate();
    if (!(dt > 0.0)) throw NumericError("direct_full_step: dt must be positive");
    {
        const auto rep = algebra::check_supercritical(V, p, false);
        if (!rep.ok) {
            throw NotSupercritical(std::string("direct_full_step: state fails ") +
                                   std::string(rep.worst_name));
        }
    }
    const double bound = linear::cfl_dt(V, p, 1.0);
    if (dt > bound * (1.0 + 1e-12)) {
        throw UnstableStep("direct_full_step: dt exceeds the stability limit");
    }
    State k1(V.grid()), k2(V.grid());
    detail::full_rhs(V, p, k1);
    const State vstar = add(V, scale(dt, k1));
    {
        const auto rep = algebra::check_supercritical(vstar, p, false);
        if (!rep.ok) {
            throw NotSupercritical("direct_full_step: stage state fails supercriticality");
        }
    }
    detail::full_rhs(vstar, p, k2);
    return add(V, scale(0.5 * dt, add(k1, k2)));
}

}  // namespace swerect::nonlinear
