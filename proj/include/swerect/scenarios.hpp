#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "swerect/algebra.hpp"
#include "swerect/fd.hpp"
#include "swerect/linear.hpp"
#include "swerect/nonlinear.hpp"
#include "swerect/prep.hpp"
#include "swerect/state.hpp"
#include "swerect/stationary.hpp"

namespace swerect::scenarios {

inline Params desk_params() { return Params{}; }

inline Grid desk_grid(int n) { return Grid(1.0, 1.0, n, n); }

inline State uniform_state(const Grid& g, double u, double v, double phi) {
    State s(g);
    s.u.fill(u);
    s.v.fill(v);
    s.phi.fill(phi);
    return s;
}

// Compatible initial bump sized to clear the inflow margin on grids n >= 17.
// The height channel is scaled by sqrt(phi/g) at the desk depth 0.1: a raw
// height perturbation converts into velocity with gain sqrt(g/phi) under the
// wave dynamics, so equal raw amplitudes would leave the sup-norm delta ball
// even when nothing grows. With the scaling, max_abs stays near `amplitude`
// along the whole evolution.
inline State desk_bump(const Grid& g, const Params& p, double amplitude) {
    State s = prep::compatible_bump(g, p.m, amplitude, {0.6, 0.6}, 0.25);
    const double w = std::sqrt(0.1 / p.g);
    for (double& x : s.phi.values) x *= w;
    return s;
}

// Smooth bump shape with distinct component amplitudes, used by the
// manufactured-solution studies. The support clears the inflow compatibility
// windows on grids n >= 33 and is deliberately wide, trailing out across the
// outflow edges: narrow shapes keep the upwind error pre-asymptotic on the
// study grids.
inline State mms_shape(const Grid& g) {
    const Field b = prep::bump_field(g, 0.75, 0.75, 0.55);
    State s(g);
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        s.u.values[k] = 0.7 * b.values[k];
        s.v.values[k] = -0.4 * b.values[k];
        s.phi.values[k] = 0.5 * b.values[k];
    }
    return s;
}

// Mildly sheared supercritical background, linear in x.
inline State sheared_state(const Grid& g, double u0, double v0, double phi0, double slope) {
    State s(g);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            s.u(i, j) = u0 + slope * g.x(i);
            s.v(i, j) = v0 + 0.5 * slope * g.y(j);
            s.phi(i, j) = phi0 + 0.1 * slope * g.x(i);
        }
    }
    return s;
}

// Scenario 1 of the energy suite: frozen constant coefficients, no forcing.
// I0 must be non-increasing step by step.
inline linear::LinearProblem energy_constant(int n = 33) {
    const Grid g = desk_grid(n);
    linear::LinearProblem prob;
    prob.params = desk_params();
    prob.background = StateSeries::constant(uniform_state(g, 2.0, 2.0, 0.1));
    prob.initial = desk_bump(g, prob.params, 0.05);
    prob.t_end = 0.4;
    return prob;
}

// Scenario 2: background drifts in time and shears in space, so the
// symmetrizer varies and the fitted growth constant becomes positive.
inline linear::LinearProblem energy_varying(int n = 33) {
    const Grid g = desk_grid(n);
    linear::LinearProblem prob;
    prob.params = desk_params();
    StateSeries bg;
    bg.times = {0.0, 0.4};
    bg.states = {sheared_state(g, 2.0, 2.0, 0.10, 0.1),
                 sheared_state(g, 2.2, 2.1, 0.12, 0.1)};
    prob.background = std::move(bg);
    prob.initial = desk_bump(g, prob.params, 0.05);
    prob.t_end = 0.4;
    return prob;
}

// Scenario 3: zero initial data driven by a time-modulated interior bump.
inline linear::LinearProblem energy_forced(int n = 33) {
    const Grid g = desk_grid(n);
    linear::LinearProblem prob;
    prob.params = desk_params();
    prob.background = StateSeries::constant(uniform_state(g, 2.0, 2.0, 0.1));
    prob.initial = State(g);
    prob.t_end = 0.4;
    StateSeries fc;
    const State fb = desk_bump(g, prob.params, 0.2);
    const int knots = 33;
    for (int k = 0; k < knots; ++k) {
        const double t = prob.t_end * k / (knots - 1);
        fc.times.push_back(t);
        fc.states.push_back(scale(std::sin(2.0 * t), fb));
    }
    prob.forcing = std::move(fc);
    return prob;
}

inline std::vector<linear::LinearProblem> energy_suite(int n = 33) {
    return {energy_constant(n), energy_varying(n), energy_forced(n)};
}

// Manufactured solution of the frozen linear system: U*(x,t) = tau(t) B(x)
// over a constant background, forcing built with 4th-order derivatives of B.
struct MmsLinear {
    linear::LinearProblem problem;
    State shape;

    static double tau(double t) { return 1.0 + 0.5 * std::sin(6.0 * t); }
    static double dtau(double t) { return 3.0 * std::cos(6.0 * t); }

    State exact(double t) const { return scale(tau(t), shape); }

    double trajectory_error(const linear::LinearSolution& sol) const {
        double err = 0.0;
        for (std::size_t s = 0; s < sol.trajectory.size(); ++s) {
            err = std::max(err, l2_norm(sub(sol.trajectory[s], exact(sol.sample_times[s]))));
        }
        return err;
    }
};

inline MmsLinear mms_linear(int n) {
    const Grid g = desk_grid(n);
    MmsLinear mms;
    mms.shape = mms_shape(g);
    linear::LinearProblem& prob = mms.problem;
    prob.params = desk_params();
    prob.background = StateSeries::constant(uniform_state(g, 2.0, 2.0, 0.1));
    prob.initial = mms.exact(0.0);
    prob.t_end = 0.12;

    // spatial part E1 B_x + E2 B_y at the constant background
    const algebra::Mat3 m1 = algebra::e1(2.0, 2.0, 0.1, prob.params.g);
    const algebra::Mat3 m2 = algebra::e2(2.0, 2.0, 0.1, prob.params.g);
    State advect(g);
    std::array<Field, 3> bx, by;
    for (int c = 0; c < 3; ++c) {
        bx[static_cast<std::size_t>(c)] = deriv_x(mms.shape.component(c), 1, 4);
        by[static_cast<std::size_t>(c)] = deriv_y(mms.shape.component(c), 1, 4);
    }
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        for (int r = 0; r < 3; ++r) {
            double acc = 0.0;
            for (int c = 0; c < 3; ++c) {
                acc += m1(r, c) * bx[static_cast<std::size_t>(c)].values[k] +
                       m2(r, c) * by[static_cast<std::size_t>(c)].values[k];
            }
            advect.component(r).values[k] = acc;
        }
    }

    // Sample the forcing exactly at the solver's step times so both Heun
    // stages see exact values.
    const std::vector<double> times = linear::time_grid(prob);
    StateSeries fc;
    fc.times = times;
    fc.states.reserve(times.size());
    for (double t : times) {
        fc.states.push_back(add(scale(MmsLinear::dtau(t), mms.shape),
                                scale(MmsLinear::tau(t), advect)));
    }
    prob.forcing = std::move(fc);
    return mms;
}

// Manufactured solution of the resolvent equation at a constant background:
// exact solution B, forcing E1^0 B_x + E2^0 B_y + omega B.
struct MmsResolvent {
    State background;
    State forcing;
    State shape;
    double omega = 1.0;
    Params params;
};

inline MmsResolvent mms_resolvent(int n) {
    const Grid g = desk_grid(n);
    MmsResolvent mms;
    mms.params = desk_params();
    mms.background = uniform_state(g, 2.0, 2.0, 0.1);
    mms.shape = mms_shape(g);
    mms.omega = 1.0;
    const algebra::Mat3 m1 = algebra::e1_sym(2.0, 2.0, 0.1, mms.params.g);
    const algebra::Mat3 m2 = algebra::e2_sym(2.0, 2.0, 0.1, mms.params.g);
    State f(g);
    std::array<Field, 3> bx, by;
    for (int c = 0; c < 3; ++c) {
        bx[static_cast<std::size_t>(c)] = deriv_x(mms.shape.component(c), 1, 4);
        by[static_cast<std::size_t>(c)] = deriv_y(mms.shape.component(c), 1, 4);
    }
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        for (int r = 0; r < 3; ++r) {
            double acc = mms.omega * mms.shape.component(r).values[k];
            for (int c = 0; c < 3; ++c) {
                acc += m1(r, c) * bx[static_cast<std::size_t>(c)].values[k] +
                       m2(r, c) * by[static_cast<std::size_t>(c)].values[k];
            }
            f.component(r).values[k] = acc;
        }
    }
    mms.forcing = std::move(f);
    return mms;
}

// Smoothly varying supercritical background for the resolvent energy bound;
// its divergence content makes the energy constant strictly positive.
inline State resolvent_bound_background(const Grid& g) {
    constexpr double pi = 3.14159265358979323846;
    State s(g);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            const double x = g.x(i);
            const double y = g.y(j);
            s.u(i, j) = 2.0 + 0.25 * std::sin(pi * x) * std::cos(0.5 * pi * y);
            s.v(i, j) = 2.2 + 0.2 * std::cos(pi * x) * std::sin(pi * y);
            s.phi(i, j) = 0.1 + 0.03 * std::sin(pi * x) * std::sin(pi * y);
        }
    }
    return s;
}

// Picard desk scenario: constant stationary profile with a compatible bump
// of half the admissible perturbation size.
struct PicardScenario {
    State initial;
    stationary::StationarySolution profile;
    Params params;
    double t_end = 0.04;
};

inline PicardScenario picard_desk(int n = 33, double t_end = 0.04) {
    const Grid g = desk_grid(n);
    PicardScenario sc;
    sc.params = desk_params();
    sc.profile = stationary::constant_state(2.0, 2.0, 0.1, sc.params, g);
    sc.initial = desk_bump(g, sc.params, 0.5 * sc.params.delta);
    sc.t_end = t_end;
    return sc;
}

// Rotating-channel profile for the stationary march study.
inline Params stationary_params() {
    Params p = desk_params();
    p.f = 0.05;
    return p;
}

}  // namespace swerect::scenarios
