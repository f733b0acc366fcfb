#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "swerect/errors.hpp"
#include "swerect/grid.hpp"

namespace swerect {

// Physical constants and regime bounds. m is the compatibility order.
struct Params {
    double g = 9.8;
    double f = 0.0;
    double c0 = 0.04;
    double c1 = 5.0;
    double c2 = 1.0;
    double delta = 0.1;
    int m = 3;

    void validate() const {
        if (!(g > 0.0)) throw NumericError("params: g must be positive");
        if (!(f >= 0.0)) throw NumericError("params: f must be nonnegative");
        if (!(c0 > 0.0 && c0 < c1)) throw NumericError("params: need 0 < c0 < c1");
        if (!(c2 > 0.0)) throw NumericError("params: c2 must be positive");
        if (!(delta > 0.0)) throw NumericError("params: delta must be positive");
        if (m < 3) throw NumericError("params: m must be at least 3");
    }
};

// The unknown vector U = (u, v, phi) as three scalar fields on one grid.
struct State {
    Field u, v, phi;

    State() = default;
    explicit State(const Grid& g) : u(g), v(g), phi(g) {}

    const Grid& grid() const { return u.grid; }

    bool finite() const { return u.finite() && v.finite() && phi.finite(); }

    Field& component(int c) { return c == 0 ? u : (c == 1 ? v : phi); }
    const Field& component(int c) const { return c == 0 ? u : (c == 1 ? v : phi); }
};

inline State add(const State& a, const State& b) {
    require_same_grid(a.grid(), b.grid(), "add");
    State out(a.grid());
    const int n = a.grid().size();
    for (int k = 0; k < n; ++k) {
        out.u.values[k] = a.u.values[k] + b.u.values[k];
        out.v.values[k] = a.v.values[k] + b.v.values[k];
        out.phi.values[k] = a.phi.values[k] + b.phi.values[k];
    }
    return out;
}

inline State sub(const State& a, const State& b) {
    require_same_grid(a.grid(), b.grid(), "sub");
    State out(a.grid());
    const int n = a.grid().size();
    for (int k = 0; k < n; ++k) {
        out.u.values[k] = a.u.values[k] - b.u.values[k];
        out.v.values[k] = a.v.values[k] - b.v.values[k];
        out.phi.values[k] = a.phi.values[k] - b.phi.values[k];
    }
    return out;
}

inline State scale(double c, const State& a) {
    State out(a.grid());
    const int n = a.grid().size();
    for (int k = 0; k < n; ++k) {
        out.u.values[k] = c * a.u.values[k];
        out.v.values[k] = c * a.v.values[k];
        out.phi.values[k] = c * a.phi.values[k];
    }
    return out;
}

inline double max_abs(const State& a) {
    double m = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (double v : a.component(c).values) {
            const double av = std::fabs(v);
            if (av > m) m = av;
        }
    }
    return m;
}

// Time-indexed states with piecewise-linear evaluation. A single sample means
// a time-independent sequence valid for every t.
struct StateSeries {
    std::vector<double> times;
    std::vector<State> states;

    StateSeries() = default;

    StateSeries(std::vector<double> t, std::vector<State> s)
        : times(std::move(t)), states(std::move(s)) {
        validate();
    }

    static StateSeries constant(const State& s) { return StateSeries({0.0}, {s}); }

    void validate() const {
        if (times.empty() || times.size() != states.size()) {
            throw EmptyTrajectory("state series: need one state per time instant");
        }
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (!(times[k] > times[k - 1])) {
                throw NumericError("state series: times must be strictly increasing");
            }
        }
        for (std::size_t k = 1; k < states.size(); ++k) {
            require_same_grid(states[k].grid(), states[0].grid(), "state series");
        }
    }

    const Grid& grid() const { return states.front().grid(); }
    bool single() const { return states.size() == 1; }
    double t_front() const { return times.front(); }
    double t_back() const { return times.back(); }

    // Segment index k with times[k] <= t <= times[k+1], clamped at the ends.
    std::size_t segment(double t) const {
        if (single() || t <= times.front()) return 0;
        for (std::size_t k = 1; k < times.size(); ++k) {
            if (t <= times[k]) return k - 1;
        }
        return times.size() - 2;
    }

    State at(double t) const {
        if (single()) return states.front();
        const std::size_t k = segment(t);
        const double span = times[k + 1] - times[k];
        double th = (t - times[k]) / span;
        if (th < 0.0) th = 0.0;
        if (th > 1.0) th = 1.0;
        State out(grid());
        const int n = grid().size();
        const State& a = states[k];
        const State& b = states[k + 1];
        for (int q = 0; q < n; ++q) {
            out.u.values[q] = a.u.values[q] + th * (b.u.values[q] - a.u.values[q]);
            out.v.values[q] = a.v.values[q] + th * (b.v.values[q] - a.v.values[q]);
            out.phi.values[q] = a.phi.values[q] + th * (b.phi.values[q] - a.phi.values[q]);
        }
        return out;
    }
};

// The frozen coefficient flow the linear solver linearizes around. Regime
// validation happens where Params are in scope (solver entry points check
// every sample).
using BackgroundFlow = StateSeries;

}  // namespace swerect
