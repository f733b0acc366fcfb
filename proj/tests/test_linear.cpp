#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "swerect/linear.hpp"
#include "swerect/norms.hpp"
#include "swerect/prep.hpp"
#include "swerect/scenarios.hpp"

using namespace swerect;

namespace {

bool inflow_rows_zero(const State& s) {
    const Grid& g = s.grid();
    for (int c = 0; c < 3; ++c) {
        const Field& f = s.component(c);
        for (int j = 0; j < g.ny; ++j) {
            if (f(0, j) != 0.0) return false;
        }
        for (int i = 0; i < g.nx; ++i) {
            if (f(i, 0) != 0.0) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("step bound follows the fastest signal in each direction", "[linear]") {
    const Grid g(1.0, 1.0, 33, 17);
    Params p;
    const State bg = scenarios::uniform_state(g, 2.0, 2.0, 0.1);
    const double c = std::sqrt(p.g * 0.1);
    const double expected = 0.45 * std::min(g.dx / (2.0 + c), g.dy / (2.0 + c));
    REQUIRE(linear::cfl_dt(bg, p, 0.45) == Catch::Approx(expected).epsilon(1e-14));

    const State bad = scenarios::uniform_state(g, 1.0, 1.0, 0.5);
    REQUIRE_THROWS_AS(linear::cfl_dt(bad, p, 0.45), NotSupercritical);
}

TEST_CASE("single step validation and boundary handling", "[linear]") {
    const Grid g = scenarios::desk_grid(17);
    Params p;
    const State bg = scenarios::uniform_state(g, 2.0, 2.0, 0.1);
    const State zero(g);
    const double dt = linear::cfl_dt(bg, p, 0.45);

    const State out = linear::linear_step(zero, bg, zero, dt, p);
    REQUIRE(l2_norm(out) == 0.0);

    const State bump = prep::compatible_bump(g, p.m, 0.05, {0.6, 0.6}, 0.25);
    const State stepped = linear::linear_step(bump, bg, zero, dt, p);
    REQUIRE(inflow_rows_zero(stepped));
    REQUIRE(l2_norm(stepped) > 0.0);

    REQUIRE_THROWS_AS(linear::linear_step(bump, bg, zero, -dt, p), NumericError);
    REQUIRE_THROWS_AS(
        linear::linear_step(bump, bg, zero, linear::cfl_dt(bg, p, 1.0) * 1.01, p),
        UnstableStep);
    const State sub = scenarios::uniform_state(g, 1.0, 1.0, 0.5);
    REQUIRE_THROWS_AS(linear::linear_step(bump, sub, zero, dt, p), NotSupercritical);
    const Grid other(1.0, 1.0, 9, 9);
    REQUIRE_THROWS_AS(linear::linear_step(bump, bg, State(other), dt, p), GridMismatch);
}

TEST_CASE("single step is linear in the state and affine in the forcing", "[linear]") {
    const Grid g = scenarios::desk_grid(17);
    Params p;
    const State bg = scenarios::uniform_state(g, 2.0, 2.0, 0.1);
    const State zero(g);
    const double dt = linear::cfl_dt(bg, p, 0.45);

    const State a = prep::compatible_bump(g, p.m, 0.05, {0.6, 0.6}, 0.25);
    const State b = prep::compatible_bump(g, p.m, 0.03, {0.7, 0.55}, 0.2);
    const State combo = add(scale(2.0, a), scale(-0.5, b));
    const State lhs = linear::linear_step(combo, bg, zero, dt, p);
    const State rhs = add(scale(2.0, linear::linear_step(a, bg, zero, dt, p)),
                          scale(-0.5, linear::linear_step(b, bg, zero, dt, p)));
    REQUIRE(l2_norm(sub(lhs, rhs)) < 1e-12 * (l2_norm(lhs) + 1.0));

    // response to forcing superposes once the homogeneous part is removed
    const State base = linear::linear_step(a, bg, zero, dt, p);
    const State fa = linear::linear_step(a, bg, b, dt, p);
    const State fb = linear::linear_step(a, bg, scale(3.0, b), dt, p);
    const State da = sub(fa, base);
    const State db = sub(fb, base);
    REQUIRE(l2_norm(sub(db, scale(3.0, da))) < 1e-12 * (l2_norm(db) + 1.0));
}

TEST_CASE("time grid is uniform and lands on the samples", "[linear]") {
    auto prob = scenarios::energy_constant(17);
    prob.sample_count = 9;
    const auto t = linear::time_grid(prob);
    REQUIRE(t.front() == 0.0);
    REQUIRE(t.back() == Catch::Approx(prob.t_end).epsilon(1e-14));
    REQUIRE((t.size() - 1) % 8 == 0);
    const double dt = t[1] - t[0];
    for (std::size_t n = 1; n < t.size(); ++n) {
        REQUIRE(t[n] - t[n - 1] == Catch::Approx(dt).epsilon(1e-12));
    }
    REQUIRE(dt <= linear::cfl_dt(prob.background.states[0], prob.params, prob.cfl));
}

TEST_CASE("zero data stays zero with a zero growth constant", "[linear]") {
    auto prob = scenarios::energy_constant(17);
    prob.initial = State(prob.initial.grid());
    const auto sol = linear::solve_linear(prob);
    REQUIRE(sol.trajectory.size() == static_cast<std::size_t>(prob.sample_count));
    for (const State& s : sol.trajectory) REQUIRE(l2_norm(s) == 0.0);
    REQUIRE(sol.energy.fitted_r1 == 0.0);
    REQUIRE(sol.energy.bound_ok);
}

TEST_CASE("frozen coefficients without forcing dissipate the energy", "[linear]") {
    const auto sol = linear::solve_linear(scenarios::energy_constant(17));
    const auto& I0 = sol.energy.I0;
    REQUIRE(I0.size() >= 2);
    REQUIRE(I0[0] > 0.0);
    for (std::size_t n = 1; n < I0.size(); ++n) {
        REQUIRE(I0[n] <= I0[n - 1] * (1.0 + 1e-12));
    }
    REQUIRE(sol.energy.bound_ok);
    REQUIRE(sol.energy.fitted_r1 == 0.0);
    for (char ok : sol.energy.bound_ok_at) REQUIRE(ok == 1);
}

TEST_CASE("weighted energy dominates the plain norm", "[linear]") {
    const auto sol = linear::solve_linear(scenarios::energy_constant(17));
    // S0 weights are (1, 1, g/phi_hat) with g/phi_hat = 98, so
    // l2^2 <= I0 <= 98 * l2^2
    for (std::size_t n = 0; n < sol.energy.I0.size(); ++n) {
        const double l2sq = sol.energy.l2[n] * sol.energy.l2[n];
        REQUIRE(sol.energy.I0[n] >= l2sq * (1.0 - 1e-12));
        REQUIRE(sol.energy.I0[n] <= 98.0 * l2sq * (1.0 + 1e-12));
    }
}

TEST_CASE("trajectory scales with the initial data", "[linear]") {
    auto prob = scenarios::energy_constant(17);
    const auto sol1 = linear::solve_linear(prob);
    prob.initial = scale(2.0, prob.initial);
    const auto sol2 = linear::solve_linear(prob);
    REQUIRE(sol1.trajectory.size() == sol2.trajectory.size());
    for (std::size_t s = 0; s < sol1.trajectory.size(); ++s) {
        const State diff = sub(sol2.trajectory[s], scale(2.0, sol1.trajectory[s]));
        REQUIRE(l2_norm(diff) < 1e-12 * (l2_norm(sol2.trajectory[s]) + 1.0));
    }
}

TEST_CASE("every emitted sample respects the inflow boundary", "[linear]") {
    for (auto& prob : scenarios::energy_suite(17)) {
        const auto sol = linear::solve_linear(prob);
        REQUIRE(sol.trajectory.size() == static_cast<std::size_t>(prob.sample_count));
        for (const State& s : sol.trajectory) REQUIRE(inflow_rows_zero(s));
        REQUIRE(sol.energy.bound_ok);
    }
}

TEST_CASE("problem validation rejects unusable inputs", "[linear]") {
    const Grid g = scenarios::desk_grid(17);
    Params p;

    auto prob = scenarios::energy_varying(17);
    prob.background.times = {0.0, 0.2};
    REQUIRE_THROWS_AS(linear::solve_linear(prob), BackgroundTooShort);

    prob = scenarios::energy_varying(17);
    prob.background.states[1] = scenarios::uniform_state(g, 1.0, 1.0, 0.5);
    REQUIRE_THROWS_AS(linear::solve_linear(prob), NotSupercritical);

    prob = scenarios::energy_constant(17);
    prob.initial = scenarios::uniform_state(g, 0.1, 0.1, 0.1);
    REQUIRE_THROWS_AS(linear::solve_linear(prob), IncompatibleData);

    prob = scenarios::energy_constant(17);
    StateSeries bad;
    bad.times = {0.0, prob.t_end};
    bad.states = {scenarios::uniform_state(g, 0.1, 0.1, 0.1), State(g)};
    prob.forcing = std::move(bad);
    REQUIRE_THROWS_AS(linear::solve_linear(prob), IncompatibleData);

    prob = scenarios::energy_constant(17);
    prob.dt_override =
        linear::cfl_dt(prob.background.states[0], p, prob.cfl) * 2.0;
    REQUIRE_THROWS_AS(linear::solve_linear(prob), UnstableStep);

    prob = scenarios::energy_constant(17);
    prob.t_end = -1.0;
    REQUIRE_THROWS_AS(linear::solve_linear(prob), NumericError);

    prob = scenarios::energy_constant(17);
    prob.sample_count = 1;
    REQUIRE_THROWS_AS(linear::solve_linear(prob), NumericError);
}

TEST_CASE("growth constant fit recovers a known exponential", "[linear]") {
    linear::EnergyReport rep;
    rep.times = {0.0, 0.5, 1.0};
    rep.I0 = {1.0, std::exp(0.25), std::exp(0.5)};
    rep.forcing_sq = {0.0, 0.0, 0.0};
    linear::detail::fit_growth_constant(rep);
    REQUIRE(rep.bound_ok);
    REQUIRE(rep.fitted_r1 == Catch::Approx(0.5).margin(1e-6));

    linear::EnergyReport flat;
    flat.times = {0.0, 0.5, 1.0};
    flat.I0 = {1.0, 1.0, 1.0};
    flat.forcing_sq = {0.0, 0.0, 0.0};
    linear::detail::fit_growth_constant(flat);
    REQUIRE(flat.bound_ok);
    REQUIRE(flat.fitted_r1 == 0.0);

    linear::EnergyReport down;
    down.times = {0.0, 0.5, 1.0};
    down.I0 = {1.0, 0.8, 0.7};
    down.forcing_sq = {0.0, 0.0, 0.0};
    linear::detail::fit_growth_constant(down);
    REQUIRE(down.bound_ok);
    REQUIRE(down.fitted_r1 == 0.0);
}

TEST_CASE("manufactured solution error is small but nonzero", "[linear]") {
    const auto mms = scenarios::mms_linear(33);
    const auto sol = linear::solve_linear(mms.problem);
    const double err = mms.trajectory_error(sol);
    REQUIRE(err > 1e-4);
    REQUIRE(err < 0.1);
}

TEST_CASE("convergence report orders", "[linear]") {
    const auto rep = linear::make_convergence_report({0.1, 0.05, 0.025},
                                                     {4e-2, 1e-2, 2.5e-3});
    REQUIRE(rep.h.size() == 3);
    REQUIRE(std::isnan(rep.order[0]));
    REQUIRE(rep.order[1] == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE(rep.order[2] == Catch::Approx(2.0).epsilon(1e-12));
    REQUIRE_THROWS_AS(linear::make_convergence_report({0.1}, {1.0, 2.0}), NumericError);
}
