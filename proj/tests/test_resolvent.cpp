#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "swerect/linear.hpp"
#include "swerect/norms.hpp"
#include "swerect/prep.hpp"
#include "swerect/scenarios.hpp"

using namespace swerect;

TEST_CASE("zero forcing yields the zero solution", "[resolvent]") {
    const Grid g = scenarios::desk_grid(17);
    Params p;
    const State bg = scenarios::uniform_state(g, 2.0, 2.0, 0.1);
    const State sol = linear::resolvent_solve(bg, State(g), 1.0, p);
    REQUIRE(l2_norm(sol) == 0.0);
}

TEST_CASE("resolvent input validation", "[resolvent]") {
    const Grid g = scenarios::desk_grid(17);
    Params p;
    const State bg = scenarios::uniform_state(g, 2.0, 2.0, 0.1);
    const State f = prep::compatible_bump(g, p.m, 0.1, {0.6, 0.6}, 0.25);

    REQUIRE_THROWS_AS(linear::resolvent_solve(bg, f, 0.0, p), NumericError);
    REQUIRE_THROWS_AS(linear::resolvent_solve(bg, f, -1.0, p), NumericError);
    const State sub = scenarios::uniform_state(g, 1.0, 1.0, 0.5);
    REQUIRE_THROWS_AS(linear::resolvent_solve(sub, f, 1.0, p), NotSupercritical);
    const State flat = scenarios::uniform_state(g, 0.2, 0.2, 0.2);
    REQUIRE_THROWS_AS(linear::resolvent_solve(bg, flat, 1.0, p), IncompatibleData);
    REQUIRE_THROWS_AS(linear::resolvent_solve(bg, State(Grid(1.0, 1.0, 9, 9)), 1.0, p),
                      GridMismatch);
}

TEST_CASE("solution is linear in the forcing and pinned on the inflow edges",
          "[resolvent]") {
    const Grid g = scenarios::desk_grid(17);
    Params p;
    const State bg = scenarios::uniform_state(g, 2.0, 2.0, 0.1);
    const State fa = prep::compatible_bump(g, p.m, 0.1, {0.6, 0.6}, 0.25);
    const State fb = prep::compatible_bump(g, p.m, 0.07, {0.7, 0.55}, 0.2);

    const State ua = linear::resolvent_solve(bg, fa, 2.0, p);
    const State ub = linear::resolvent_solve(bg, fb, 2.0, p);
    const State uc =
        linear::resolvent_solve(bg, add(scale(1.5, fa), scale(-0.25, fb)), 2.0, p);
    const State expect = add(scale(1.5, ua), scale(-0.25, ub));
    REQUIRE(l2_norm(sub(uc, expect)) < 1e-11 * (l2_norm(expect) + 1.0));

    for (int j = 0; j < g.ny; ++j) {
        REQUIRE(ua.u(0, j) == 0.0);
        REQUIRE(ua.v(0, j) == 0.0);
        REQUIRE(ua.phi(0, j) == 0.0);
    }
    for (int i = 0; i < g.nx; ++i) {
        REQUIRE(ua.u(i, 0) == 0.0);
        REQUIRE(ua.v(i, 0) == 0.0);
        REQUIRE(ua.phi(i, 0) == 0.0);
    }
}

TEST_CASE("manufactured resolvent solution is recovered to first order", "[resolvent]") {
    const auto mms = scenarios::mms_resolvent(33);
    const State sol =
        linear::resolvent_solve(mms.background, mms.forcing, mms.omega, mms.params);
    const double err = l2_norm(sub(sol, mms.shape));
    REQUIRE(err > 1e-4);
    REQUIRE(err < 0.1);
}

TEST_CASE("energy constant vanishes for constant backgrounds", "[resolvent]") {
    const Grid g = scenarios::desk_grid(17);
    Params p;
    // not an exact zero: the one-sided edge stencils leave a half-ulp of the
    // wave speed per weight, scaled by 1/dx
    REQUIRE(linear::resolvent_energy_constant(
                scenarios::uniform_state(g, 2.0, 2.0, 0.1), p) < 1e-13);
}

TEST_CASE("energy constant matches a direct eigenvalue computation", "[resolvent]") {
    const Grid g = scenarios::desk_grid(17);
    Params p;
    const State bg = scenarios::resolvent_bound_background(g);

    // oracle: both symmetrized transport matrices carry the velocity on the
    // whole diagonal, so Dx E1^0 + Dy E2^0 has d(u)/dx + d(v)/dy in every
    // diagonal slot and the wave-speed gradient off it
    Field c(g);
    for (int q = 0; q < g.size(); ++q) {
        c.values[static_cast<std::size_t>(q)] =
            std::sqrt(p.g * bg.phi.values[static_cast<std::size_t>(q)]);
    }
    const Field ux = deriv_x(bg.u, 1);
    const Field vy = deriv_y(bg.v, 1);
    const Field cx = deriv_x(c, 1);
    const Field cy = deriv_y(c, 1);
    double worst = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            const double d = ux(i, j) + vy(i, j);
            Eigen::Matrix3d m;
            m << d, 0.0, cx(i, j),
                 0.0, d, cy(i, j),
                 cx(i, j), cy(i, j), d;
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
            worst = std::max(worst, es.eigenvalues().maxCoeff());
        }
    }
    const double oracle = std::max(0.0, 0.5 * worst);
    REQUIRE(linear::resolvent_energy_constant(bg, p) ==
            Catch::Approx(oracle).epsilon(1e-12));
    REQUIRE(oracle > 0.0);
}

TEST_CASE("resolvent norm obeys the spectral-gap bound", "[resolvent]") {
    const Grid g = scenarios::desk_grid(33);
    Params p;
    const State bg = scenarios::resolvent_bound_background(g);
    const double omega_hat = linear::resolvent_energy_constant(bg, p);
    REQUIRE(omega_hat > 0.0);
    const double omega = 10.0 * omega_hat;
    const State f = scenarios::desk_bump(g, p, 0.2);
    const State sol = linear::resolvent_solve(bg, f, omega, p);
    const double ratio = l2_norm(sol) / (l2_norm(f) / (omega - omega_hat));
    REQUIRE(ratio < 1.1);
    REQUIRE(ratio > 0.0);
}

TEST_CASE("largest transport eigenvalue uses the closed form", "[resolvent]") {
    const Grid g = scenarios::desk_grid(9);
    Params p;
    const State bg = scenarios::uniform_state(g, 2.0, 2.0, 0.1);
    const auto cd = algebra::char_data(2.0, 2.0, 0.1, p.g);
    const double expect =
        std::max({cd.lambdas[0], cd.lambdas[1], cd.lambdas[2]});
    REQUIRE(linear::max_transport_eigenvalue(bg, p) ==
            Catch::Approx(expect).epsilon(1e-13));
}
