#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "swerect/algebra.hpp"
#include "swerect/prep.hpp"
#include "swerect/state.hpp"

using namespace swerect;
using algebra::Mat3;

namespace {

struct Point {
    double u, v, phi;
};

// random points with both wave margins at least c2^2 and phi bounded away
// from zero so the eigenvalue gaps stay resolvable
std::vector<Point> sample_points(int count, unsigned seed, double gconst, double c2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> vel(1.0, 5.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(count));
    while (static_cast<int>(pts.size()) < count) {
        const double u = vel(rng);
        const double v = vel(rng);
        const double hi = (std::min(u, v) * std::min(u, v) - c2 * c2) / gconst;
        if (hi <= 2e-3) continue;
        const double phi = 1e-3 + (hi - 1e-3) * unit(rng);
        pts.push_back({u, v, phi});
    }
    return pts;
}

}  // namespace

TEST_CASE("flux matrices are the quasilinear coefficients", "[algebra]") {
    const double g = 9.8;
    const Mat3 m1 = algebra::e1(2.0, 3.0, 0.1, g);
    REQUIRE(m1(0, 0) == 2.0);
    REQUIRE(m1(0, 2) == g);
    REQUIRE(m1(1, 1) == 2.0);
    REQUIRE(m1(2, 0) == 0.1);
    REQUIRE(m1(2, 2) == 2.0);
    REQUIRE(m1(0, 1) == 0.0);
    REQUIRE(m1(1, 0) == 0.0);
    REQUIRE(m1(1, 2) == 0.0);
    REQUIRE(m1(2, 1) == 0.0);

    const Mat3 m2 = algebra::e2(2.0, 3.0, 0.1, g);
    REQUIRE(m2(0, 0) == 3.0);
    REQUIRE(m2(1, 2) == g);
    REQUIRE(m2(2, 1) == 0.1);
    REQUIRE(m2(2, 2) == 3.0);
}

TEST_CASE("symmetrizer makes both fluxes symmetric", "[algebra]") {
    const double g = 9.8;
    for (const auto& pt : sample_points(200, 77, g, 1.0)) {
        const Mat3 s0 = algebra::symmetrizer(pt.phi, g);
        REQUIRE(s0(0, 0) == 1.0);
        REQUIRE(s0(1, 1) == 1.0);
        REQUIRE(s0(2, 2) == Catch::Approx(g / pt.phi).epsilon(1e-14));
        const Mat3 a = s0 * algebra::e1(pt.u, pt.v, pt.phi, g);
        const Mat3 b = s0 * algebra::e2(pt.u, pt.v, pt.phi, g);
        REQUIRE((a - a.transpose()).norm() < 1e-10 * a.norm());
        REQUIRE((b - b.transpose()).norm() < 1e-10 * b.norm());
    }
    REQUIRE_THROWS_AS(algebra::symmetrizer(0.0, g), NonPositiveHeight);
    REQUIRE_THROWS_AS(algebra::symmetrizer(-1.0, g), NonPositiveHeight);
}

TEST_CASE("symmetrized fluxes conjugate to the plain ones", "[algebra]") {
    const double g = 9.8;
    const double u = 2.0, v = 2.2, phi = 0.12;
    Mat3 shalf = Mat3::Zero();
    shalf(0, 0) = 1.0;
    shalf(1, 1) = 1.0;
    shalf(2, 2) = std::sqrt(g / phi);
    const Mat3 expected1 = shalf * algebra::e1(u, v, phi, g) * shalf.inverse();
    const Mat3 expected2 = shalf * algebra::e2(u, v, phi, g) * shalf.inverse();
    REQUIRE((algebra::e1_sym(u, v, phi, g) - expected1).norm() < 1e-12);
    REQUIRE((algebra::e2_sym(u, v, phi, g) - expected2).norm() < 1e-12);
}

TEST_CASE("symmetrized fluxes are positive definite in the supercritical regime",
          "[algebra]") {
    const double g = 9.8;
    for (const auto& pt : sample_points(500, 99, g, 1.0)) {
        const double c = std::sqrt(g * pt.phi);
        for (const Mat3& m : {algebra::e1_sym(pt.u, pt.v, pt.phi, g),
                              algebra::e2_sym(pt.u, pt.v, pt.phi, g)}) {
            Eigen::SelfAdjointEigenSolver<Mat3> es(m);
            REQUIRE(es.eigenvalues().minCoeff() > 0.0);
            REQUIRE(es.eigenvalues().minCoeff() >= std::min(pt.u, pt.v) - c - 1e-10);
        }
    }
}

TEST_CASE("characteristic speeds match the generalized eigenproblem", "[algebra]") {
    const double g = 9.8;
    for (const auto& pt : sample_points(500, 4242, g, 1.0)) {
        const auto cd = algebra::char_data(pt.u, pt.v, pt.phi, g);

        const Mat3 m1 = algebra::e1(pt.u, pt.v, pt.phi, g);
        const Mat3 m2 = algebra::e2(pt.u, pt.v, pt.phi, g);
        Eigen::GeneralizedEigenSolver<Mat3> ges(m1, m2, true);
        std::array<double, 3> oracle{};
        for (int k = 0; k < 3; ++k) {
            REQUIRE(std::fabs(ges.betas()(k)) > 1e-12);
            oracle[static_cast<std::size_t>(k)] =
                ges.alphas()(k).real() / ges.betas()(k);
            REQUIRE(std::fabs(ges.alphas()(k).imag()) < 1e-9);
        }
        std::array<double, 3> mine = cd.lambdas;
        std::sort(oracle.begin(), oracle.end());
        std::sort(mine.begin(), mine.end());
        for (int k = 0; k < 3; ++k) {
            const std::size_t kk = static_cast<std::size_t>(k);
            REQUIRE(std::fabs(mine[kk] - oracle[kk]) <=
                    1e-9 * std::max(1.0, std::fabs(mine[kk])));
        }
    }
}

TEST_CASE("characteristic transform diagonalizes both symmetrized fluxes", "[algebra]") {
    const double g = 9.8;
    double worst = 0.0;
    for (const auto& pt : sample_points(500, 31337, g, 1.0)) {
        const auto cd = algebra::char_data(pt.u, pt.v, pt.phi, g);
        const Mat3 m1 = algebra::e1_sym(pt.u, pt.v, pt.phi, g);
        const Mat3 m2 = algebra::e2_sym(pt.u, pt.v, pt.phi, g);
        Mat3 da = Mat3::Zero();
        Mat3 db = Mat3::Zero();
        for (int k = 0; k < 3; ++k) {
            da(k, k) = cd.a[static_cast<std::size_t>(k)];
            db(k, k) = cd.b[static_cast<std::size_t>(k)];
        }
        const double err = (cd.P.transpose() * m1 * cd.P - da).norm() +
                           (cd.P.transpose() * m2 * cd.P - db).norm();
        worst = std::max(worst, err);
    }
    REQUIRE(worst < 1e-9);
}

TEST_CASE("transport ratios are consistent with the speeds", "[algebra]") {
    // the pencil eigenvalues are the ratios of the diagonalized fluxes
    const double g = 9.8;
    for (const auto& pt : sample_points(200, 8, g, 1.0)) {
        const auto cd = algebra::char_data(pt.u, pt.v, pt.phi, g);
        for (std::size_t k = 0; k < 3; ++k) {
            REQUIRE(cd.a[k] / cd.b[k] == Catch::Approx(cd.lambdas[k]).epsilon(1e-9));
        }
    }
}

TEST_CASE("subcritical points are rejected", "[algebra]") {
    const double g = 9.8;
    REQUIRE_THROWS_AS(algebra::char_data(1.0, 1.0, 0.5, g), NotSupercritical);
    REQUIRE_THROWS_AS(algebra::char_data(2.0, 0.5, 0.1, g), NotSupercritical);
    REQUIRE_THROWS_AS(algebra::char_data(2.0, 2.0, -0.1, g), NotSupercritical);
}

TEST_CASE("supercriticality report margins", "[algebra]") {
    const Grid g(1.0, 1.0, 9, 9);
    Params p;
    State s(g);
    s.u.fill(2.0);
    s.v.fill(2.0);
    s.phi.fill(0.1);

    const auto rep = algebra::check_supercritical(s, p, false);
    REQUIRE(rep.ok);
    double wave_x = 0.0, u_lower = 0.0, phi_upper = 0.0;
    for (const auto& e : rep.entries) {
        if (e.name == "wave_x") wave_x = e.margin;
        if (e.name == "u_lower") u_lower = e.margin;
        if (e.name == "phi_upper") phi_upper = e.margin;
    }
    REQUIRE(wave_x == Catch::Approx(4.0 - 0.98 - 1.0).epsilon(1e-12));
    REQUIRE(u_lower == Catch::Approx(2.0 - 0.04).epsilon(1e-12));
    REQUIRE(phi_upper == Catch::Approx(5.0 - 0.1).epsilon(1e-12));
    REQUIRE(algebra::check_supercritical(s, p, true).ok);

    // fails the strong bounds but still passes the plain ones
    s.u.fill(2.6);
    REQUIRE(!algebra::check_supercritical(s, p, true).ok);
    REQUIRE(algebra::check_supercritical(s, p, false).ok);

    // subcritical in y
    s.u.fill(2.0);
    s.v.fill(0.9);
    const auto rep3 = algebra::check_supercritical(s, p, false);
    REQUIRE(!rep3.ok);
    REQUIRE(rep3.worst_name == "wave_y");
    REQUIRE(rep3.worst_margin < 0.0);
}

TEST_CASE("characteristic field round trip", "[algebra]") {
    const Grid g(1.0, 1.0, 17, 17);
    Params p;
    State base(g);
    base.u.fill(2.0);
    base.v.fill(2.1);
    base.phi.fill(0.11);

    State s = prep::compatible_bump(g, p.m, 0.03, {0.6, 0.6}, 0.25);
    const auto cf = algebra::to_characteristic(s, base, p);
    const State back = algebra::from_characteristic(cf, p);
    REQUIRE(l2_norm(sub(back, s)) < 1e-12 * (l2_norm(s) + 1.0));

    // zero state maps to zero characteristic data
    const State zero(g);
    const auto cf0 = algebra::to_characteristic(zero, base, p);
    REQUIRE(cf0.xi1.finite());
    double m = 0.0;
    for (double v : cf0.xi1.values) m = std::max(m, std::fabs(v));
    for (double v : cf0.xi2.values) m = std::max(m, std::fabs(v));
    for (double v : cf0.xi3.values) m = std::max(m, std::fabs(v));
    REQUIRE(m == 0.0);

    // self-based transform of a supercritical state round-trips as well
    State sc(g);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            sc.u(i, j) = 2.0 + 0.1 * g.x(i);
            sc.v(i, j) = 2.1 - 0.05 * g.y(j);
            sc.phi(i, j) = 0.1 + 0.02 * g.x(i) * g.y(j);
        }
    }
    const auto cfs = algebra::to_characteristic(sc, p);
    const State back2 = algebra::from_characteristic(cfs, p);
    REQUIRE(l2_norm(sub(back2, sc)) < 1e-11 * l2_norm(sc));
}
