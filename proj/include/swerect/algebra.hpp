#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "swerect/errors.hpp"
#include "swerect/state.hpp"

namespace swerect::algebra {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

inline Mat3 e1(double u, double /*v*/, double phi, double g) {
    Mat3 m;
    m << u, 0.0, g,
         0.0, u, 0.0,
         phi, 0.0, u;
    return m;
}

inline Mat3 e2(double /*u*/, double v, double phi, double g) {
    Mat3 m;
    m << v, 0.0, 0.0,
         0.0, v, g,
         0.0, phi, v;
    return m;
}

inline Mat3 symmetrizer(double phi, double g) {
    if (!(phi > 0.0)) {
        throw NonPositiveHeight("symmetrizer: phi must be positive");
    }
    Mat3 m = Mat3::Zero();
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 2) = g / phi;
    return m;
}

inline Mat3 e1_sym(double u, double /*v*/, double phi, double g) {
    if (!(phi > 0.0)) {
        throw NonPositiveHeight("e1_sym: phi must be positive");
    }
    const double c = std::sqrt(g * phi);
    Mat3 m;
    m << u, 0.0, c,
         0.0, u, 0.0,
         c, 0.0, u;
    return m;
}

inline Mat3 e2_sym(double /*u*/, double v, double phi, double g) {
    if (!(phi > 0.0)) {
        throw NonPositiveHeight("e2_sym: phi must be positive");
    }
    const double c = std::sqrt(g * phi);
    Mat3 m;
    m << v, 0.0, 0.0,
         0.0, v, c,
         0.0, c, v;
    return m;
}

// Pointwise regime check over a whole state. Margins are the amounts by which
// each inequality holds; ok means all are nonnegative.
struct SupercriticalReport {
    struct Entry {
        std::string_view name;
        double margin;
        int i;
        int j;
    };

    bool ok = false;
    bool strong = false;
    std::array<Entry, 8> entries{};
    double worst_margin = 0.0;
    std::string_view worst_name;
    int worst_i = 0;
    int worst_j = 0;
};

inline SupercriticalReport check_supercritical(const State& s, const Params& p,
                                               bool strong = false) {
    static constexpr std::array<std::string_view, 8> names = {
        "u_lower", "v_lower", "phi_lower", "u_upper",
        "v_upper", "phi_upper", "wave_x", "wave_y"};
    const Grid& g = s.grid();
    const double lo = strong ? 2.0 * p.c0 : p.c0;
    const double hi = strong ? 0.5 * p.c1 : p.c1;
    const double wave = strong ? 2.0 * p.c2 * p.c2 : p.c2 * p.c2;

    SupercriticalReport rep;
    rep.strong = strong;
    for (std::size_t e = 0; e < names.size(); ++e) {
        rep.entries[e] = {names[e], std::numeric_limits<double>::infinity(), 0, 0};
    }
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            const double u = s.u(i, j);
            const double v = s.v(i, j);
            const double phi = s.phi(i, j);
            const std::array<double, 8> m = {
                u - lo,  v - lo,  phi - lo, hi - u,
                hi - v,  hi - phi,
                u * u - p.g * phi - wave,
                v * v - p.g * phi - wave};
            for (std::size_t e = 0; e < m.size(); ++e) {
                if (m[e] < rep.entries[e].margin) {
                    rep.entries[e] = {names[e], m[e], i, j};
                }
            }
        }
    }
    rep.ok = true;
    rep.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& e : rep.entries) {
        if (e.margin < 0.0) rep.ok = false;
        if (e.margin < rep.worst_margin) {
            rep.worst_margin = e.margin;
            rep.worst_name = e.name;
            rep.worst_i = e.i;
            rep.worst_j = e.j;
        }
    }
    return rep;
}

// Characteristic data of the frozen-coefficient pair (E1^0, E2^0) at one
// supercritical point: eigenvalues of (E2^0)^-1 E1^0, the transform P, and
// the diagonal entries of P^T E1^0 P and P^T E2^0 P.
struct CharData {
    double kappa = 0.0;
    double kappa0 = 0.0;
    std::array<double, 3> lambdas{};
    std::array<double, 3> a{};
    std::array<double, 3> b{};
    Mat3 P;
    Mat3 Pinv;
};

inline void require_supercritical_point(double u, double v, double phi, double g,
                                        const char* where) {
    constexpr double margin = 1e-12;
    if (!(u > 0.0) || !(v > 0.0) || !(phi > 0.0) ||
        !(u * u - g * phi >= margin) || !(v * v - g * phi >= margin)) {
        throw NotSupercritical(std::string(where) + ": point is not supercritical");
    }
}

inline CharData char_data(double u, double v, double phi, double g) {
    require_supercritical_point(u, v, phi, g, "char_data");
    CharData cd;
    const double q2 = u * u + v * v;
    const double gphi = g * phi;
    const double c = std::sqrt(gphi);
    cd.kappa = std::sqrt(q2 - gphi);
    cd.kappa0 = std::sqrt(g * (q2 - gphi) / phi);
    const double dy = v * v - gphi;
    cd.lambdas = {(u * v + phi * cd.kappa0) / dy, (u * v - phi * cd.kappa0) / dy, u / v};

    cd.Pinv << v, -u, cd.kappa,
               v, -u, -cd.kappa,
               u, v, c;
    cd.P = cd.Pinv.inverse();

    const double den = 2.0 * q2 * cd.kappa;
    cd.a = {(u * cd.kappa + c * v) / den, (u * cd.kappa - c * v) / den, u / q2};
    cd.b = {(v * cd.kappa - c * u) / den, (v * cd.kappa + c * u) / den, v / q2};
    return cd;
}

// Characteristic variables Xi = P^-1 U together with the state the transform
// was built at, so the transform can be undone.
struct CharacteristicFields {
    State base;
    Field xi1, xi2, xi3;
};

inline CharacteristicFields to_characteristic(const State& s, const State& base,
                                              const Params& p) {
    require_same_grid(s.grid(), base.grid(), "to_characteristic");
    const Grid& g = s.grid();
    CharacteristicFields out{base, Field(g), Field(g), Field(g)};
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            const CharData cd = char_data(base.u(i, j), base.v(i, j), base.phi(i, j), p.g);
            const Vec3 U(s.u(i, j), s.v(i, j), s.phi(i, j));
            const Vec3 xi = cd.Pinv * U;
            out.xi1(i, j) = xi(0);
            out.xi2(i, j) = xi(1);
            out.xi3(i, j) = xi(2);
        }
    }
    return out;
}

inline CharacteristicFields to_characteristic(const State& s, const Params& p) {
    return to_characteristic(s, s, p);
}

inline State from_characteristic(const CharacteristicFields& cf, const Params& p) {
    const Grid& g = cf.base.grid();
    State out(g);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            const CharData cd =
                char_data(cf.base.u(i, j), cf.base.v(i, j), cf.base.phi(i, j), p.g);
            const Vec3 xi(cf.xi1(i, j), cf.xi2(i, j), cf.xi3(i, j));
            const Vec3 U = cd.P * xi;
            out.u(i, j) = U(0);
            out.v(i, j) = U(1);
            out.phi(i, j) = U(2);
        }
    }
    return out;
}

}  // namespace swerect::algebra
