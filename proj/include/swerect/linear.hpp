#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "swerect/algebra.hpp"
#include "swerect/errors.hpp"
#include "swerect/fd.hpp"
#include "swerect/norms.hpp"
#include "swerect/prep.hpp"
#include "swerect/state.hpp"
#include "swerect/threads.hpp"

namespace swerect::linear {

inline constexpr double kCompatibilityGate = 1e-6;

// Stability limit of the explicit upwind step for one frozen background
// sample: dt = cfl * min(dx / max(u + sqrt(g phi)), dy / max(v + sqrt(g phi))).
inline double cfl_dt(const State& bg, const Params& p, double cfl) {
    const Grid& g = bg.grid();
    double su = 0.0;
    double sv = 0.0;
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double u = bg.u.values[k];
        const double v = bg.v.values[k];
        const double phi = bg.phi.values[k];
        algebra::require_supercritical_point(u, v, phi, p.g, "cfl_dt");
        const double c = std::sqrt(p.g * phi);
        su = std::max(su, u + c);
        sv = std::max(sv, v + c);
    }
    return cfl * std::min(g.dx / su, g.dy / sv);
}

namespace detail {

// Frozen coefficients of the symmetrized system at one time instant:
// W_t + E1^0 W_x + E2^0 W_y + B W + l(W) = S0^(1/2) F, where W = S0^(1/2) U,
// B couples only through the third component of W.
struct StageCoeffs {
    Field u, v, c;        // background velocities and wave speed sqrt(g phi)
    Field bx, by, bt;     // B-term multipliers of W_phi per equation
};

// phi_slope: time derivative of the interpolated background height, or null
// for a frozen background.
inline StageCoeffs make_stage(const State& bg, const Field* phi_slope, const Params& p) {
    const Grid& g = bg.grid();
    StageCoeffs sc{bg.u, bg.v, Field(g), Field(g), Field(g), Field(g)};
    Field sm(g);
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double phi = bg.phi.values[k];
        if (!(phi > 0.0)) {
            throw NonPositiveHeight("linear solver: background height must be positive");
        }
        sc.c.values[k] = std::sqrt(p.g * phi);
        sm.values[k] = std::sqrt(phi / p.g);
    }
    const Field smx = deriv_x(sm, 1);
    const Field smy = deriv_y(sm, 1);
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double s = p.g / sc.c.values[k];  // sqrt(g / phi)
        const double smt =
            phi_slope ? phi_slope->values[k] / (2.0 * sc.c.values[k]) : 0.0;
        sc.bx.values[k] = p.g * smx.values[k];
        sc.by.values[k] = p.g * smy.values[k];
        sc.bt.values[k] = s * (smt + bg.u.values[k] * smx.values[k] +
                               bg.v.values[k] * smy.values[k]);
    }
    return sc;
}

struct SymState {
    Field w0, w1, w2;

    SymState() = default;
    explicit SymState(const Grid& g) : w0(g), w1(g), w2(g) {}
};

inline SymState to_sym(const State& s, const StageCoeffs& sc, const Params& p) {
    SymState w(s.grid());
    const int n = s.grid().size();
    for (int q = 0; q < n; ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double scale = p.g / sc.c.values[k];  // sqrt(g/phi)
        w.w0.values[k] = s.u.values[k];
        w.w1.values[k] = s.v.values[k];
        w.w2.values[k] = scale * s.phi.values[k];
    }
    return w;
}

inline State from_sym(const SymState& w, const StageCoeffs& sc, const Params& p) {
    State s(w.w0.grid);
    const int n = w.w0.grid.size();
    for (int q = 0; q < n; ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double sm = sc.c.values[k] / p.g;  // sqrt(phi/g)
        s.u.values[k] = w.w0.values[k];
        s.v.values[k] = w.w1.values[k];
        s.phi.values[k] = sm * w.w2.values[k];
    }
    return s;
}

inline void zero_inflow(SymState& w) {
    const Grid& g = w.w0.grid;
    for (int i = 0; i < g.nx; ++i) {
        w.w0(i, 0) = 0.0;
        w.w1(i, 0) = 0.0;
        w.w2(i, 0) = 0.0;
    }
    for (int j = 0; j < g.ny; ++j) {
        w.w0(0, j) = 0.0;
        w.w1(0, j) = 0.0;
        w.w2(0, j) = 0.0;
    }
}

// out = S0^(1/2)F - E1^0 D-x W - E2^0 D-y W - B W - l(W) on the non-inflow
// nodes; inflow rows stay zero.
inline void sym_rhs(const SymState& w, const StageCoeffs& sc, const SymState* fsym,
                    double fcor, SymState& out) {
    const Grid& g = w.w0.grid;
    const int ny = g.ny;
    const double inv_dx = 1.0 / g.dx;
    const double inv_dy = 1.0 / g.dy;
    const double* W0 = w.w0.data();
    const double* W1 = w.w1.data();
    const double* W2 = w.w2.data();
    const double* CU = sc.u.data();
    const double* CV = sc.v.data();
    const double* CC = sc.c.data();
    const double* BX = sc.bx.data();
    const double* BY = sc.by.data();
    const double* BT = sc.bt.data();
    double* O0 = out.w0.data();
    double* O1 = out.w1.data();
    double* O2 = out.w2.data();
    for (int j = 0; j < ny; ++j) {
        O0[j] = 0.0;
        O1[j] = 0.0;
        O2[j] = 0.0;
    }
    parallel_for(1, g.nx, [&](std::ptrdiff_t i) {
        const int base = static_cast<int>(i) * ny;
        O0[base] = 0.0;
        O1[base] = 0.0;
        O2[base] = 0.0;
        for (int j = 1; j < ny; ++j) {
            const int q = base + j;
            const double dx0 = (W0[q] - W0[q - ny]) * inv_dx;
            const double dx1 = (W1[q] - W1[q - ny]) * inv_dx;
            const double dx2 = (W2[q] - W2[q - ny]) * inv_dx;
            const double dy0 = (W0[q] - W0[q - 1]) * inv_dy;
            const double dy1 = (W1[q] - W1[q - 1]) * inv_dy;
            const double dy2 = (W2[q] - W2[q - 1]) * inv_dy;
            const double u = CU[q];
            const double v = CV[q];
            const double c = CC[q];
            double r0 = -(u * dx0 + c * dx2) - v * dy0 - BX[q] * W2[q] + fcor * W1[q];
            double r1 = -u * dx1 - (v * dy1 + c * dy2) - BY[q] * W2[q] - fcor * W0[q];
            double r2 = -(c * dx0 + u * dx2) - (c * dy1 + v * dy2) - BT[q] * W2[q];
            if (fsym) {
                r0 += fsym->w0.data()[q];
                r1 += fsym->w1.data()[q];
                r2 += fsym->w2.data()[q];
            }
            O0[q] = r0;
            O1[q] = r1;
            O2[q] = r2;
        }
    });
}

inline SymState forcing_to_sym(const State& f, const StageCoeffs& sc, const Params& p) {
    return to_sym(f, sc, p);
}

// Two-stage (Heun) update of the symmetrized state. Stage data may differ
// between the stages when the background varies in time.
inline void heun_step(SymState& w, double dt, const StageCoeffs& c1, const SymState* f1,
                      const StageCoeffs& c2, const SymState* f2, double fcor,
                      SymState& k1, SymState& k2, SymState& wstar) {
    const int n = w.w0.grid.size();
    sym_rhs(w, c1, f1, fcor, k1);
    for (int q = 0; q < n; ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        wstar.w0.values[k] = w.w0.values[k] + dt * k1.w0.values[k];
        wstar.w1.values[k] = w.w1.values[k] + dt * k1.w1.values[k];
        wstar.w2.values[k] = w.w2.values[k] + dt * k1.w2.values[k];
    }
    sym_rhs(wstar, c2, f2, fcor, k2);
    const double half = 0.5 * dt;
    for (int q = 0; q < n; ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        w.w0.values[k] += half * (k1.w0.values[k] + k2.w0.values[k]);
        w.w1.values[k] += half * (k1.w1.values[k] + k2.w1.values[k]);
        w.w2.values[k] += half * (k1.w2.values[k] + k2.w2.values[k]);
    }
}

inline double sym_l2_sq(const SymState& w) {
    return l2_sq(w.w0) + l2_sq(w.w1) + l2_sq(w.w2);
}

}  // namespace detail

// One explicit two-stage upwind step of the frozen-coefficient system
// U_t + E1(bg) U_x + E2(bg) U_y + l(U) = F with U = 0 on the inflow edges.
inline State linear_step(const State& U, const State& bg, const State& F, double dt,
                         const Params& p) {
    require_same_grid(U.grid(), bg.grid(), "linear_step");
    require_same_grid(U.grid(), F.grid(), "linear_step");
    p.validate();
    if (!(dt > 0.0)) throw NumericError("linear_step: dt must be positive");
    const double bound = cfl_dt(bg, p, 1.0);
    if (dt > bound * (1.0 + 1e-12)) {
        throw UnstableStep("linear_step: dt " + std::to_string(dt) +
                           " exceeds the stability limit " + std::to_string(bound));
    }
    const auto rep = algebra::check_supercritical(bg, p, false);
    if (!rep.ok) {
        throw NotSupercritical(std::string("linear_step: background fails ") +
                               std::string(rep.worst_name));
    }

    const auto sc = detail::make_stage(bg, nullptr, p);
    detail::SymState w = detail::to_sym(U, sc, p);
    detail::zero_inflow(w);
    const detail::SymState fsym = detail::forcing_to_sym(F, sc, p);
    detail::SymState k1(U.grid()), k2(U.grid()), wstar(U.grid());
    detail::heun_step(w, dt, sc, &fsym, sc, &fsym, p.f, k1, k2, wstar);
    detail::zero_inflow(w);
    return detail::from_sym(w, sc, p);
}

// Discrete energy record of a linear run: I0 = <S0 U, U> per step, plain L2
// norms, and the fitted growth constant of the Gronwall envelope.
struct EnergyReport {
    std::vector<double> times;
    std::vector<double> I0;
    std::vector<double> l2;
    std::vector<double> forcing_sq;  // squared S0-weighted forcing norm per step
    std::vector<char> bound_ok_at;
    double fitted_r1 = 0.0;
    bool bound_ok = true;
};

namespace detail {

inline bool gronwall_holds(const std::vector<double>& t, const std::vector<double>& I0,
                           const std::vector<double>& fsq, double r1,
                           std::vector<char>* flags) {
    double imax = I0.empty() ? 0.0 : I0[0];
    for (double v : I0) imax = std::max(imax, v);
    const double slack = 1e-12 * (I0.empty() ? 0.0 : I0[0] + imax) + 1e-300;
    bool all = true;
    double integral = 0.0;
    if (flags) flags->assign(t.size(), 1);
    for (std::size_t n = 0; n < t.size(); ++n) {
        if (n > 0) {
            integral += 0.5 * (t[n] - t[n - 1]) * (fsq[n] + fsq[n - 1]);
        }
        const double bound = std::exp(r1 * (t[n] - t[0])) * (I0[0] + r1 * integral) + slack;
        const bool ok = I0[n] <= bound;
        if (!ok) {
            all = false;
            if (flags) (*flags)[n] = 0;
        }
    }
    return all;
}

// Smallest admissible growth constant: start from the per-step ratio bound,
// expand and bisect until the discrete Gronwall inequality holds everywhere.
inline void fit_growth_constant(EnergyReport& rep) {
    const auto& t = rep.times;
    const auto& I0 = rep.I0;
    const auto& fsq = rep.forcing_sq;
    double r = 0.0;
    for (std::size_t n = 0; n + 1 < t.size(); ++n) {
        const double dt = t[n + 1] - t[n];
        const double den = I0[n + 1] + I0[n] + fsq[n + 1] + fsq[n];
        if (den > 1e-300) {
            r = std::max(r, 2.0 * (I0[n + 1] - I0[n]) / (dt * den));
        }
    }
    if (gronwall_holds(t, I0, fsq, r, nullptr)) {
        rep.fitted_r1 = r;
        rep.bound_ok = true;
        gronwall_holds(t, I0, fsq, r, &rep.bound_ok_at);
        return;
    }
    double lo = r;
    double hi = std::max(2.0 * r, 1e-9);
    int guard = 0;
    while (!gronwall_holds(t, I0, fsq, hi, nullptr) && guard++ < 80) hi *= 2.0;
    if (!gronwall_holds(t, I0, fsq, hi, nullptr)) {
        rep.fitted_r1 = r;
        rep.bound_ok = false;
        gronwall_holds(t, I0, fsq, r, &rep.bound_ok_at);
        return;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gronwall_holds(t, I0, fsq, mid, nullptr)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    rep.fitted_r1 = hi;
    rep.bound_ok = true;
    gronwall_holds(t, I0, fsq, hi, &rep.bound_ok_at);
}

}  // namespace detail

struct LinearProblem {
    BackgroundFlow background;
    State initial;
    std::optional<StateSeries> forcing;
    Params params;
    double t_end = 0.0;
    double cfl = 0.45;
    int sample_count = 33;
    double dt_override = 0.0;  // 0 = derive the step from the CFL bound
};

struct LinearSolution {
    std::vector<double> sample_times;
    std::vector<State> trajectory;
    EnergyReport energy;
};

namespace detail {

inline void validate_problem(const LinearProblem& prob) {
    prob.params.validate();
    prob.background.validate();
    if (!(prob.t_end > 0.0)) throw NumericError("solve_linear: t_end must be positive");
    if (!(prob.cfl > 0.0 && prob.cfl <= 1.0)) {
        throw NumericError("solve_linear: cfl must lie in (0, 1]");
    }
    if (prob.sample_count < 2) throw NumericError("solve_linear: need at least 2 samples");
    require_same_grid(prob.initial.grid(), prob.background.grid(), "solve_linear");
    if (!prob.background.single() &&
        prob.background.t_back() < prob.t_end * (1.0 - 1e-12)) {
        throw BackgroundTooShort("solve_linear: background samples end before t_end");
    }
    for (const State& s : prob.background.states) {
        const auto rep = algebra::check_supercritical(s, prob.params, false);
        if (!rep.ok) {
            throw NotSupercritical(std::string("solve_linear: background sample fails ") +
                                   std::string(rep.worst_name) + " margin " +
                                   std::to_string(rep.worst_margin));
        }
    }
    if (prep::compatibility_residual(prob.initial, prob.params.m) > kCompatibilityGate) {
        throw IncompatibleData("solve_linear: initial data fails the compatibility gate");
    }
    if (prob.forcing) {
        prob.forcing->validate();
        require_same_grid(prob.forcing->grid(), prob.background.grid(), "solve_linear");
        for (const State& s : prob.forcing->states) {
            if (prep::compatibility_residual(s, prob.params.m) > kCompatibilityGate) {
                throw IncompatibleData("solve_linear: forcing sample fails the compatibility gate");
            }
        }
    }
}

inline int step_count(const LinearProblem& prob, double dt_bound) {
    double dt = prob.dt_override > 0.0 ? prob.dt_override : dt_bound;
    if (dt > dt_bound * (1.0 + 1e-9)) {
        throw UnstableStep("solve_linear: requested dt exceeds the CFL bound");
    }
    int n = static_cast<int>(std::ceil(prob.t_end / dt - 1e-12));
    n = std::max(n, 1);
    const int stride = prob.sample_count - 1;
    return ((n + stride - 1) / stride) * stride;
}

inline double cfl_bound_over_background(const LinearProblem& prob) {
    double b = std::numeric_limits<double>::infinity();
    for (const State& s : prob.background.states) {
        b = std::min(b, cfl_dt(s, prob.params, prob.cfl));
    }
    return b;
}

// Background height slope of the interpolation segment containing t.
inline Field phi_slope_at(const BackgroundFlow& bg, double t) {
    const std::size_t k = bg.segment(t);
    const double span = bg.times[k + 1] - bg.times[k];
    Field slope(bg.grid());
    const int n = bg.grid().size();
    for (int q = 0; q < n; ++q) {
        const std::size_t kk = static_cast<std::size_t>(q);
        slope.values[kk] =
            (bg.states[k + 1].phi.values[kk] - bg.states[k].phi.values[kk]) / span;
    }
    return slope;
}

}  // namespace detail

// Uniform step times used by solve_linear for the given problem.
inline std::vector<double> time_grid(const LinearProblem& prob) {
    detail::validate_problem(prob);
    const int nsteps = detail::step_count(prob, detail::cfl_bound_over_background(prob));
    std::vector<double> t(static_cast<std::size_t>(nsteps) + 1);
    const double dt = prob.t_end / nsteps;
    for (int n = 0; n <= nsteps; ++n) t[static_cast<std::size_t>(n)] = n * dt;
    return t;
}

inline LinearSolution solve_linear(const LinearProblem& prob) {
    detail::validate_problem(prob);
    const Grid& grid = prob.initial.grid();
    const Params& p = prob.params;
    const int nsteps = detail::step_count(prob, detail::cfl_bound_over_background(prob));
    const double dt = prob.t_end / nsteps;
    const int stride = nsteps / (prob.sample_count - 1);
    const bool frozen = prob.background.single();

    LinearSolution sol;
    sol.energy.times.reserve(static_cast<std::size_t>(nsteps) + 1);
    sol.energy.I0.reserve(static_cast<std::size_t>(nsteps) + 1);

    detail::StageCoeffs frozen_coeffs =
        frozen ? detail::make_stage(prob.background.states.front(), nullptr, p)
               : detail::StageCoeffs{};
    auto stage_at = [&](double t) -> detail::StageCoeffs {
        if (frozen) return frozen_coeffs;
        const State bg = prob.background.at(t);
        const Field slope = detail::phi_slope_at(prob.background, t);
        return detail::make_stage(bg, &slope, p);
    };
    auto forcing_at = [&](double t, const detail::StageCoeffs& sc)
        -> std::optional<detail::SymState> {
        if (!prob.forcing) return std::nullopt;
        return detail::forcing_to_sym(prob.forcing->at(t), sc, p);
    };

    detail::StageCoeffs sc0 = stage_at(0.0);
    detail::SymState w = detail::to_sym(prob.initial, sc0, p);
    detail::zero_inflow(w);
    detail::SymState k1(grid), k2(grid), wstar(grid);

    auto record_energy = [&](double t, const detail::StageCoeffs& sc,
                             const std::optional<detail::SymState>& fsym) {
        sol.energy.times.push_back(t);
        sol.energy.I0.push_back(detail::sym_l2_sq(w));
        double l2phys = 0.0;
        const Grid& g = grid;
        for (int i = 0; i < g.nx; ++i) {
            for (int j = 0; j < g.ny; ++j) {
                const int q = g.index(i, j);
                const std::size_t kk = static_cast<std::size_t>(q);
                const double sm = sc.c.values[kk] / p.g;
                const double ph = sm * w.w2.values[kk];
                l2phys += quadrature_weight(g, i, j) *
                          (w.w0.values[kk] * w.w0.values[kk] +
                           w.w1.values[kk] * w.w1.values[kk] + ph * ph);
            }
        }
        sol.energy.l2.push_back(std::sqrt(l2phys));
        sol.energy.forcing_sq.push_back(fsym ? detail::sym_l2_sq(*fsym) : 0.0);
    };

    auto sample_state = [&](const detail::StageCoeffs& sc) {
        State s = detail::from_sym(w, sc, p);
        if (!s.finite()) {
            throw NumericError("solve_linear: trajectory became non-finite");
        }
        return s;
    };

    {
        const auto f0 = forcing_at(0.0, sc0);
        record_energy(0.0, sc0, f0);
        sol.sample_times.push_back(0.0);
        sol.trajectory.push_back(sample_state(sc0));
    }

    detail::StageCoeffs sc_next = frozen ? frozen_coeffs : stage_at(dt);
    for (int n = 0; n < nsteps; ++n) {
        const double t = n * dt;
        const double t_next = (n + 1) * dt;
        const detail::StageCoeffs& c1 = frozen ? frozen_coeffs : sc0;
        const detail::StageCoeffs& c2 = frozen ? frozen_coeffs : sc_next;
        const auto f1 = forcing_at(t, c1);
        const auto f2 = forcing_at(t_next, c2);
        detail::heun_step(w, dt, c1, f1 ? &*f1 : nullptr, c2, f2 ? &*f2 : nullptr, p.f,
                          k1, k2, wstar);
        detail::zero_inflow(w);
        record_energy(t_next, c2, f2);
        if ((n + 1) % stride == 0) {
            sol.sample_times.push_back(t_next);
            sol.trajectory.push_back(sample_state(c2));
        }
        if (!frozen && n + 1 < nsteps) {
            sc0 = sc_next;
            sc_next = stage_at((n + 2) * dt);
        }
    }

    detail::fit_growth_constant(sol.energy);
    return sol;
}

// Discrete energy constant of a frozen background for the resolvent bound:
// half the largest eigenvalue of Dx E1^0 + Dy E2^0 over the grid, clamped
// at zero.
inline double resolvent_energy_constant(const State& bg, const Params& p) {
    const Grid& g = bg.grid();
    Field c(g);
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        if (!(bg.phi.values[k] > 0.0)) {
            throw NonPositiveHeight("resolvent_energy_constant: background height");
        }
        c.values[k] = std::sqrt(p.g * bg.phi.values[k]);
    }
    const Field ux = deriv_x(bg.u, 1);
    const Field vy = deriv_y(bg.v, 1);
    const Field cx = deriv_x(c, 1);
    const Field cy = deriv_y(c, 1);
    double worst = -std::numeric_limits<double>::infinity();
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double d = ux.values[k] + vy.values[k];
        const double off = std::hypot(cx.values[k], cy.values[k]);
        worst = std::max(worst, d + off);
    }
    return std::max(0.0, 0.5 * worst);
}

// Largest transport eigenvalue of (E2^0)^-1 E1^0 over the grid.
inline double max_transport_eigenvalue(const State& bg, const Params& p) {
    const Grid& g = bg.grid();
    double m = 0.0;
    for (int q = 0; q < g.size(); ++q) {
        const std::size_t k = static_cast<std::size_t>(q);
        const double u = bg.u.values[k];
        const double v = bg.v.values[k];
        const double phi = bg.phi.values[k];
        algebra::require_supercritical_point(u, v, phi, p.g, "max_transport_eigenvalue");
        const double kappa0 = std::sqrt(p.g * (u * u + v * v - p.g * phi) / phi);
        const double lam1 = (u * v + phi * kappa0) / (v * v - p.g * phi);
        m = std::max(m, lam1);
    }
    return m;
}

namespace detail {

// E1^0 w at one node
inline void apply_e1sym(double u, double c, const double* w, double* out) {
    out[0] = u * w[0] + c * w[2];
    out[1] = u * w[1];
    out[2] = c * w[0] + u * w[2];
}

inline void apply_e2sym(double v, double c, const double* w, double* out) {
    out[0] = v * w[0];
    out[1] = v * w[1] + c * w[2];
    out[2] = c * w[1] + v * w[2];
}

inline void solve_e2sym(double v, double c, const double* rhs, double* out) {
    const double det = v * v - c * c;
    out[0] = rhs[0] / v;
    out[1] = (v * rhs[1] - c * rhs[2]) / det;
    out[2] = (-c * rhs[1] + v * rhs[2]) / det;
}

}  // namespace detail

// Solves E1^0(bg) U_x + E2^0(bg) U_y + omega U = F with U = 0 on the inflow
// edges by marching in y, two-stage substeps sized by the transport CFL.
inline State resolvent_solve(const State& bg, const State& F, double omega, const Params& p,
                             double cfl = 0.45) {
    require_same_grid(bg.grid(), F.grid(), "resolvent_solve");
    p.validate();
    if (!(omega > 0.0)) throw NumericError("resolvent_solve: omega must be positive");
    const auto rep = algebra::check_supercritical(bg, p, false);
    if (!rep.ok) {
        throw NotSupercritical(std::string("resolvent_solve: background fails ") +
                               std::string(rep.worst_name));
    }
    if (prep::compatibility_residual(F, p.m) > kCompatibilityGate) {
        throw IncompatibleData("resolvent_solve: forcing fails the compatibility gate");
    }

    const Grid& g = bg.grid();
    const int nx = g.nx;
    const double lam1 = max_transport_eigenvalue(bg, p);
    const int nsub = std::max(1, static_cast<int>(std::ceil(lam1 * g.dy / (cfl * g.dx) - 1e-12)));
    const double h = g.dy / nsub;

    State sol(g);
    // row buffers: [component][i]
    std::vector<double> W(3 * static_cast<std::size_t>(nx), 0.0);
    std::vector<double> Wstar(W.size()), K1(W.size()), K2(W.size());

    auto row_value = [&](const Field& f, int i, int jlo, double th) {
        return (1.0 - th) * f(i, jlo) + th * f(i, jlo + 1);
    };

    auto rhs = [&](const std::vector<double>& row, int jlo, double th, std::vector<double>& out) {
        for (int c = 0; c < 3; ++c) out[static_cast<std::size_t>(c * nx)] = 0.0;
        for (int i = 1; i < nx; ++i) {
            const double u = row_value(bg.u, i, jlo, th);
            const double v = row_value(bg.v, i, jlo, th);
            const double c = std::sqrt(p.g * row_value(bg.phi, i, jlo, th));
            double wv[3], wprev[3], fv[3], e1w[3], resid[3], upd[3];
            for (int cc = 0; cc < 3; ++cc) {
                wv[cc] = row[static_cast<std::size_t>(cc * nx + i)];
                wprev[cc] = row[static_cast<std::size_t>(cc * nx + i - 1)];
                fv[cc] = row_value(F.component(cc), i, jlo, th);
            }
            double dxw[3];
            for (int cc = 0; cc < 3; ++cc) dxw[cc] = (wv[cc] - wprev[cc]) / g.dx;
            detail::apply_e1sym(u, c, dxw, e1w);
            for (int cc = 0; cc < 3; ++cc) resid[cc] = fv[cc] - omega * wv[cc] - e1w[cc];
            detail::solve_e2sym(v, c, resid, upd);
            for (int cc = 0; cc < 3; ++cc) out[static_cast<std::size_t>(cc * nx + i)] = upd[cc];
        }
    };

    for (int i = 0; i < nx; ++i) {
        sol.u(i, 0) = 0.0;
        sol.v(i, 0) = 0.0;
        sol.phi(i, 0) = 0.0;
    }
    for (int j = 0; j + 1 < g.ny; ++j) {
        for (int s = 0; s < nsub; ++s) {
            const double th0 = static_cast<double>(s) / nsub;
            const double th1 = static_cast<double>(s + 1) / nsub;
            rhs(W, j, th0, K1);
            for (std::size_t q = 0; q < W.size(); ++q) Wstar[q] = W[q] + h * K1[q];
            rhs(Wstar, j, th1, K2);
            for (std::size_t q = 0; q < W.size(); ++q) W[q] += 0.5 * h * (K1[q] + K2[q]);
        }
        for (int i = 0; i < nx; ++i) {
            sol.u(i, j + 1) = W[static_cast<std::size_t>(i)];
            sol.v(i, j + 1) = W[static_cast<std::size_t>(nx + i)];
            sol.phi(i, j + 1) = W[static_cast<std::size_t>(2 * nx + i)];
        }
    }
    if (!sol.finite()) {
        throw NumericError("resolvent_solve: solution became non-finite");
    }

    // Post-hoc residual against the backward-difference form of the equation,
    // compared with the leading truncation term of the y-march.
    double res_sq = 0.0;
    for (int i = 1; i < nx; ++i) {
        for (int j = 1; j < g.ny; ++j) {
            const double u = bg.u(i, j);
            const double v = bg.v(i, j);
            const double c = std::sqrt(p.g * bg.phi(i, j));
            double wv[3], dxw[3], dyw[3], e1w[3], e2w[3];
            for (int cc = 0; cc < 3; ++cc) {
                const Field& comp = sol.component(cc);
                wv[cc] = comp(i, j);
                dxw[cc] = (comp(i, j) - comp(i - 1, j)) / g.dx;
                dyw[cc] = (comp(i, j) - comp(i, j - 1)) / g.dy;
            }
            detail::apply_e1sym(u, c, dxw, e1w);
            detail::apply_e2sym(v, c, dyw, e2w);
            for (int cc = 0; cc < 3; ++cc) {
                const double r =
                    e1w[cc] + e2w[cc] + omega * wv[cc] - F.component(cc)(i, j);
                res_sq += quadrature_weight(g, i, j) * r * r;
            }
        }
    }
    const double res = std::sqrt(res_sq);

    double trunc_sq = 0.0;
    {
        std::array<Field, 3> d2y;
        for (int cc = 0; cc < 3; ++cc) {
            d2y[static_cast<std::size_t>(cc)] = deriv_y(sol.component(cc), 2);
        }
        for (int i = 1; i < nx; ++i) {
            for (int j = 1; j < g.ny; ++j) {
                const double v = bg.v(i, j);
                const double c = std::sqrt(p.g * bg.phi(i, j));
                double w2[3], e2w[3];
                for (int cc = 0; cc < 3; ++cc) w2[cc] = d2y[static_cast<std::size_t>(cc)](i, j);
                detail::apply_e2sym(v, c, w2, e2w);
                for (int cc = 0; cc < 3; ++cc) {
                    trunc_sq += quadrature_weight(g, i, j) * e2w[cc] * e2w[cc];
                }
            }
        }
    }
    const double trunc = 0.5 * g.dy * std::sqrt(trunc_sq);
    const double floor_val = 1e-10 * (l2_norm(F) + omega * l2_norm(sol) + 1.0);
    if (res > 10.0 * trunc + floor_val) {
        throw ResidualTooLarge("resolvent_solve: residual " + std::to_string(res) +
                               " exceeds 10x the truncation estimate " + std::to_string(trunc));
    }
    return sol;
}

// Grid-refinement error table of a manufactured-solution study.
struct ConvergenceReport {
    std::vector<double> h;
    std::vector<double> error;
    std::vector<double> order;  // order[0] is NaN
};

inline ConvergenceReport make_convergence_report(const std::vector<double>& h,
                                                 const std::vector<double>& err) {
    if (h.size() != err.size()) {
        throw NumericError("make_convergence_report: h and error sizes differ");
    }
    ConvergenceReport rep;
    rep.h = h;
    rep.error = err;
    rep.order.assign(h.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 1; k < h.size(); ++k) {
        rep.order[k] = std::log(err[k - 1] / err[k]) / std::log(h[k - 1] / h[k]);
    }
    return rep;
}

}  // namespace swerect::linear
