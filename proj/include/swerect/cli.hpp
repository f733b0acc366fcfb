#pragma once

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "swerect/config.hpp"
#include "swerect/io.hpp"
#include "swerect/scenarios.hpp"
#include "swerect/swerect.hpp"

namespace swerect::cli {

using ordered_json = nlohmann::ordered_json;

namespace detail {

struct Context {
    config::Config cfg;
    std::filesystem::path out;
    unsigned seed = 12345;
    ordered_json summary;
};

inline Grid grid_from(const config::Config& cfg, int default_n = 33) {
    const int n = cfg.get_int("grid.n", default_n);
    const int nx = cfg.get_int("grid.nx", n);
    const int ny = cfg.get_int("grid.ny", n);
    const double L1 = cfg.get_double("grid.L1", 1.0);
    const double L2 = cfg.get_double("grid.L2", 1.0);
    return Grid(L1, L2, nx, ny);
}

inline Params params_from(const config::Config& cfg) {
    Params p;
    p.g = cfg.get_double("params.g", p.g);
    p.f = cfg.get_double("params.f", p.f);
    p.c0 = cfg.get_double("params.c0", p.c0);
    p.c1 = cfg.get_double("params.c1", p.c1);
    p.c2 = cfg.get_double("params.c2", p.c2);
    p.delta = cfg.get_double("params.delta", p.delta);
    p.m = cfg.get_int("params.m", p.m);
    p.validate();
    return p;
}

inline ordered_json grid_json(const Grid& g) {
    return {{"nx", g.nx}, {"ny", g.ny}, {"L1", g.L1}, {"L2", g.L2}};
}

inline ordered_json params_json(const Params& p) {
    return {{"g", p.g},   {"f", p.f},         {"c0", p.c0}, {"c1", p.c1},
            {"c2", p.c2}, {"delta", p.delta}, {"m", p.m}};
}

inline void write_summary(const Context& ctx) {
    const auto path = ctx.out / "summary.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << ctx.summary.dump(2) << "\n";
    if (!out.good()) throw IoError("write failed: " + path.string());
}

inline ordered_json report_json(const algebra::SupercriticalReport& rep) {
    ordered_json margins = ordered_json::object();
    for (const auto& e : rep.entries) {
        margins[std::string(e.name)] = e.margin;
    }
    return {{"ok", rep.ok},
            {"strong", rep.strong},
            {"margins", margins},
            {"worst", std::string(rep.worst_name)},
            {"worst_margin", rep.worst_margin}};
}

inline int cmd_check(Context& ctx) {
    const Grid g = grid_from(ctx.cfg, 17);
    const Params p = params_from(ctx.cfg);
    const double u = ctx.cfg.get_double("scenario.u", 2.0);
    const double v = ctx.cfg.get_double("scenario.v", 2.0);
    const double phi = ctx.cfg.get_double("scenario.phi", 0.1);
    const bool strong = ctx.cfg.get_bool("scenario.strong", false);
    const int samples = ctx.cfg.get_int("scenario.samples", 200);
    ctx.cfg.require_all_read();

    const State s = scenarios::uniform_state(g, u, v, phi);
    const auto rep = algebra::check_supercritical(s, p, strong);
    for (const auto& e : rep.entries) {
        std::cout << "margin " << e.name << " = " << e.margin << "\n";
    }
    std::cout << (rep.ok ? (strong ? "strongly supercritical" : "supercritical")
                         : "not supercritical")
              << "\n";

    // characteristic identity spot check on random supercritical points
    double identity_max = 0.0;
    if (rep.ok) {
        std::mt19937_64 rng(ctx.seed);
        std::uniform_real_distribution<double> uvel(1.0, 5.0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        int done = 0;
        while (done < samples) {
            const double ru = uvel(rng);
            const double rv = uvel(rng);
            const double hi = (std::min(ru, rv) * std::min(ru, rv) - p.c2 * p.c2) / p.g;
            if (hi <= 2e-3) continue;
            const double rphi = 1e-3 + (hi - 1e-3) * unit(rng);
            const auto cd = algebra::char_data(ru, rv, rphi, p.g);
            const algebra::Mat3 m1 = algebra::e1_sym(ru, rv, rphi, p.g);
            const algebra::Mat3 m2 = algebra::e2_sym(ru, rv, rphi, p.g);
            algebra::Mat3 da = algebra::Mat3::Zero();
            algebra::Mat3 db = algebra::Mat3::Zero();
            for (int k = 0; k < 3; ++k) {
                da(k, k) = cd.a[static_cast<std::size_t>(k)];
                db(k, k) = cd.b[static_cast<std::size_t>(k)];
            }
            const double err = (cd.P.transpose() * m1 * cd.P - da).norm() +
                               (cd.P.transpose() * m2 * cd.P - db).norm();
            identity_max = std::max(identity_max, err);
            ++done;
        }
        std::cout << "characteristic identity max error = " << identity_max << "\n";
    }

    ctx.summary["scenario"] = "check";
    ctx.summary["grid"] = grid_json(g);
    ctx.summary["params"] = params_json(p);
    ctx.summary["state"] = {{"u", u}, {"v", v}, {"phi", phi}};
    ctx.summary["regime"] = report_json(rep);
    ctx.summary["identity_max_error"] = identity_max;
    const bool pass = rep.ok;
    ctx.summary["status"] = pass ? "ok" : "fail";
    write_summary(ctx);
    return pass ? 0 : 2;
}

inline int cmd_stationary(Context& ctx) {
    const Grid g = grid_from(ctx.cfg, 33);
    const Params p = params_from(ctx.cfg);
    const std::string kind = ctx.cfg.get_string("scenario.kind", "y_independent");
    const double u0 = ctx.cfg.get_double("scenario.u0", 2.0);
    const double v0 = ctx.cfg.get_double("scenario.v0", 2.0);
    const double phi0 = ctx.cfg.get_double("scenario.phi0", 0.1);
    ctx.cfg.require_all_read();

    stationary::StationarySolution sol;
    if (kind == "constant") {
        sol = stationary::constant_state(u0, v0, phi0, p, g);
    } else if (kind == "y_independent") {
        sol = stationary::y_independent_stationary(u0, v0, phi0, p, g);
    } else {
        throw ConfigError("scenario.kind must be `constant` or `y_independent`");
    }
    io::emit_snapshot(sol.state, ctx.out / "stationary.csv");
    std::cout << "residual = " << sol.residual_norm << "\n";

    ctx.summary["scenario"] = "stationary";
    ctx.summary["grid"] = grid_json(g);
    ctx.summary["params"] = params_json(p);
    ctx.summary["kind"] = kind;
    ctx.summary["inlet"] = {{"u0", u0}, {"v0", v0}, {"phi0", phi0}};
    ctx.summary["residual_norm"] = sol.residual_norm;
    ctx.summary["mass_flux_drift"] = sol.mass_flux_drift;
    ctx.summary["outputs"] = {{"snapshot", "stationary.csv"}};
    ctx.summary["status"] = "ok";
    write_summary(ctx);
    return 0;
}

inline linear::LinearProblem linear_problem_from(const config::Config& cfg, int n) {
    const std::string preset = cfg.get_string("scenario.preset", "constant");
    linear::LinearProblem prob;
    if (preset == "constant") {
        prob = scenarios::energy_constant(n);
    } else if (preset == "varying") {
        prob = scenarios::energy_varying(n);
    } else if (preset == "forced") {
        prob = scenarios::energy_forced(n);
    } else {
        throw ConfigError("scenario.preset must be `constant`, `varying`, or `forced`");
    }
    prob.t_end = cfg.get_double("scenario.t_end", prob.t_end);
    prob.cfl = cfg.get_double("scenario.cfl", prob.cfl);
    prob.sample_count = cfg.get_int("scenario.samples", prob.sample_count);
    const double amp = cfg.get_double("scenario.amplitude", -1.0);
    if (amp >= 0.0 && preset != "forced") {
        prob.initial = scenarios::desk_bump(prob.initial.grid(),
                                            prob.params, amp);
    }
    return prob;
}

inline int cmd_linear(Context& ctx) {
    const int n = ctx.cfg.get_int("grid.n", 33);
    linear::LinearProblem prob = linear_problem_from(ctx.cfg, n);
    const std::string preset = ctx.cfg.get_string("scenario.preset", "constant");
    ctx.cfg.require_all_read();

    const linear::LinearSolution sol = linear::solve_linear(prob);
    io::emit_snapshot(sol.trajectory.back(), ctx.out / "final.csv");
    io::emit_series(sol.energy, ctx.out / "energy.csv");
    std::cout << "fitted r1 = " << sol.energy.fitted_r1 << "\n";
    std::cout << "bound " << (sol.energy.bound_ok ? "holds" : "fails") << "\n";

    ctx.summary["scenario"] = "linear";
    ctx.summary["preset"] = preset;
    ctx.summary["grid"] = grid_json(prob.initial.grid());
    ctx.summary["params"] = params_json(prob.params);
    ctx.summary["t_end"] = prob.t_end;
    ctx.summary["fitted_r1"] = sol.energy.fitted_r1;
    ctx.summary["bound_ok"] = sol.energy.bound_ok;
    ctx.summary["I0_first"] = sol.energy.I0.front();
    ctx.summary["I0_last"] = sol.energy.I0.back();
    ctx.summary["outputs"] = {{"snapshot", "final.csv"}, {"energy", "energy.csv"}};
    ctx.summary["status"] = sol.energy.bound_ok ? "ok" : "fail";
    write_summary(ctx);
    return sol.energy.bound_ok ? 0 : 2;
}

inline int cmd_resolvent(Context& ctx) {
    const Grid g = grid_from(ctx.cfg, 65);
    const Params p = params_from(ctx.cfg);
    const std::string background = ctx.cfg.get_string("scenario.background", "varying");
    const double amplitude = ctx.cfg.get_double("scenario.amplitude", 0.2);
    const double cfl = ctx.cfg.get_double("scenario.cfl", 0.45);
    const double omega_factor = ctx.cfg.get_double("scenario.omega_factor", 10.0);

    State bg(g);
    if (background == "constant") {
        bg = scenarios::uniform_state(g, 2.0, 2.0, 0.1);
    } else if (background == "varying") {
        bg = scenarios::resolvent_bound_background(g);
    } else {
        throw ConfigError("scenario.background must be `constant` or `varying`");
    }
    const double omega_hat = linear::resolvent_energy_constant(bg, p);
    const double omega = ctx.cfg.get_double(
        "scenario.omega", omega_hat > 0.0 ? omega_factor * omega_hat : 1.0);
    ctx.cfg.require_all_read();

    const State F = scenarios::desk_bump(g, p, amplitude);
    const State sol = linear::resolvent_solve(bg, F, omega, p, cfl);
    io::emit_snapshot(sol, ctx.out / "resolvent.csv");

    const double l2f = l2_norm(F);
    const double l2u = l2_norm(sol);
    ctx.summary["scenario"] = "resolvent";
    ctx.summary["grid"] = grid_json(g);
    ctx.summary["params"] = params_json(p);
    ctx.summary["background"] = background;
    ctx.summary["omega"] = omega;
    ctx.summary["omega_hat"] = omega_hat;
    ctx.summary["l2_forcing"] = l2f;
    ctx.summary["l2_solution"] = l2u;
    ctx.summary["outputs"] = {{"snapshot", "resolvent.csv"}};
    bool pass = true;
    if (omega > omega_hat) {
        const double bound = l2f / (omega - omega_hat);
        const double ratio = l2u / bound;
        pass = ratio <= 1.1;
        ctx.summary["bound"] = bound;
        ctx.summary["bound_ratio"] = ratio;
        ctx.summary["bound_ok"] = pass;
        std::cout << "l2(U) = " << l2u << ", bound = " << bound << "\n";
    }
    ctx.summary["status"] = pass ? "ok" : "fail";
    write_summary(ctx);
    return pass ? 0 : 2;
}

inline int cmd_picard(Context& ctx) {
    const Grid g = grid_from(ctx.cfg, 33);
    const Params p = params_from(ctx.cfg);
    const double u0 = ctx.cfg.get_double("scenario.u0", 2.0);
    const double v0 = ctx.cfg.get_double("scenario.v0", 2.0);
    const double phi0 = ctx.cfg.get_double("scenario.phi0", 0.1);
    const double amplitude = ctx.cfg.get_double("scenario.amplitude", 0.5 * p.delta);
    const double t_end = ctx.cfg.get_double("scenario.t_end", 0.04);
    const double tol = ctx.cfg.get_double("scenario.tol", 1e-10);
    const int max_iter = ctx.cfg.get_int("scenario.max_iter", 25);
    const double cfl = ctx.cfg.get_double("scenario.cfl", 0.45);
    const int samples = ctx.cfg.get_int("scenario.samples", 33);
    ctx.cfg.require_all_read();

    ctx.summary["scenario"] = "picard";
    ctx.summary["grid"] = grid_json(g);
    ctx.summary["params"] = params_json(p);
    ctx.summary["amplitude"] = amplitude;
    ctx.summary["t_end"] = t_end;

    const auto profile = stationary::constant_state(u0, v0, phi0, p, g);
    const State initial = scenarios::desk_bump(g, p, amplitude);
    try {
        const auto result =
            nonlinear::picard_solve(initial, profile, p, t_end, tol, max_iter, cfl, samples);
        io::emit_series(result.report, ctx.out / "iteration.csv");
        io::emit_snapshot(result.trajectory.states.back(), ctx.out / "final.csv");
        double max_ratio = 0.0;
        for (double r : result.report.ratios) max_ratio = std::max(max_ratio, r);
        std::cout << "converged in " << result.report.iterates << " iterations, max ratio "
                  << max_ratio << "\n";
        ctx.summary["iterates"] = result.report.iterates;
        ctx.summary["converged"] = true;
        ctx.summary["max_ratio"] = max_ratio;
        ctx.summary["final_residual"] = result.report.final_residual;
        ctx.summary["outputs"] = {{"iteration", "iteration.csv"}, {"snapshot", "final.csv"}};
        ctx.summary["status"] = "ok";
        write_summary(ctx);
        return 0;
    } catch (const nonlinear::NoConvergence& e) {
        io::emit_series(e.report, ctx.out / "iteration.csv");
        std::cout << "no convergence: " << e.what() << "\n";
        ctx.summary["iterates"] = e.report.iterates;
        ctx.summary["converged"] = false;
        ctx.summary["error"] = e.what();
        ctx.summary["error_kind"] = "NoConvergence";
        ctx.summary["outputs"] = {{"iteration", "iteration.csv"}};
        ctx.summary["status"] = "fail";
        write_summary(ctx);
        return 2;
    }
}

inline int cmd_converge(Context& ctx) {
    const std::string study = ctx.cfg.get_string("scenario.study", "linear");
    const int levels = ctx.cfg.get_int("scenario.levels", 3);
    const int base = ctx.cfg.get_int("scenario.base", 33);
    const double order_lo = ctx.cfg.get_double("scenario.order_lo", 0.8);
    const double order_hi = ctx.cfg.get_double("scenario.order_hi", 1.3);
    ctx.cfg.require_all_read();
    if (levels < 2) throw ConfigError("scenario.levels must be at least 2");

    std::vector<double> hs, errs;
    for (int k = 0; k < levels; ++k) {
        const int n = (base - 1) * (1 << k) + 1;
        if (study == "linear") {
            const auto mms = scenarios::mms_linear(n);
            const auto sol = linear::solve_linear(mms.problem);
            const auto times = linear::time_grid(mms.problem);
            hs.push_back(mms.problem.initial.grid().dx + (times[1] - times[0]));
            errs.push_back(mms.trajectory_error(sol));
        } else if (study == "resolvent") {
            const auto mms = scenarios::mms_resolvent(n);
            const State sol = linear::resolvent_solve(mms.background, mms.forcing,
                                                      mms.omega, mms.params);
            hs.push_back(mms.background.grid().dx);
            errs.push_back(l2_norm(sub(sol, mms.shape)));
        } else {
            throw ConfigError("scenario.study must be `linear` or `resolvent`");
        }
    }
    const auto rep = linear::make_convergence_report(hs, errs);
    io::emit_series(rep, ctx.out / "convergence.csv");
    bool pass = true;
    for (std::size_t k = 1; k < rep.order.size(); ++k) {
        std::cout << "level " << k << ": h = " << rep.h[k] << ", error = " << rep.error[k]
                  << ", order = " << rep.order[k] << "\n";
        if (!(rep.order[k] >= order_lo && rep.order[k] <= order_hi)) pass = false;
    }

    ctx.summary["scenario"] = "converge";
    ctx.summary["study"] = study;
    ctx.summary["h"] = rep.h;
    ctx.summary["error"] = rep.error;
    ordered_json orders = ordered_json::array();
    for (std::size_t k = 1; k < rep.order.size(); ++k) orders.push_back(rep.order[k]);
    ctx.summary["order"] = orders;
    ctx.summary["window"] = {{"lo", order_lo}, {"hi", order_hi}};
    ctx.summary["outputs"] = {{"convergence", "convergence.csv"}};
    ctx.summary["status"] = pass ? "ok" : "fail";
    write_summary(ctx);
    return pass ? 0 : 2;
}

inline int cmd_energy(Context& ctx) {
    const int n = ctx.cfg.get_int("grid.n", 33);
    ctx.cfg.require_all_read();
    const char* names[3] = {"constant", "varying", "forced"};
    const auto suite = scenarios::energy_suite(n);
    bool all_ok = true;
    bool monotone = true;
    ordered_json runs = ordered_json::array();
    for (std::size_t s = 0; s < suite.size(); ++s) {
        const auto sol = linear::solve_linear(suite[s]);
        io::emit_series(sol.energy, ctx.out / (std::string("energy_") + names[s] + ".csv"));
        if (s == 0) {
            for (std::size_t k = 1; k < sol.energy.I0.size(); ++k) {
                if (sol.energy.I0[k] > sol.energy.I0[k - 1] * (1.0 + 1e-12)) {
                    monotone = false;
                }
            }
        }
        all_ok = all_ok && sol.energy.bound_ok;
        std::cout << names[s] << ": fitted r1 = " << sol.energy.fitted_r1 << ", bound "
                  << (sol.energy.bound_ok ? "holds" : "fails") << "\n";
        runs.push_back({{"name", names[s]},
                        {"fitted_r1", sol.energy.fitted_r1},
                        {"bound_ok", sol.energy.bound_ok}});
    }
    std::cout << "constant-coefficient I0 " << (monotone ? "non-increasing" : "increased")
              << "\n";

    const bool pass = all_ok && monotone;
    ctx.summary["scenario"] = "energy";
    ctx.summary["grid"] = {{"n", n}};
    ctx.summary["runs"] = runs;
    ctx.summary["monotone_constant"] = monotone;
    ctx.summary["outputs"] = {{"constant", "energy_constant.csv"},
                              {"varying", "energy_varying.csv"},
                              {"forced", "energy_forced.csv"}};
    ctx.summary["status"] = pass ? "ok" : "fail";
    write_summary(ctx);
    return pass ? 0 : 2;
}

// Exit classification: bad input or I/O is 1, a run that starts but fails a
// regime/convergence/residual gate is 2 with the summary still written.
inline int classify_and_report(Context& ctx, const Error& e, const char* kind, int code) {
    std::cerr << "error: " << e.what() << "\n";
    ctx.summary["status"] = "fail";
    ctx.summary["error"] = e.what();
    ctx.summary["error_kind"] = kind;
    try {
        write_summary(ctx);
    } catch (const Error&) {
        // the out dir may be the unwritable cause itself
    }
    return code;
}

}  // namespace detail

inline int run(std::vector<std::string> args) {
    CLI::App app{"supercritical shallow water solvers on a rectangle"};
    app.fallthrough();
    std::string config_path;
    std::string out_dir;
    unsigned seed = 12345;
    int threads = 0;
    app.add_option("--config", config_path, "scenario config file");
    app.add_option("--out", out_dir, "output directory (default: $SWERECT_OUT or .)");
    app.add_option("--seed", seed, "seed for randomized spot checks");
    app.add_option("--threads", threads, "worker threads, 0 = hardware");
    app.require_subcommand(1);

    const std::vector<std::pair<std::string, std::string>> subs = {
        {"check", "supercriticality margins and characteristic identities"},
        {"stationary", "stationary profile march"},
        {"linear", "frozen-coefficient evolution with energy tracking"},
        {"resolvent", "resolvent solve with the energy bound"},
        {"picard", "nonlinear fixed-point iteration"},
        {"converge", "manufactured-solution refinement study"},
        {"energy", "energy estimate suite"},
    };
    for (const auto& [name, desc] : subs) {
        app.add_subcommand(name, desc);
    }

    // CLI11 wants argv order reversed for its vector parse entry point
    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 1;
    }

    detail::Context ctx;
    ctx.seed = seed;
    try {
        set_threads(threads < 0 ? 0 : threads);
        if (out_dir.empty()) {
            const char* env = std::getenv("SWERECT_OUT");
            out_dir = env && *env ? env : ".";
        }
        ctx.out = out_dir;
        std::filesystem::create_directories(ctx.out);
        if (!config_path.empty()) {
            ctx.cfg = config::Config::parse_file(config_path);
        }

        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "check") return detail::cmd_check(ctx);
        if (name == "stationary") return detail::cmd_stationary(ctx);
        if (name == "linear") return detail::cmd_linear(ctx);
        if (name == "resolvent") return detail::cmd_resolvent(ctx);
        if (name == "picard") return detail::cmd_picard(ctx);
        if (name == "converge") return detail::cmd_converge(ctx);
        if (name == "energy") return detail::cmd_energy(ctx);
        std::cerr << "unknown subcommand\n";
        return 1;
    } catch (const RegimeLost& e) {
        return detail::classify_and_report(ctx, e, "RegimeLost", 2);
    } catch (const nonlinear::NoConvergence& e) {
        return detail::classify_and_report(ctx, e, "NoConvergence", 2);
    } catch (const NotStrongSupercritical& e) {
        return detail::classify_and_report(ctx, e, "NotStrongSupercritical", 2);
    } catch (const NotSupercritical& e) {
        return detail::classify_and_report(ctx, e, "NotSupercritical", 2);
    } catch (const ResidualTooLarge& e) {
        return detail::classify_and_report(ctx, e, "ResidualTooLarge", 2);
    } catch (const IntegrationFailure& e) {
        return detail::classify_and_report(ctx, e, "IntegrationFailure", 2);
    } catch (const UnstableStep& e) {
        return detail::classify_and_report(ctx, e, "UnstableStep", 2);
    } catch (const IncompatibleData& e) {
        return detail::classify_and_report(ctx, e, "IncompatibleData", 2);
    } catch (const CoriolisRequiresProfile& e) {
        return detail::classify_and_report(ctx, e, "CoriolisRequiresProfile", 2);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

inline int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

}  // namespace swerect::cli
