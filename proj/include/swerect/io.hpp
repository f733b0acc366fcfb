#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "swerect/errors.hpp"
#include "swerect/linear.hpp"
#include "swerect/nonlinear.hpp"
#include "swerect/state.hpp"

namespace swerect::io {

namespace detail {

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out.good()) throw IoError("write failed: " + path.string());
}

inline double parse_double(const std::string& text, const std::filesystem::path& path) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw IoError("malformed number in " + path.string());
    return v;
}

}  // namespace detail

// Node table, x-major: for each i all j in order. The grid comment keeps the
// reload bit-exact even when L/(n-1) is not representable.
inline void emit_snapshot(const State& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    const Grid& g = s.grid();
    out << "x,y,u,v,phi\n";
    out << "# grid nx=" << g.nx << " ny=" << g.ny << " L1=" << detail::fmt(g.L1)
        << " L2=" << detail::fmt(g.L2) << "\n";
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) {
            out << detail::fmt(g.x(i)) << ',' << detail::fmt(g.y(j)) << ','
                << detail::fmt(s.u(i, j)) << ',' << detail::fmt(s.v(i, j)) << ','
                << detail::fmt(s.phi(i, j)) << '\n';
        }
    }
    detail::finish(out, path);
}

inline State load_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "x,y,u,v,phi") {
        throw IoError("missing snapshot header in " + path.string());
    }
    int nx = 0;
    int ny = 0;
    double L1 = 0.0;
    double L2 = 0.0;
    bool have_meta = false;
    std::vector<double> xs, ys, us, vs, ps;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.front() == '#') {
            std::istringstream meta(line.substr(1));
            std::string tag;
            meta >> tag;
            if (tag == "grid") {
                std::string kv;
                while (meta >> kv) {
                    const std::size_t eq = kv.find('=');
                    if (eq == std::string::npos) continue;
                    const std::string key = kv.substr(0, eq);
                    const std::string val = kv.substr(eq + 1);
                    if (key == "nx") nx = std::atoi(val.c_str());
                    if (key == "ny") ny = std::atoi(val.c_str());
                    if (key == "L1") L1 = detail::parse_double(val, path);
                    if (key == "L2") L2 = detail::parse_double(val, path);
                }
                have_meta = nx >= 3 && ny >= 3 && L1 > 0.0 && L2 > 0.0;
            }
            continue;
        }
        std::istringstream row(line);
        std::string cell;
        double vals[5];
        for (int c = 0; c < 5; ++c) {
            if (!std::getline(row, cell, ',')) {
                throw IoError("short row in " + path.string());
            }
            vals[c] = detail::parse_double(cell, path);
        }
        xs.push_back(vals[0]);
        ys.push_back(vals[1]);
        us.push_back(vals[2]);
        vs.push_back(vals[3]);
        ps.push_back(vals[4]);
    }
    if (xs.empty()) throw IoError("empty snapshot: " + path.string());
    if (!have_meta) {
        // x-major layout: y cycles fastest, so ny = length of the first run
        // of constant x.
        ny = 1;
        while (static_cast<std::size_t>(ny) < xs.size() && xs[static_cast<std::size_t>(ny)] == xs[0]) ++ny;
        nx = static_cast<int>(xs.size()) / ny;
        L1 = xs.back();
        L2 = ys.back();
    }
    if (static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) != xs.size()) {
        throw IoError("node count does not match grid in " + path.string());
    }
    State s{Grid(L1, L2, nx, ny)};
    for (std::size_t q = 0; q < xs.size(); ++q) {
        s.u.values[q] = us[q];
        s.v.values[q] = vs[q];
        s.phi.values[q] = ps[q];
    }
    return s;
}

inline void emit_series(const linear::EnergyReport& rep, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "# schema=energy version=1\n";
    out << "t,I0,l2,bound_ok\n";
    for (std::size_t n = 0; n < rep.times.size(); ++n) {
        const int ok = n < rep.bound_ok_at.size() ? rep.bound_ok_at[n] : 1;
        out << detail::fmt(rep.times[n]) << ',' << detail::fmt(rep.I0[n]) << ','
            << detail::fmt(rep.l2[n]) << ',' << ok << '\n';
    }
    detail::finish(out, path);
}

inline void emit_series(const nonlinear::IterationReport& rep,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "# schema=iteration version=1\n";
    out << "t,diff,ratio\n";
    for (std::size_t k = 0; k < rep.diffs.size(); ++k) {
        const double ratio = k >= 1 && k - 1 < rep.ratios.size()
                                 ? rep.ratios[k - 1]
                                 : std::numeric_limits<double>::quiet_NaN();
        out << (k + 1) << ',' << detail::fmt(rep.diffs[k]) << ',' << detail::fmt(ratio)
            << '\n';
    }
    detail::finish(out, path);
}

inline void emit_series(const linear::ConvergenceReport& rep,
                        const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "# schema=convergence version=1\n";
    out << "t,h,error,order\n";
    for (std::size_t k = 0; k < rep.h.size(); ++k) {
        out << k << ',' << detail::fmt(rep.h[k]) << ',' << detail::fmt(rep.error[k]) << ','
            << detail::fmt(rep.order[k]) << '\n';
    }
    detail::finish(out, path);
}

}  // namespace swerect::io
