#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "swerect/cli.hpp"

using namespace swerect;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "swerect_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_cfg(const fs::path& dir, const std::string& text) {
    const fs::path path = dir / "scenario.cfg";
    std::ofstream out(path);
    out << text;
    return path;
}

nlohmann::json read_summary(const fs::path& dir) {
    std::ifstream in(dir / "summary.json");
    REQUIRE(in.good());
    return nlohmann::json::parse(in);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("check subcommand reports a healthy default state", "[cli]") {
    const auto dir = fresh_dir("check_ok");
    REQUIRE(cli::run({"check", "--out", dir.string()}) == 0);
    const auto summary = read_summary(dir);
    REQUIRE(summary["status"] == "ok");
    REQUIRE(summary["scenario"] == "check");
    REQUIRE(summary["regime"]["ok"].get<bool>());
    REQUIRE(summary["identity_max_error"].get<double>() < 1e-9);
}

TEST_CASE("usage errors exit with code 1", "[cli]") {
    const auto dir = fresh_dir("usage");
    REQUIRE(cli::run({}) == 1);
    REQUIRE(cli::run({"bogus"}) == 1);
    REQUIRE(cli::run({"check", "--config", (dir / "missing.cfg").string(), "--out",
                      dir.string()}) == 1);
    const auto cfg = write_cfg(dir, "[scenario]\nnot_a_real_key = 1\n");
    REQUIRE(cli::run({"check", "--config", cfg.string(), "--out", dir.string()}) == 1);
}

TEST_CASE("help exits cleanly", "[cli]") {
    REQUIRE(cli::run({"--help"}) == 0);
}

TEST_CASE("subcritical state exits with code 2 and a written summary", "[cli]") {
    const auto dir = fresh_dir("check_sub");
    const auto cfg = write_cfg(dir, "[scenario]\nphi = 2.0\n");
    REQUIRE(cli::run({"check", "--config", cfg.string(), "--out", dir.string()}) == 2);
    const auto summary = read_summary(dir);
    REQUIRE(summary["status"] == "fail");
    REQUIRE(!summary["regime"]["ok"].get<bool>());
}

TEST_CASE("oversized perturbation is reported as a lost regime", "[cli]") {
    const auto dir = fresh_dir("picard_big");
    const auto cfg = write_cfg(dir, "[grid]\nn = 17\n[scenario]\namplitude = 1.0\n");
    REQUIRE(cli::run({"picard", "--config", cfg.string(), "--out", dir.string()}) == 2);
    const auto summary = read_summary(dir);
    REQUIRE(summary["status"] == "fail");
    REQUIRE(summary["error_kind"] == "RegimeLost");
}

TEST_CASE("picard subcommand converges on the desk scenario", "[cli]") {
    const auto dir = fresh_dir("picard_ok");
    const auto cfg = write_cfg(dir, "[grid]\nn = 17\n[scenario]\nt_end = 0.02\n");
    REQUIRE(cli::run({"picard", "--config", cfg.string(), "--out", dir.string()}) == 0);
    const auto summary = read_summary(dir);
    REQUIRE(summary["status"] == "ok");
    REQUIRE(summary["converged"].get<bool>());
    REQUIRE(summary["max_ratio"].get<double>() < 1.0);
    REQUIRE(fs::exists(dir / "iteration.csv"));
    REQUIRE(fs::exists(dir / "final.csv"));
}

TEST_CASE("linear subcommand writes its outputs and is deterministic", "[cli]") {
    const auto dir1 = fresh_dir("linear_a");
    const auto dir2 = fresh_dir("linear_b");
    const std::string cfg_text = "[grid]\nn = 17\n[scenario]\nt_end = 0.1\n";
    const auto cfg1 = write_cfg(dir1, cfg_text);
    const auto cfg2 = write_cfg(dir2, cfg_text);
    REQUIRE(cli::run({"linear", "--config", cfg1.string(), "--out", dir1.string()}) == 0);
    REQUIRE(cli::run({"linear", "--config", cfg2.string(), "--out", dir2.string()}) == 0);

    for (const char* name : {"final.csv", "energy.csv", "summary.json"}) {
        REQUIRE(fs::exists(dir1 / name));
        REQUIRE(slurp(dir1 / name) == slurp(dir2 / name));
    }
    const auto summary = read_summary(dir1);
    REQUIRE(summary["status"] == "ok");
    REQUIRE(summary["bound_ok"].get<bool>());

    std::ifstream energy(dir1 / "energy.csv");
    std::string first;
    std::getline(energy, first);
    REQUIRE(first == "# schema=energy version=1");
}

TEST_CASE("stationary subcommand emits the marched profile", "[cli]") {
    const auto dir = fresh_dir("stationary");
    const auto cfg = write_cfg(dir,
                               "[grid]\nn = 17\n[params]\nf = 0.05\n"
                               "[scenario]\nkind = y_independent\n");
    REQUIRE(cli::run({"stationary", "--config", cfg.string(), "--out", dir.string()}) ==
            0);
    const auto summary = read_summary(dir);
    REQUIRE(summary["status"] == "ok");
    REQUIRE(summary["kind"] == "y_independent");
    REQUIRE(summary["residual_norm"].get<double>() < 1e-4);
    REQUIRE(fs::exists(dir / "stationary.csv"));
    const State prof = io::load_snapshot(dir / "stationary.csv");
    REQUIRE(prof.grid().nx == 17);
}

TEST_CASE("energy subcommand runs the whole suite", "[cli]") {
    const auto dir = fresh_dir("energy");
    const auto cfg = write_cfg(dir, "[grid]\nn = 17\n");
    REQUIRE(cli::run({"energy", "--config", cfg.string(), "--out", dir.string()}) == 0);
    const auto summary = read_summary(dir);
    REQUIRE(summary["status"] == "ok");
    REQUIRE(summary["monotone_constant"].get<bool>());
    REQUIRE(summary["runs"].size() == 3);
    for (const char* name : {"energy_constant.csv", "energy_varying.csv",
                             "energy_forced.csv"}) {
        REQUIRE(fs::exists(dir / name));
    }
}

TEST_CASE("convergence study lands inside the configured window", "[cli]") {
    const auto dir = fresh_dir("converge");
    const auto cfg = write_cfg(dir,
                               "[scenario]\nstudy = resolvent\nlevels = 2\nbase = 33\n"
                               "order_lo = 0.5\norder_hi = 1.5\n");
    REQUIRE(cli::run({"converge", "--config", cfg.string(), "--out", dir.string()}) == 0);
    const auto summary = read_summary(dir);
    REQUIRE(summary["status"] == "ok");
    REQUIRE(summary["order"].size() == 1);
    REQUIRE(fs::exists(dir / "convergence.csv"));
}

TEST_CASE("output directory falls back to the environment", "[cli]") {
    const auto dir = fresh_dir("env_out");
    REQUIRE(setenv("SWERECT_OUT", dir.string().c_str(), 1) == 0);
    const int code = cli::run({"check"});
    REQUIRE(unsetenv("SWERECT_OUT") == 0);
    REQUIRE(code == 0);
    REQUIRE(fs::exists(dir / "summary.json"));
}
