#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "vdlab/config.hpp"
#include "vdlab/error.hpp"
#include "vdlab/runner.hpp"

using namespace vdlab;
using namespace vdlab::runner;

namespace {

std::string config_error(const std::string& text, const std::vector<std::string>& overrides = {}) {
    try {
        (void)parse_config(text, "t.cfg", overrides);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("empty config gives the schema defaults") {
    const auto cfg = parse_config("", "empty");
    CHECK(cfg.experiment == Experiment::identity_suite);
    CHECK_FALSE(cfg.all);
    CHECK(cfg.seed == 1);
    CHECK(cfg.grid.points_per_axis == 32);
    CHECK(cfg.physics.include_conformal);
    CHECK(cfg.numerics.tol_dispersion == 1e-12);
    REQUIRE(cfg.echo.size() == config_schema().size());
    for (std::size_t i = 0; i < cfg.echo.size(); ++i) CHECK(cfg.echo[i].first == config_schema()[i].name);
}

TEST_CASE("sections, comments and values are parsed") {
    const auto cfg = parse_config(
        "# header\n[run]\nexperiment = lambda-profile  # trailing\nseed = 7\n\n[physics]\nmass = 1.25\n"
        "masses = 0.9, 0.3, 0.1\n[grid]\nboundary = one_sided\n",
        "t.cfg");
    CHECK(cfg.experiment == Experiment::lambda_profile);
    CHECK(cfg.seed == 7);
    CHECK(cfg.physics.mass == 1.25);
    REQUIRE(cfg.physics.masses.size() == 3);
    CHECK(cfg.physics.masses[2] == doctest::Approx(0.1));
    CHECK(cfg.grid.boundary == Boundary::one_sided);
}

TEST_CASE("parse errors name the offending line") {
    CHECK(contains(config_error("[run]\nseed = 1\nbogus = 2\n"), "t.cfg:3"));
    CHECK(contains(config_error("[run]\nseed = 1\nbogus = 2\n"), "unknown key 'run.bogus'"));
    CHECK(contains(config_error("[nowhere]\n"), "unknown section"));
    CHECK(contains(config_error("seed = 1\n"), "outside of any [section]"));
    CHECK(contains(config_error("[run]\nseed\n"), "t.cfg:2"));
    CHECK(contains(config_error("[run\n"), "malformed section"));
    const auto dup = config_error("[run]\nseed = 1\nseed = 2\n");
    CHECK(contains(dup, "t.cfg:3"));
    CHECK(contains(dup, "t.cfg:2"));
}

TEST_CASE("bad values are rejected with the key name") {
    const auto small = config_error("[grid]\npoints_per_axis = 3\n");
    CHECK(contains(small, "t.cfg:2"));
    CHECK(contains(small, "grid.points_per_axis"));
    CHECK(contains(small, ">= 5"));
    CHECK(contains(config_error("[physics]\nmass = abc\n"), "physics.mass"));
    CHECK(contains(config_error("[run]\nexperiment = nope\n"), "identity-suite"));
    CHECK(contains(config_error("[run]\nrefine_levels = 9\n"), "run.refine_levels"));
    CHECK(contains(config_error("[physics]\nmasses = 0.8, 0.4, 0.3\n"), "geometric"));
    CHECK(contains(config_error("[physics]\nmasses = 0.4, 0.8\n"), "decrease"));
    CHECK(contains(config_error("[physics]\nx0 = 9\n"), "physics.x0"));
    CHECK(contains(config_error("[numerics]\norder = 4\n[grid]\ntime_points = 5\n"), ">= 6"));
}

TEST_CASE("overrides apply after the file") {
    const auto cfg = parse_config("[run]\nseed = 3\n", "t.cfg", {"run.seed=11", "physics.hbar = 0.5"});
    CHECK(cfg.seed == 11);
    CHECK(cfg.physics.hbar == 0.5);
    CHECK(contains(config_error("", {"run.nothing=1"}), "unknown key"));
    CHECK(contains(config_error("", {"run.seed"}), "section.key=value"));
    CHECK(contains(config_error("", {"grid.points_per_axis=2"}), "--set grid.points_per_axis"));
    CHECK(parse_config("", "t", {"run.experiment=all"}).all);
}

TEST_CASE("experiment names round trip") {
    const auto all = all_experiments();
    CHECK(all.size() == 7);
    for (std::size_t i = 0; i < all.size(); ++i) {
        CHECK(experiment_from_string(to_string(all[i])) == all[i]);
        if (i) CHECK(std::string(to_string(all[i - 1])) < std::string(to_string(all[i])));
    }
    CHECK_THROWS_AS(experiment_from_string("bogus"), ConfigError);
}

TEST_CASE("checks") {
    const auto nan = std::numeric_limits<double>::quiet_NaN();
    CHECK(Check::upper("a", "", 1e-13, 1e-12).passed);
    CHECK(Check::upper("a", "", 0.0, 0.0).passed);
    CHECK_FALSE(Check::upper("a", "", 2e-12, 1e-12).passed);
    CHECK_FALSE(Check::upper("a", "", nan, 1.0).passed);
    CHECK(Check::within("r", "", {3.9, 4.1}, 3.5, 4.5).passed);
    CHECK_FALSE(Check::within("r", "", {3.9, 4.6}, 3.5, 4.5).passed);
    CHECK_FALSE(Check::within("r", "", {}, 3.5, 4.5).passed);
    CHECK_FALSE(Check::within("r", "", {nan}, 3.5, 4.5).passed);
    CHECK(contains(Check::upper("x.y", "", 1.0, 2.0).summary(), "PASS  x.y"));
}

TEST_CASE("csv uses round-trip precision") {
    Table t{"t.csv", {"a", "b", "c"}, {{0.1, 3LL, std::string("s")}, {-2.5, -1LL, std::string("")}}};
    std::ostringstream out;
    t.write_csv(out);
    CHECK(out.str() == "a,b,c\n0.10000000000000001,3,s\n-2.5,-1,\n");
}

TEST_CASE("dispersion scan runs and reports") {
    auto cfg = parse_config("[run]\nexperiment = dispersion-scan\nrefine_levels = 2\n", "t.cfg");
    const auto r = run_experiment(cfg, Experiment::dispersion_scan);
    CHECK(r.passed());
    REQUIRE(r.tables.size() == 1);
    CHECK(r.tables[0].name == "dispersion.csv");
    CHECK(r.tables[0].columns.front() == "k");
    CHECK(r.tables[0].rows.size() == 3 * cfg.physics.k_points);
}

TEST_CASE("neutrino limit with zero coupling extrapolates to zero") {
    auto cfg = parse_config("[physics]\nlambda0 = 0\n", "t.cfg");
    const auto r = run_experiment(cfg, Experiment::neutrino_limit);
    CHECK(r.passed());
    const auto& rows = r.tables.at(0).rows;
    REQUIRE(rows.size() == cfg.physics.masses.size() + 1);
    CHECK(std::get<std::string>(rows.back().back()) == "extrapolated");
    CHECK(std::get<double>(rows.back()[1]) == 0.0);
}

TEST_CASE("run writes byte-identical reports") {
    const auto base = std::filesystem::temp_directory_path() / "vdlab-runner-test";
    std::filesystem::remove_all(base);
    auto cfg = parse_config("[run]\nexperiment = lambda-profile\n", "t.cfg");
    std::ostringstream log;
    cfg.output_dir = (base / "a").string();
    const auto out = run(cfg, log);
    CHECK(out.exit_code == 0);
    cfg.output_dir = (base / "b").string();
    run(cfg, log);
    const auto a = slurp(base / "a" / "report.json");
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(base / "b" / "report.json"));
    CHECK(std::filesystem::exists(base / "a" / "lambda_profile.csv"));
    const auto report = nlohmann::json::parse(a);
    CHECK(report["manifest"]["tool"] == "vdlab");
    CHECK(report["manifest"]["experiment"] == "lambda-profile");
    CHECK(report["manifest"]["config"].size() == config_schema().size());
    CHECK_FALSE(report["checks"].empty());
    std::filesystem::remove_all(base);
}
