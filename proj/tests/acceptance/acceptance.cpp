#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "vdlab/config.hpp"
#include "vdlab/runner.hpp"

using namespace vdlab::runner;
namespace fs = std::filesystem;

namespace {

struct Criterion {
    std::string name;
    std::vector<std::pair<Experiment, std::string>> checks;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    const std::string config = argc > 1 ? argv[1] : VDLAB_DEFAULT_CONFIG;
    const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "vdlab-acceptance";

    RunConfig cfg;
    try {
        cfg = load_config(config);
    } catch (const std::exception& e) {
        std::cerr << "acceptance: " << e.what() << '\n';
        return 1;
    }

    const std::vector<Criterion> criteria{
        {"shift-theorem",
         {{Experiment::convergence_suite, "shift.ratio"},
          {Experiment::convergence_suite, "shift.analytic"},
          {Experiment::identity_suite, "shift.analytic"}}},
        {"phase-identity",
         {{Experiment::convergence_suite, "phase-identity.ratio"},
          {Experiment::identity_suite, "phase-identity.analytic"}}},
        {"plane-wave-reduction", {{Experiment::identity_suite, "plane-wave.reduction"}}},
        {"action-stationarity",
         {{Experiment::action_gradient, "action.gradient"}, {Experiment::action_gradient, "action.stationary"}}},
        {"lambda-solver",
         {{Experiment::lambda_profile, "lambda.rk4-order"},
          {Experiment::lambda_profile, "lambda.closure"},
          {Experiment::lambda_profile, "lambda.homogeneity"}}},
        {"vacuum-mass-identity",
         {{Experiment::identity_suite, "vacuum-mass.identity"},
          {Experiment::identity_suite, "vacuum-mass.zero-lambda"}}},
        {"clifford-and-squaring",
         {{Experiment::identity_suite, "clifford.anticommutator"},
          {Experiment::identity_suite, "clifford.slash-square"},
          {Experiment::convergence_suite, "dirac.squaring"}}},
        {"dispersion-constant-mass", {{Experiment::dispersion_scan, "dispersion.closed-form"}}},
    };

    std::map<Experiment, ExperimentResult> results;
    bool all_ok = true;
    for (const auto& c : criteria) {
        bool ok = true;
        std::string detail;
        for (const auto& [e, id] : c.checks) {
            try {
                if (!results.count(e)) results.emplace(e, run_experiment(cfg, e));
            } catch (const std::exception& ex) {
                ok = false;
                detail += std::string(" ") + to_string(e) + " threw: " + ex.what() + ";";
                continue;
            }
            const Check* found = nullptr;
            for (const auto& k : results.at(e).checks) {
                if (k.id == id) found = &k;
            }
            if (!found) {
                ok = false;
                detail += " " + id + " missing;";
                continue;
            }
            ok = ok && found->passed;
            detail += " " + found->summary() + ";";
        }
        all_ok = all_ok && ok;
        std::cout << (ok ? "PASS " : "FAIL ") << c.name << " :" << detail << '\n';
    }

    bool same = false;
    std::string detail;
    try {
        std::ostringstream sink;
        fs::remove_all(scratch);
        RunConfig d = cfg;
        d.output_dir = (scratch / "a").string();
        run(d, sink);
        d.output_dir = (scratch / "b").string();
        run(d, sink);
        const auto a = slurp(scratch / "a" / "report.json");
        same = !a.empty() && a == slurp(scratch / "b" / "report.json");
        std::size_t files = 0;
        for (const auto& f : fs::recursive_directory_iterator(scratch / "a")) {
            if (!f.is_regular_file()) continue;
            ++files;
            same = same && slurp(f.path()) == slurp(scratch / "b" / fs::relative(f.path(), scratch / "a"));
        }
        detail = " report.json " + std::to_string(a.size()) + " bytes, " + std::to_string(files) + " files " +
                 (same ? "identical" : "different");
    } catch (const std::exception& ex) {
        detail = std::string(" threw: ") + ex.what();
    }
    all_ok = all_ok && same;
    std::cout << (same ? "PASS " : "FAIL ") << "determinism :" << detail << '\n';
    return all_ok ? 0 : 1;
}
