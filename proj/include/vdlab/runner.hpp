#pragma once

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "vdlab/config.hpp"

namespace vdlab::runner {

inline constexpr const char* kVersion = "0.1.0";

/// One pass/fail row. An upper-bound check compares `measured` with
/// `bound_hi`; a range check requires [measured, measured_hi] inside
/// [bound_lo, bound_hi].
struct Check {
    std::string id;
    std::string description;
    bool range = false;
    double measured = 0.0;
    double measured_hi = 0.0;
    double bound_lo = 0.0;
    double bound_hi = 0.0;
    bool passed = false;

    static Check upper(std::string id, std::string description, double measured, double bound);
    static Check within(std::string id, std::string description, const std::vector<double>& values, double lo,
                        double hi);

    std::string summary() const;
};

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::string name;  // file name
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    // Header line, then one line per row; doubles as %.17g.
    void write_csv(std::ostream& out) const;
};

struct ExperimentResult {
    Experiment experiment = Experiment::identity_suite;
    std::string derivative_mode;
    std::vector<Check> checks;
    std::vector<Table> tables;
    nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();

    bool passed() const;
};

ExperimentResult run_experiment(const RunConfig& cfg, Experiment e);

// Manifest, checks, table index and diagnostics. The timestamp is taken
// from SOURCE_DATE_EPOCH (0 when unset) so reports are reproducible.
nlohmann::ordered_json build_report(const RunConfig& cfg, const std::vector<ExperimentResult>& results);

struct RunOutcome {
    int exit_code = 0;  // 0 all checks pass, 2 some check failed
    std::vector<ExperimentResult> results;
    std::string output_dir;
};

// Runs the configured experiment (or all of them), writes report.json and
// the CSV tables into cfg.output_dir and prints one line per check. Several
// experiments run concurrently, each writing into its own subdirectory; the
// top-level report merges them in name order. Errors propagate as exceptions.
RunOutcome run(const RunConfig& cfg, std::ostream& log);

}  // namespace vdlab::runner
