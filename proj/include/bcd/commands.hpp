#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "bcd/config.hpp"
#include "bcd/cost_model.hpp"
#include "bcd/io.hpp"
#include "bcd/spectral.hpp"
#include "bcd/theory.hpp"

namespace bcd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolations = 2;
inline constexpr int kExitIo = 3;

struct TrainArtifacts {
    RunResult result;
    RunSummary summary;
};

// Builds the objective/partition/run-config from cfg, runs the training loop
// and assembles the run summary. No file I/O.
TrainArtifacts run_experiment(const ExperimentConfig& cfg);

// Writes trace.csv, theta_init.bin, theta_final.bin and summary.json into
// out_dir. Returns an exit code; failures are reported on err.
int cmd_train(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& err);

struct CheckOptions {
    bool force_theorem = false;   // run descent checks even past the lr bound
    std::vector<double> deltas;   // enables the complexity check when non-empty
    double L_override = std::numeric_limits<double>::quiet_NaN();
    double L_bar_override = std::numeric_limits<double>::quiet_NaN();
};

struct CheckOutcome {
    std::vector<CheckReport> reports;
    std::vector<std::string> skipped;  // checks not applicable to this run
    ComplexityReport complexity;
    bool complexity_ran = false;
    TheoryEnv env;
    long long violations = 0;

    std::string to_json() const;
};

// Pure evaluation of every applicable inequality over a stored trace.
CheckOutcome run_checks(const TrainTrace& trace, const RunSummary& summary,
                        const CheckOptions& options);

// Reads <run_dir>/trace.csv and <run_dir>/summary.json, writes
// <run_dir>/check_report.json and prints the report. Exit 0 iff no violations.
int cmd_check(const std::string& run_dir, const CheckOptions& options, std::ostream& out,
              std::ostream& err);

// Long-format CSV: name,rows,cols,effective_rank,flag,r,cvar
std::string rank_report_csv(const std::vector<SpectralReport>& reports);

// Compares two parameter snapshots and writes the per-matrix spectrum CSV.
int cmd_rank(const std::string& init_path, const std::string& final_path,
             const std::string& out_csv, double threshold, std::ostream& out, std::ostream& err);

// Evaluates the analytical cost formulas; method empty means all methods.
int cmd_cost(const CostSpec& spec, const std::string& method, bool csv, std::ostream& out,
             std::ostream& err);

}  // namespace bcd
