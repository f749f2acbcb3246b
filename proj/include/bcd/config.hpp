#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bcd/objective.hpp"
#include "bcd/optimizer.hpp"
#include "bcd/partition.hpp"

namespace bcd {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Flat key = value experiment description. Defaults describe a deterministic
// BAdam run on a small quadratic.
struct ExperimentConfig {
    std::string out_dir = "out";
    std::string name = "run";

    std::string obj_kind = "quadratic";  // quadratic | logreg | mlp
    int obj_dim = 16;
    std::vector<double> obj_eigs;  // overrides the linspace spectrum when set
    double eig_min = 1.0;
    double eig_max = 10.0;
    double l2 = 0.01;
    double noise = 0.1;
    int mlp_in = 32;
    int mlp_hidden = 32;
    int mlp_out = 32;
    double init_scale = 1.0;

    int n = 256;
    int batch_size = 16;

    int D = 4;
    Ordering ordering = Ordering::ascending;
    std::string partition_scheme = "uniform";  // uniform | modules

    Rule rule = Rule::badam;
    double alpha = 1e-3;
    bool alpha_theory = false;  // opt.alpha = theory: use the descent-theorem bound
    double beta1 = 0.9;
    double beta2 = 0.999;
    double lambda = 1e-8;
    int K = 10;
    bool K_auto = false;  // opt.K = auto: use the n/(BD) heuristic
    double weight_decay = 0.0;
    Schedule schedule = Schedule::constant;

    Mode mode = Mode::deterministic;
    std::uint64_t seed = 0;
    int T = 100;
    double delta = 0.0;
    bool timing = false;
};

// Parses `key = value` lines with '#' comments. Unknown keys, duplicate keys
// and malformed values raise ConfigError naming the offending line.
ExperimentConfig parse_config(std::string_view text);

// Applies a single "key = value" assignment on top of an existing config
// (used for command-line overrides, where re-setting a key is allowed).
void apply_config_override(ExperimentConfig& cfg, const std::string& assignment);

std::unique_ptr<Objective> make_objective(const ExperimentConfig& cfg);
BlockPartition make_partition(const ExperimentConfig& cfg, const Objective& obj);

// Resolves opt.K = auto and opt.alpha = theory against the concrete objective
// and partition.
RunConfig make_run_config(const ExperimentConfig& cfg, const Objective& obj,
                          const BlockPartition& partition);

}  // namespace bcd
