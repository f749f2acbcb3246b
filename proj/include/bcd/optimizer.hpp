#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bcd/objective.hpp"
#include "bcd/partition.hpp"

namespace bcd {

enum class Rule { badam, bsgd, adam, sgd };
enum class Mode { deterministic, stochastic };
enum class Schedule { constant, cosine };

std::string to_string(Rule r);
Rule rule_from_string(const std::string& s);
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
std::string to_string(Schedule s);
Schedule schedule_from_string(const std::string& s);

struct RunConfig {
    double alpha = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double lambda = 1e-8;       // stability constant in the update denominator
    double weight_decay = 0.0;  // decoupled
    int K = 10;                 // inner steps per block activation
    Ordering ordering = Ordering::ascending;
    Mode mode = Mode::deterministic;
    int batch_size = 16;
    std::uint64_t seed = 0;
    int max_epochs = 100;   // T
    double grad_tol = 0.0;  // delta; 0 disables the gradient stop
    Schedule schedule = Schedule::constant;
    double init_scale = 1.0;
    bool record_timing = false;  // wall_ms stays empty unless enabled

    // throws on invalid settings; theory mode additionally requires lambda < 1
    void validate(bool theory_mode = false) const;
};

// Per-active-block optimizer state. Zeroed on every block activation and
// discarded when the block is released.
struct InnerState {
    std::vector<double> m;
    std::vector<double> v;
    long long k = 0;

    void reset(std::size_t len) {
        m.assign(len, 0.0);
        v.assign(len, 0.0);
        k = 0;
    }
};

struct StepStats {
    double h_min = std::numeric_limits<double>::quiet_NaN();
    double h_max = std::numeric_limits<double>::quiet_NaN();
};

// One Adam step with bias correction: advances (m, v, k), writes the additive
// update (including optional decoupled weight decay) and reports the extreme
// adaptive step-size entries 1/(sqrt(v_hat)+lambda).
StepStats adam_inner_step(InnerState& state, std::span<const double> g, const RunConfig& cfg,
                          double lr, std::span<const double> theta_block,
                          std::span<double> update);

// Plain gradient step, no momentum; only the counter k advances.
StepStats sgd_inner_step(InnerState& state, std::span<const double> g, const RunConfig& cfg,
                         double lr, std::span<const double> theta_block,
                         std::span<double> update);

struct TraceRow {
    int t = 0;  // block-epoch
    int i = 0;  // block id
    int k = 0;  // inner step within the activation, 1-based
    double loss = std::numeric_limits<double>::quiet_NaN();
    double block_grad_norm = std::numeric_limits<double>::quiet_NaN();
    double full_grad_norm = std::numeric_limits<double>::quiet_NaN();
    double h_min = std::numeric_limits<double>::quiet_NaN();
    double h_max = std::numeric_limits<double>::quiet_NaN();
    double wall_ms = std::numeric_limits<double>::quiet_NaN();
};

// Append-only record of a run. Row fields describe the state after the step's
// update; in deterministic mode loss and full_grad_norm are full-batch
// quantities, in stochastic mode loss is the step's batch loss and
// full_grad_norm is only filled on the last step of each epoch.
struct TrainTrace {
    std::vector<TraceRow> rows;
    double initial_loss = std::numeric_limits<double>::quiet_NaN();
    double initial_grad_norm = std::numeric_limits<double>::quiet_NaN();
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
    int epochs_run = 0;
    std::string termination = "max_epochs";  // max_epochs | grad_tol
};

// Test instrumentation hooks; production runs pass nullptr.
struct StepObserver {
    virtual ~StepObserver() = default;
    virtual void on_block_start(int /*t*/, int /*block_id*/, const ParamStore&) {}
    virtual void on_block_grad(int /*t*/, int /*block_id*/, int /*k*/,
                               const ParamStore& /*point*/, const Block&,
                               std::span<const double> /*g*/) {}
    virtual void on_block_end(int /*t*/, int /*block_id*/, const ParamStore&) {}
};

// Deterministic data feed. Deterministic mode always yields the full batch;
// stochastic mode yields batches of exactly B indices drawn cyclically from a
// reshuffled-per-pass data order.
class BatchStream {
public:
    BatchStream(std::uint64_t seed, std::size_t n, int batch_size, Mode mode);
    const std::vector<int>& next();

private:
    void reshuffle();

    std::uint64_t seed_;
    std::size_t n_;
    int batch_size_;
    Mode mode_;
    std::vector<int> order_;
    std::vector<int> batch_;
    std::size_t pos_ = 0;
    std::uint64_t pass_ = 0;
};

struct RunResult {
    ParamStore theta_init;
    ParamStore theta;
    TrainTrace trace;
};

// Wall-clock reference for trace timing; rows stay empty when absent.
struct RunTimer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

// One block-epoch of BCD updates: visit blocks in the epoch's order; per block
// zero-init inner state, run exactly K inner steps on the block gradient at
// the up-to-date point, then discard the state.
void run_block_epoch(ParamStore& theta, const Objective& obj, const BlockPartition& base,
                     const RunConfig& cfg, Rule rule, int t, TrainTrace& trace,
                     BatchStream& stream, long long total_steps, long long& steps_done,
                     StepObserver* observer = nullptr, const RunTimer* timer = nullptr);

// Full training loop; rule must be badam or bsgd. theta0 overrides the
// seed-derived initial point when given.
RunResult run_training(const Objective& obj, const BlockPartition& partition,
                       const RunConfig& cfg, Rule rule, StepObserver* observer = nullptr,
                       const ParamStore* theta0 = nullptr);

// Full-parameter baseline with persistent optimizer state; rule must be adam
// or sgd. K steps are grouped per trace epoch so paired comparisons line up.
RunResult run_full_baseline(const Objective& obj, const RunConfig& cfg, Rule rule,
                            const ParamStore* theta0 = nullptr);

// K heuristic: round n/(B*D) to the nearest integer (half away from zero),
// then clamp to [50, 100]
int suggest_K(long long n, long long B, long long D);

}  // namespace bcd
