#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "bcd/optimizer.hpp"

namespace bcd {

// Constants entering the deterministic convergence statements. G is the
// observed trajectory gradient bound floored at 1; L / L_bar / L_min are the
// global, max-block and min-block smoothness constants.
struct TheoryEnv {
    double L = 0.0;
    double L_bar = 0.0;
    double L_min = 0.0;
    double G = 1.0;
    double lambda = 0.1;
    double alpha = 0.0;
    int K = 1;
    int D = 1;

    void validate() const;
};

// Largest learning rate admitted by the descent theorem:
// (lambda / (2 L_bar K)) * min{ 1/K, lambda / (12 G) }
double max_theory_lr(const TheoryEnv& env);

// Per-epoch descent constant
// alpha K / (16 G (1 + (2 alpha^2 K L^2 D / lambda^2)
//                     ((4 L_bar^2 alpha^2 K^3 / lambda^6) + 1)))
double theorem_epoch_constant(const TheoryEnv& env);

// max block-gradient norm over the trace, floored at 1
double observed_grad_bound(const TrainTrace& trace);

struct CheckReport {
    std::string name;
    long long checked = 0;
    long long violations = 0;
    // smallest signed slack (bound minus observed); negative means violated
    double worst_slack = std::numeric_limits<double>::infinity();
    std::vector<std::string> notes;

    bool pass() const { return violations == 0; }
};

// Start/end view of one block-epoch, reconstructed from a deterministic-mode
// trace (rows carry full-batch loss after each step).
struct EpochView {
    int t = 0;
    double loss_start = 0.0;
    double loss_end = 0.0;
    double grad_norm_start = 0.0;
};

// One block activation: loss around its K inner steps plus the first inner
// gradient norm.
struct BlockView {
    int t = 0;
    int block_id = 0;
    double loss_before = 0.0;
    double loss_after = 0.0;
    double g_first_norm = 0.0;
};

std::vector<EpochView> epoch_views(const TrainTrace& trace);
std::vector<BlockView> block_views(const TrainTrace& trace);

// every recorded adaptive entry must lie in [1/(G+lambda), 1/lambda]
CheckReport check_step_size_bounds(const TrainTrace& trace, const TheoryEnv& env);

// refined one-block inequality:
// loss_after - loss_before <= -(alpha K / (8 G)) * |g_first|^2
CheckReport check_block_descent(const TrainTrace& trace, const TheoryEnv& env);

// full theorem inequality with the exactly computed constant
CheckReport check_epoch_descent(const TrainTrace& trace, const TheoryEnv& env);

// loss never increases across a block-epoch (used where smoothness constants
// are unknown)
CheckReport check_monotone_descent(const TrainTrace& trace);

struct DeltaStat {
    double delta = 0.0;
    int epochs = 0;  // first epoch index with grad norm <= delta
    bool reached = false;
};

struct ComplexityReport {
    CheckReport bound;  // min-gradient bound 32 G (L0 - L*) / (alpha K T) at every epoch
    std::vector<DeltaStat> stats;
    double slope = std::numeric_limits<double>::quiet_NaN();  // log T vs log(1/delta)
    bool budget_exhausted = false;
};

ComplexityReport check_complexity(const TrainTrace& trace, const TheoryEnv& env,
                                  std::span<const double> deltas, double loss_opt = 0.0);

}  // namespace bcd
