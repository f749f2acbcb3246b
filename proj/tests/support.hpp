#pragma once

// Shared helpers for the test binaries: theory-environment construction and
// the pre-run learning-rate selection used by the descent checks.

#include <algorithm>
#include <cmath>

#include "bcd/objective.hpp"
#include "bcd/optimizer.hpp"
#include "bcd/theory.hpp"

namespace bcd::testing {

struct SmoothnessSummary {
    double L = 0.0;
    double L_bar = 0.0;
    double L_min = 0.0;
};

inline SmoothnessSummary smoothness_summary(const Objective& obj, const BlockPartition& p) {
    SmoothnessSummary s;
    s.L = obj.smoothness();
    s.L_min = std::numeric_limits<double>::infinity();
    for (const auto& block : p.blocks) {
        const double li = obj.block_smoothness(block);
        s.L_bar = std::max(s.L_bar, li);
        s.L_min = std::min(s.L_min, li);
    }
    return s;
}

// Learning rate admitted by the descent theorem, chosen before the run: the
// trajectory gradient bound follows from the initial gap because the theorem
// keeps the loss non-increasing.
inline double theory_alpha(const Objective& obj, const BlockPartition& p, const RunConfig& cfg) {
    const SmoothnessSummary s = smoothness_summary(obj, p);
    const ParamStore theta0 = obj.initial_point(cfg.seed, cfg.init_scale);
    const std::vector<int> batch = full_batch(obj);
    const double loss0 = eval_loss(obj, theta0, batch);
    double opt = obj.loss_optimum();
    if (!std::isfinite(opt)) opt = 0.0;
    TheoryEnv env;
    env.L = s.L;
    env.L_bar = s.L_bar;
    env.L_min = s.L_min;
    env.G = std::max(1.0, std::sqrt(std::max(2.0 * s.L * (loss0 - opt), 0.0)));
    env.lambda = cfg.lambda;
    env.alpha = 1.0;
    env.K = cfg.K;
    env.D = p.block_count();
    return max_theory_lr(env);
}

// Environment for post-run checks: observed gradient bound, exact constants.
inline TheoryEnv env_from_run(const Objective& obj, const BlockPartition& p, const RunConfig& cfg,
                              const TrainTrace& trace) {
    const SmoothnessSummary s = smoothness_summary(obj, p);
    TheoryEnv env;
    env.L = s.L;
    env.L_bar = s.L_bar;
    env.L_min = s.L_min;
    env.G = observed_grad_bound(trace);
    env.lambda = cfg.lambda;
    env.alpha = cfg.alpha;
    env.K = cfg.K;
    env.D = p.block_count();
    return env;
}

}  // namespace bcd::testing
