#include "bcd/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcd {

namespace {

constexpr double kSlack = 1e-12;  // absolute tolerance on every inequality

void note_violation(CheckReport& report, std::string text) {
    if (report.notes.size() < 8) report.notes.push_back(std::move(text));
}

}  // namespace

void TheoryEnv::validate() const {
    if (!(G >= 1.0)) throw std::invalid_argument("G must be at least 1");
    if (!(lambda > 0.0 && lambda < 1.0)) throw std::invalid_argument("lambda must lie in (0,1)");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (K < 1 || D < 1) throw std::invalid_argument("K and D must be at least 1");
    if (!(L_bar > 0.0) || !(L >= 0.0)) throw std::invalid_argument("smoothness constants missing");
}

double max_theory_lr(const TheoryEnv& env) {
    env.validate();
    const double k = static_cast<double>(env.K);
    return env.lambda / (2.0 * env.L_bar * k) * std::min(1.0 / k, env.lambda / (12.0 * env.G));
}

double theorem_epoch_constant(const TheoryEnv& env) {
    env.validate();
    const double a = env.alpha;
    const double k = static_cast<double>(env.K);
    const double d = static_cast<double>(env.D);
    const double l2 = env.lambda * env.lambda;
    const double l6 = l2 * l2 * l2;
    const double inner = 4.0 * env.L_bar * env.L_bar * a * a * k * k * k / l6 + 1.0;
    const double nuisance = 1.0 + 2.0 * a * a * k * env.L * env.L * d / l2 * inner;
    return a * k / (16.0 * env.G * nuisance);
}

double observed_grad_bound(const TrainTrace& trace) {
    double g = 1.0;
    for (const auto& row : trace.rows)
        if (std::isfinite(row.block_grad_norm)) g = std::max(g, row.block_grad_norm);
    return g;
}

std::vector<EpochView> epoch_views(const TrainTrace& trace) {
    std::vector<EpochView> views;
    double loss = trace.initial_loss;
    double gnorm = trace.initial_grad_norm;
    std::size_t i = 0;
    while (i < trace.rows.size()) {
        const int t = trace.rows[i].t;
        std::size_t j = i;
        while (j + 1 < trace.rows.size() && trace.rows[j + 1].t == t) ++j;
        EpochView v;
        v.t = t;
        v.loss_start = loss;
        v.grad_norm_start = gnorm;
        v.loss_end = trace.rows[j].loss;
        views.push_back(v);
        loss = trace.rows[j].loss;
        gnorm = trace.rows[j].full_grad_norm;
        i = j + 1;
    }
    return views;
}

std::vector<BlockView> block_views(const TrainTrace& trace) {
    std::vector<BlockView> views;
    double loss = trace.initial_loss;
    std::size_t i = 0;
    while (i < trace.rows.size()) {
        const int t = trace.rows[i].t;
        const int id = trace.rows[i].i;
        std::size_t j = i;
        while (j + 1 < trace.rows.size() && trace.rows[j + 1].t == t && trace.rows[j + 1].i == id)
            ++j;
        BlockView v;
        v.t = t;
        v.block_id = id;
        v.loss_before = loss;
        v.loss_after = trace.rows[j].loss;
        v.g_first_norm = trace.rows[i].block_grad_norm;
        views.push_back(v);
        loss = trace.rows[j].loss;
        i = j + 1;
    }
    return views;
}

CheckReport check_step_size_bounds(const TrainTrace& trace, const TheoryEnv& env) {
    env.validate();
    CheckReport report;
    report.name = "step_size_bounds";
    const double lower = 1.0 / (env.G + env.lambda);
    const double upper = 1.0 / env.lambda;
    for (const auto& row : trace.rows) {
        if (!std::isfinite(row.h_min) || !std::isfinite(row.h_max)) continue;
        ++report.checked;
        const double slack = std::min(row.h_min - lower, upper - row.h_max);
        report.worst_slack = std::min(report.worst_slack, slack);
        if (slack < -kSlack) {
            ++report.violations;
            note_violation(report, "t=" + std::to_string(row.t) + " i=" + std::to_string(row.i) +
                                       " k=" + std::to_string(row.k) + " h outside bounds");
        }
    }
    return report;
}

CheckReport check_block_descent(const TrainTrace& trace, const TheoryEnv& env) {
    env.validate();
    CheckReport report;
    report.name = "block_descent";
    const double coef = env.alpha * static_cast<double>(env.K) / (8.0 * env.G);
    for (const auto& v : block_views(trace)) {
        ++report.checked;
        const double bound = -coef * v.g_first_norm * v.g_first_norm;
        const double slack = bound - (v.loss_after - v.loss_before);
        report.worst_slack = std::min(report.worst_slack, slack);
        if (slack < -kSlack) {
            ++report.violations;
            note_violation(report, "t=" + std::to_string(v.t) + " i=" + std::to_string(v.block_id) +
                                       " block decrease misses bound");
        }
    }
    return report;
}

CheckReport check_epoch_descent(const TrainTrace& trace, const TheoryEnv& env) {
    env.validate();
    CheckReport report;
    report.name = "epoch_descent";
    const double c = theorem_epoch_constant(env);
    for (const auto& v : epoch_views(trace)) {
        if (!std::isfinite(v.grad_norm_start)) continue;
        ++report.checked;
        const double bound = -c * v.grad_norm_start * v.grad_norm_start;
        const double slack = bound - (v.loss_end - v.loss_start);
        report.worst_slack = std::min(report.worst_slack, slack);
        if (slack < -kSlack) {
            ++report.violations;
            note_violation(report,
                           "t=" + std::to_string(v.t) + " epoch decrease misses theorem bound");
        }
    }
    return report;
}

CheckReport check_monotone_descent(const TrainTrace& trace) {
    CheckReport report;
    report.name = "monotone_descent";
    for (const auto& v : epoch_views(trace)) {
        ++report.checked;
        const double slack = v.loss_start - v.loss_end;
        report.worst_slack = std::min(report.worst_slack, slack);
        if (slack < -kSlack) {
            ++report.violations;
            note_violation(report, "t=" + std::to_string(v.t) + " loss increased over the epoch");
        }
    }
    return report;
}

ComplexityReport check_complexity(const TrainTrace& trace, const TheoryEnv& env,
                                  std::span<const double> deltas, double loss_opt) {
    env.validate();
    ComplexityReport report;
    report.bound.name = "complexity_min_grad_bound";

    // gradient norms at epoch starts, index t = 0..epochs_run
    std::vector<double> grad_norms;
    grad_norms.push_back(trace.initial_grad_norm);
    std::size_t i = 0;
    while (i < trace.rows.size()) {
        const int t = trace.rows[i].t;
        std::size_t j = i;
        while (j + 1 < trace.rows.size() && trace.rows[j + 1].t == t) ++j;
        grad_norms.push_back(trace.rows[j].full_grad_norm);
        i = j + 1;
    }

    const double gap = trace.initial_loss - loss_opt;
    double running_min_sq = grad_norms[0] * grad_norms[0];
    for (std::size_t t = 1; t < grad_norms.size(); ++t) {
        running_min_sq = std::min(running_min_sq, grad_norms[t] * grad_norms[t]);
        ++report.bound.checked;
        const double bound = 32.0 * env.G * gap /
                             (env.alpha * static_cast<double>(env.K) * static_cast<double>(t));
        const double slack = bound - running_min_sq;
        report.bound.worst_slack = std::min(report.bound.worst_slack, slack);
        if (slack < -kSlack) {
            ++report.bound.violations;
            note_violation(report.bound, "T=" + std::to_string(t) + " min-grad bound violated");
        }
    }

    for (double delta : deltas) {
        DeltaStat stat;
        stat.delta = delta;
        for (std::size_t t = 0; t < grad_norms.size(); ++t) {
            if (grad_norms[t] <= delta) {
                stat.epochs = static_cast<int>(t);
                stat.reached = true;
                break;
            }
        }
        if (!stat.reached) report.budget_exhausted = true;
        report.stats.push_back(stat);
    }

    // least-squares slope of log T against log(1/delta)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int pts = 0;
    for (const auto& stat : report.stats) {
        if (!stat.reached || stat.epochs < 1) continue;
        const double x = std::log(1.0 / stat.delta);
        const double y = std::log(static_cast<double>(stat.epochs));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++pts;
    }
    if (pts >= 2) {
        const double denom = pts * sxx - sx * sx;
        if (denom != 0.0) report.slope = (pts * sxy - sx * sy) / denom;
    }
    return report;
}

}  // namespace bcd
