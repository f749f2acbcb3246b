#include "bcd/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bcd/rng.hpp"
#include "bcd/vec.hpp"

namespace bcd {

std::string to_string(Rule r) {
    switch (r) {
        case Rule::badam: return "badam";
        case Rule::bsgd: return "bsgd";
        case Rule::adam: return "adam";
        case Rule::sgd: return "sgd";
    }
    return "badam";
}

Rule rule_from_string(const std::string& s) {
    if (s == "badam") return Rule::badam;
    if (s == "bsgd") return Rule::bsgd;
    if (s == "adam") return Rule::adam;
    if (s == "sgd") return Rule::sgd;
    throw std::invalid_argument("unknown rule '" + s + "'");
}

std::string to_string(Mode m) {
    return m == Mode::deterministic ? "deterministic" : "stochastic";
}

Mode mode_from_string(const std::string& s) {
    if (s == "deterministic") return Mode::deterministic;
    if (s == "stochastic") return Mode::stochastic;
    throw std::invalid_argument("unknown mode '" + s + "'");
}

std::string to_string(Schedule s) { return s == Schedule::constant ? "const" : "cosine"; }

Schedule schedule_from_string(const std::string& s) {
    if (s == "const" || s == "constant") return Schedule::constant;
    if (s == "cosine") return Schedule::cosine;
    throw std::invalid_argument("unknown schedule '" + s + "'");
}

void RunConfig::validate(bool theory_mode) const {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("beta1 out of [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("beta2 out of [0,1)");
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    if (theory_mode && !(lambda < 1.0))
        throw std::invalid_argument("theory checks require lambda in (0,1)");
    if (K < 1) throw std::invalid_argument("K must be at least 1");
    if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be nonnegative");
    if (batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
    if (max_epochs < 0) throw std::invalid_argument("T must be nonnegative");
    if (grad_tol < 0.0) throw std::invalid_argument("delta must be nonnegative");
    if (!(init_scale >= 0.0) || !std::isfinite(init_scale))
        throw std::invalid_argument("init scale must be finite and nonnegative");
}

namespace {

void check_gradient_finite(std::span<const double> g) {
    for (double x : g)
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite gradient");
}

double lr_at(const RunConfig& cfg, long long step, long long total_steps) {
    if (cfg.schedule == Schedule::constant) return cfg.alpha;
    const double frac =
        total_steps > 0 ? static_cast<double>(step) / static_cast<double>(total_steps) : 0.0;
    return cfg.alpha * 0.5 * (1.0 + std::cos(3.141592653589793238462643383279 * frac));
}

void gather_block(const ParamStore& theta, const Block& block, std::vector<double>& out) {
    out.clear();
    for (const auto& r : block.ranges)
        for (std::size_t i = r.begin; i < r.end; ++i) out.push_back(theta[i]);
}

void apply_update(ParamStore& theta, const Block& block, std::span<const double> update) {
    std::size_t pos = 0;
    for (const auto& r : block.ranges)
        for (std::size_t i = r.begin; i < r.end; ++i) theta[i] += update[pos++];
}

}  // namespace

StepStats adam_inner_step(InnerState& state, std::span<const double> g, const RunConfig& cfg,
                          double lr, std::span<const double> theta_block,
                          std::span<double> update) {
    if (g.size() != state.m.size() || g.size() != update.size() || g.size() != theta_block.size())
        throw std::invalid_argument("gradient length does not match optimizer state");
    check_gradient_finite(g);
    state.k += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.k));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.k));
    StepStats stats;
    stats.h_min = std::numeric_limits<double>::infinity();
    stats.h_max = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * (g[i] * g[i]);
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        const double denom = std::sqrt(v_hat) + cfg.lambda;
        update[i] = -lr * m_hat / denom;
        if (cfg.weight_decay > 0.0) update[i] -= lr * cfg.weight_decay * theta_block[i];
        const double h = 1.0 / denom;
        stats.h_min = std::min(stats.h_min, h);
        stats.h_max = std::max(stats.h_max, h);
    }
    return stats;
}

StepStats sgd_inner_step(InnerState& state, std::span<const double> g, const RunConfig& cfg,
                         double lr, std::span<const double> theta_block,
                         std::span<double> update) {
    if (g.size() != update.size() || g.size() != theta_block.size())
        throw std::invalid_argument("gradient length does not match update buffer");
    check_gradient_finite(g);
    state.k += 1;
    for (std::size_t i = 0; i < g.size(); ++i) {
        update[i] = -lr * g[i];
        if (cfg.weight_decay > 0.0) update[i] -= lr * cfg.weight_decay * theta_block[i];
    }
    return StepStats{};
}

BatchStream::BatchStream(std::uint64_t seed, std::size_t n, int batch_size, Mode mode)
    : seed_(seed), n_(n), batch_size_(batch_size), mode_(mode) {
    if (n_ == 0) throw std::invalid_argument("empty dataset");
    if (batch_size_ < 1) throw std::invalid_argument("batch size must be at least 1");
    if (mode_ == Mode::deterministic) {
        batch_.resize(n_);
        std::iota(batch_.begin(), batch_.end(), 0);
    } else {
        order_.resize(n_);
        reshuffle();
    }
}

void BatchStream::reshuffle() {
    std::iota(order_.begin(), order_.end(), 0);
    CounterRng rng(seed_, rng_stream::batch);
    rng.set_counter(pass_ << 32);
    for (std::size_t i = n_; i > 1; --i)
        std::swap(order_[i - 1], order_[rng.next_below(i)]);
}

const std::vector<int>& BatchStream::next() {
    if (mode_ == Mode::deterministic) return batch_;
    batch_.clear();
    while (batch_.size() < static_cast<std::size_t>(batch_size_)) {
        if (pos_ == n_) {
            ++pass_;
            reshuffle();
            pos_ = 0;
        }
        batch_.push_back(order_[pos_++]);
    }
    return batch_;
}

namespace {

double elapsed_or_nan(const RunTimer* timer) {
    return timer ? timer->elapsed_ms() : std::numeric_limits<double>::quiet_NaN();
}

double full_grad_norm_at(const Objective& obj, const ParamStore& theta,
                         const std::vector<int>& fullb) {
    const std::vector<double> g = eval_grad(obj, theta, fullb);
    return norm(g);
}

}  // namespace

void run_block_epoch(ParamStore& theta, const Objective& obj, const BlockPartition& base,
                     const RunConfig& cfg, Rule rule, int t, TrainTrace& trace,
                     BatchStream& stream, long long total_steps, long long& steps_done,
                     StepObserver* observer, const RunTimer* timer) {
    const BlockPartition ordered = order_blocks(base, cfg.ordering, cfg.seed, t);
    const std::vector<int> fullb = full_batch(obj);
    const bool deterministic = cfg.mode == Mode::deterministic;
    const bool adam_rule = rule == Rule::badam || rule == Rule::adam;

    std::vector<double> theta_block, update;
    InnerState state;
    const std::size_t blocks = ordered.blocks.size();
    for (std::size_t pos = 0; pos < blocks; ++pos) {
        const Block& block = ordered.blocks[pos];
        if (observer) observer->on_block_start(t, block.id, theta);
        state.reset(block.size());
        update.resize(block.size());
        for (int k = 1; k <= cfg.K; ++k) {
            const std::vector<int>& batch = stream.next();
            const std::vector<double> g = eval_block_grad(obj, theta, batch, block);
            if (observer) observer->on_block_grad(t, block.id, k, theta, block, g);

            gather_block(theta, block, theta_block);
            const double lr = lr_at(cfg, steps_done, total_steps);
            const StepStats stats =
                adam_rule ? adam_inner_step(state, g, cfg, lr, theta_block, update)
                          : sgd_inner_step(state, g, cfg, lr, theta_block, update);
            apply_update(theta, block, update);
            ++steps_done;

            TraceRow row;
            row.t = t;
            row.i = block.id;
            row.k = k;
            row.block_grad_norm = norm(g);
            row.h_min = stats.h_min;
            row.h_max = stats.h_max;
            row.loss = obj.loss(theta, batch);
            const bool epoch_end = pos + 1 == blocks && k == cfg.K;
            if (deterministic || epoch_end) row.full_grad_norm = full_grad_norm_at(obj, theta, fullb);
            row.wall_ms = elapsed_or_nan(timer);
            trace.rows.push_back(row);
        }
        if (observer) observer->on_block_end(t, block.id, theta);
        // inner state is discarded here: the next activation starts from zero
    }
}

namespace {

RunResult run_loop(const Objective& obj, const BlockPartition& partition, const RunConfig& cfg,
                   Rule rule, bool block_mode, StepObserver* observer, const ParamStore* theta0) {
    cfg.validate();
    validate_partition(partition, obj.dim());

    RunResult res;
    if (theta0) {
        if (theta0->dim() != obj.dim())
            throw std::invalid_argument("initial point dimension does not match the objective");
        res.theta_init = *theta0;
    } else {
        res.theta_init = obj.initial_point(cfg.seed, cfg.init_scale);
    }
    res.theta = res.theta_init;
    TrainTrace& trace = res.trace;

    const std::vector<int> fullb = full_batch(obj);
    trace.initial_loss = obj.loss(res.theta, fullb);
    trace.initial_grad_norm = full_grad_norm_at(obj, res.theta, fullb);

    BatchStream stream(cfg.seed, obj.num_samples(), cfg.batch_size, cfg.mode);
    const long long total_steps =
        static_cast<long long>(cfg.max_epochs) * partition.block_count() * cfg.K;
    long long steps_done = 0;

    RunTimer run_timer;
    const RunTimer* timer = cfg.record_timing ? &run_timer : nullptr;

    // persistent state for the full-parameter baselines
    InnerState persistent;
    std::vector<double> theta_block, update;
    if (!block_mode) {
        persistent.reset(obj.dim());
        update.resize(obj.dim());
    }

    int t = 0;
    trace.termination = "max_epochs";
    const bool adam_rule = rule == Rule::badam || rule == Rule::adam;
    for (; t < cfg.max_epochs; ++t) {
        if (cfg.mode == Mode::deterministic && cfg.grad_tol > 0.0) {
            const double gnorm =
                trace.rows.empty() ? trace.initial_grad_norm : trace.rows.back().full_grad_norm;
            if (gnorm <= cfg.grad_tol) {
                trace.termination = "grad_tol";
                break;
            }
        }
        if (block_mode) {
            run_block_epoch(res.theta, obj, partition, cfg, rule, t, trace, stream, total_steps,
                            steps_done, observer, timer);
        } else {
            const Block& whole = partition.blocks.front();
            for (int k = 1; k <= cfg.K; ++k) {
                const std::vector<int>& batch = stream.next();
                const std::vector<double> g = eval_block_grad(obj, res.theta, batch, whole);
                if (observer) observer->on_block_grad(t, whole.id, k, res.theta, whole, g);
                gather_block(res.theta, whole, theta_block);
                const double lr = lr_at(cfg, steps_done, total_steps);
                const StepStats stats =
                    adam_rule ? adam_inner_step(persistent, g, cfg, lr, theta_block, update)
                              : sgd_inner_step(persistent, g, cfg, lr, theta_block, update);
                apply_update(res.theta, whole, update);
                ++steps_done;

                TraceRow row;
                row.t = t;
                row.i = whole.id;
                row.k = k;
                row.block_grad_norm = norm(g);
                row.h_min = stats.h_min;
                row.h_max = stats.h_max;
                row.loss = obj.loss(res.theta, batch);
                if (cfg.mode == Mode::deterministic || k == cfg.K)
                    row.full_grad_norm = full_grad_norm_at(obj, res.theta, fullb);
                row.wall_ms = elapsed_or_nan(timer);
                trace.rows.push_back(row);
            }
        }
    }
    trace.epochs_run = t;
    trace.final_loss = obj.loss(res.theta, fullb);
    trace.final_grad_norm = full_grad_norm_at(obj, res.theta, fullb);
    res.theta.check_finite();
    return res;
}

}  // namespace

RunResult run_training(const Objective& obj, const BlockPartition& partition,
                       const RunConfig& cfg, Rule rule, StepObserver* observer,
                       const ParamStore* theta0) {
    if (rule != Rule::badam && rule != Rule::bsgd)
        throw std::invalid_argument("run_training expects a block rule (badam or bsgd)");
    return run_loop(obj, partition, cfg, rule, true, observer, theta0);
}

RunResult run_full_baseline(const Objective& obj, const RunConfig& cfg, Rule rule,
                            const ParamStore* theta0) {
    if (rule != Rule::adam && rule != Rule::sgd)
        throw std::invalid_argument("run_full_baseline expects adam or sgd");
    const BlockPartition whole = partition_uniform(obj.dim(), 1);
    return run_loop(obj, whole, cfg, rule, false, nullptr, theta0);
}

int suggest_K(long long n, long long B, long long D) {
    if (n < 1 || B < 1 || D < 1) throw std::invalid_argument("n, B, D must be at least 1");
    const long long r = std::llround(static_cast<double>(n) / (static_cast<double>(B) * static_cast<double>(D)));
    return static_cast<int>(std::min<long long>(std::max<long long>(r, 50), 100));
}

}  // namespace bcd
