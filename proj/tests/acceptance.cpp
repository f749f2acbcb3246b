// Acceptance suite: runs every gating criterion end to end and prints one
// pass/fail line per criterion. Exit code 0 iff all criteria pass.

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <vector>

#include "bcd/commands.hpp"
#include "bcd/config.hpp"
#include "bcd/cost_model.hpp"
#include "bcd/io.hpp"
#include "bcd/objective.hpp"
#include "bcd/optimizer.hpp"
#include "bcd/rng.hpp"
#include "bcd/spectral.hpp"
#include "bcd/theory.hpp"
#include "support.hpp"

using namespace bcd;
using bcd::testing::env_from_run;
using bcd::testing::theory_alpha;

namespace {

// ---------------------------------------------------------------------------
// harness

struct Check {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (detail.tellp() > 0) detail << "; ";
            detail << "FAILED: " << what;
        }
    }
};

// watches that parameters outside the active block never move
struct ImmutabilityObserver : StepObserver {
    const BlockPartition* partition = nullptr;
    std::vector<double> snapshot;
    long long checked = 0;
    long long violations = 0;

    void on_block_start(int, int, const ParamStore& theta) override {
        snapshot.assign(theta.values().begin(), theta.values().end());
    }
    void on_block_end(int, int id, const ParamStore& theta) override {
        std::vector<bool> active(theta.dim(), false);
        for (const auto& b : partition->blocks)
            if (b.id == id)
                for (const auto& r : b.ranges)
                    for (std::size_t i = r.begin; i < r.end; ++i) active[i] = true;
        for (std::size_t i = 0; i < theta.dim(); ++i) {
            if (active[i]) continue;
            ++checked;
            if (theta[i] != snapshot[i]) ++violations;
        }
    }
};

// every training run in the suite goes through here so criterion 9
// (inactive-block immutability) and criterion 10 (bitwise replays) cover all
// of them
struct RunRegistry {
    struct Entry {
        std::string tag;
        std::string csv;
        std::function<std::string()> replay;
    };
    std::vector<Entry> entries;
    long long immutability_checked = 0;
    long long immutability_violations = 0;

    RunResult block_run(const std::string& tag, std::function<std::unique_ptr<Objective>()> make,
                        const BlockPartition& partition, const RunConfig& cfg, Rule rule) {
        const std::unique_ptr<Objective> obj = make();
        ImmutabilityObserver watch;
        watch.partition = &partition;
        RunResult res = run_training(*obj, partition, cfg, rule, &watch);
        immutability_checked += watch.checked;
        immutability_violations += watch.violations;
        entries.push_back(Entry{tag, trace_to_csv(res.trace), [make, partition, cfg, rule]() {
                                    const std::unique_ptr<Objective> again = make();
                                    return trace_to_csv(
                                        run_training(*again, partition, cfg, rule).trace);
                                }});
        return res;
    }

    RunResult baseline_run(const std::string& tag,
                           std::function<std::unique_ptr<Objective>()> make, const RunConfig& cfg,
                           Rule rule) {
        const std::unique_ptr<Objective> obj = make();
        RunResult res = run_full_baseline(*obj, cfg, rule);
        entries.push_back(Entry{tag, trace_to_csv(res.trace), [make, cfg, rule]() {
                                    const std::unique_ptr<Objective> again = make();
                                    return trace_to_csv(run_full_baseline(*again, cfg, rule).trace);
                                }});
        return res;
    }
};

RunRegistry registry;

bool same_values(const ParamStore& a, const ParamStore& b) {
    if (a.dim() != b.dim()) return false;
    return std::memcmp(a.values().data(), b.values().data(), a.dim() * sizeof(double)) == 0;
}

// ---------------------------------------------------------------------------
// criterion bodies

std::function<std::unique_ptr<Objective>()> logreg_factory(std::size_t d, std::size_t n,
                                                           std::uint64_t seed) {
    return [=]() { return std::make_unique<LogisticObjective>(d, n, 0.01, 0.1, seed); };
}

Check criterion_equivalence() {
    Check c;
    auto make = logreg_factory(20, 200, 101);
    const BlockPartition whole = partition_uniform(20, 1);

    RunConfig cfg;
    cfg.alpha = 0.01;
    cfg.K = 100;
    cfg.max_epochs = 1;
    cfg.mode = Mode::stochastic;
    cfg.batch_size = 16;
    cfg.seed = 101;

    const RunResult badam =
        registry.block_run("equivalence_badam_d1", make, whole, cfg, Rule::badam);
    const RunResult adam = registry.baseline_run("equivalence_adam", make, cfg, Rule::adam);
    c.require(same_values(badam.theta, adam.theta),
              "single-block badam must match adam bitwise over the first K steps");
    c.require(trace_to_csv(badam.trace) == trace_to_csv(adam.trace),
              "badam/adam traces must be byte identical");

    RunConfig sgd_cfg = cfg;
    sgd_cfg.K = 40;
    sgd_cfg.max_epochs = 3;
    const RunResult bsgd =
        registry.block_run("equivalence_bsgd_d1", make, whole, sgd_cfg, Rule::bsgd);
    const RunResult sgd = registry.baseline_run("equivalence_sgd", make, sgd_cfg, Rule::sgd);
    c.require(same_values(bsgd.theta, sgd.theta), "single-block bsgd must match sgd bitwise");
    c.require(trace_to_csv(bsgd.trace) == trace_to_csv(sgd.trace),
              "bsgd/sgd traces must be byte identical for all steps");
    c.detail << "badam==adam over 100 steps, bsgd==sgd over 120 steps";
    return c;
}

std::function<std::unique_ptr<Objective>()> quad64_factory() {
    return []() {
        std::vector<double> eigs(64);
        for (std::size_t i = 0; i < eigs.size(); ++i)
            eigs[i] = 1.0 + 9.0 * static_cast<double>(i) / 63.0;
        return std::make_unique<QuadraticObjective>(QuadraticObjective::diagonal(eigs, 2));
    };
}

struct DescentArtifacts {
    TrainTrace trace;
    TheoryEnv env;
};

DescentArtifacts descent_run;  // shared between criteria 2 and 3

Check criterion_descent() {
    Check c;
    auto make = quad64_factory();
    const std::unique_ptr<Objective> probe = make();
    const BlockPartition partition = partition_uniform(probe->dim(), 4);
    RunConfig cfg;
    cfg.lambda = 0.1;
    cfg.K = 5;
    cfg.max_epochs = 100;
    cfg.seed = 202;
    cfg.alpha = theory_alpha(*probe, partition, cfg);

    const RunResult res =
        registry.block_run("descent_quadratic", make, partition, cfg, Rule::badam);
    const TheoryEnv env = env_from_run(*probe, partition, cfg, res.trace);
    c.require(cfg.alpha <= max_theory_lr(env), "chosen alpha must satisfy the theorem bound");

    const CheckReport epochs = check_epoch_descent(res.trace, env);
    c.require(epochs.checked == 100, "theorem inequality must be evaluated on all 100 epochs");
    c.require(epochs.violations == 0, "per-epoch descent inequality violated");

    const CheckReport blocks = check_block_descent(res.trace, env);
    c.require(blocks.checked == 400, "block inequality must cover every activation");
    c.require(blocks.violations == 0, "per-block refined inequality violated");

    c.detail << "alpha=" << format_g17(cfg.alpha) << ", worst epoch slack "
             << format_g17(epochs.worst_slack);
    descent_run.trace = res.trace;
    descent_run.env = env;
    return c;
}

Check criterion_step_bounds() {
    Check c;
    c.require(!descent_run.trace.rows.empty(), "criterion 2 run must be available");
    const CheckReport quad = check_step_size_bounds(descent_run.trace, descent_run.env);
    c.require(quad.checked == 2000, "quadratic trace must expose all 2000 step entries");
    c.require(quad.violations == 0, "adaptive entries left the corollary band on the quadratic");

    auto make = logreg_factory(20, 200, 303);
    const std::unique_ptr<Objective> probe = make();
    const BlockPartition partition = partition_uniform(probe->dim(), 4);
    RunConfig cfg;
    cfg.alpha = 0.01;
    cfg.lambda = 0.1;
    cfg.K = 5;
    cfg.max_epochs = 30;
    cfg.seed = 303;
    const RunResult res = registry.block_run("bounds_logistic", make, partition, cfg, Rule::badam);
    const TheoryEnv env = env_from_run(*probe, partition, cfg, res.trace);
    const CheckReport logi = check_step_size_bounds(res.trace, env);
    c.require(logi.checked == 600, "logistic trace must expose all 600 step entries");
    c.require(logi.violations == 0, "adaptive entries left the corollary band on logreg");
    c.detail << "2600/2600 entries inside [1/(G+lambda), 1/lambda]";
    return c;
}

Check criterion_complexity() {
    Check c;
    auto make = []() {
        return std::make_unique<QuadraticObjective>(
            QuadraticObjective::diagonal({1.0, 2.0, 5.0, 10.0}, 2));
    };
    const std::unique_ptr<Objective> probe = make();
    const BlockPartition partition = partition_uniform(probe->dim(), 2);
    RunConfig cfg;
    cfg.alpha = 0.002;  // contractive for the stiffest eigenvalue at lambda = 0.1
    cfg.lambda = 0.1;
    cfg.K = 5;
    cfg.max_epochs = 20000;
    cfg.grad_tol = 1e-2;
    cfg.seed = 404;
    const RunResult res =
        registry.block_run("complexity_quadratic", make, partition, cfg, Rule::badam);
    c.require(res.trace.termination == "grad_tol", "run must reach the smallest delta");

    const TheoryEnv env = env_from_run(*probe, partition, cfg, res.trace);
    const std::vector<double> deltas = {1e-1, 3e-2, 1e-2};
    const ComplexityReport report = check_complexity(res.trace, env, deltas, 0.0);
    c.require(!report.budget_exhausted, "epoch budget exhausted before the smallest delta");
    c.require(report.bound.violations == 0, "min-gradient bound violated along the run");
    c.require(report.bound.worst_slack > 0.0, "min-gradient bound must hold strictly");
    c.require(std::isfinite(report.slope), "slope regression needs at least two reached deltas");
    c.require(report.slope <= 2.2, "log T vs log(1/delta) slope exceeds 2.2");
    c.detail << "slope=" << report.slope << " over " << res.trace.epochs_run
             << " epochs, T(delta)=";
    for (const auto& s : report.stats) c.detail << " " << s.epochs;
    return c;
}

Check criterion_cost_model() {
    Check c;
    CostSpec adam1;
    adam1.M = 1;
    c.require(memory_gb(CostMethod::adam, adam1) == 18.0, "adam M=1 must be exactly 18 GB");
    CostSpec spec;
    spec.M = 8;
    spec.D = 32;
    spec.r = 8;
    spec.mdim = 4096;
    c.require(memory_gb(CostMethod::badam, spec) == 20.0, "badam M=8 D=32 must be exactly 20 GB");
    c.require(memory_gb(CostMethod::lora, spec) == 16.5625,
              "lora M=8 r=8 mdim=4096 must be exactly 16.5625 GB");
    c.require(memory_gb(CostMethod::lomo, spec) == 16.5, "lomo M=8 D=32 must be exactly 16.5 GB");
    const long long block = unit_backward_passes(BackwardScheme::badam, 100, 32);
    const long long full = unit_backward_passes(BackwardScheme::full, 100, 32);
    c.require(block == 52800, "block scheme must need exactly 52800 unit passes");
    c.require(full == 102400, "full scheme must need exactly 102400 unit passes");
    c.require(static_cast<double>(block) / static_cast<double>(full) == 0.515625,
              "savings ratio must be exactly 0.515625");
    c.detail << "all formula values exact";
    return c;
}

Check criterion_spectral() {
    Check c;
    const Matrix d34 = Matrix::diagonal({3.0, 4.0});
    c.require(cvar(d34, 1) == 0.64, "cvar(1) of diag(3,4) must be exactly 0.64");
    c.require(effective_rank(d34) == 2, "effective rank of diag(3,4) must be 2");

    Matrix outer(5, 7);
    CounterRng rng(606, rng_stream::probe);
    std::vector<double> u(5), v(7);
    for (auto& x : u) x = rng.next_normal();
    for (auto& x : v) x = rng.next_normal();
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 7; ++j) outer.at(i, j) = u[i] * v[j];
    c.require(effective_rank(outer) == 1, "a rank-1 outer product must have effective rank 1");

    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        Matrix a(50, 50);
        for (auto& x : a.data) x = rng.next_normal();
        double frob = 0.0;
        for (double x : a.data) frob += x * x;
        double mass = 0.0;
        for (double s : singular_values(a)) mass += s * s;
        worst = std::max(worst, std::abs(frob - mass) / frob);
    }
    c.require(worst <= 1e-10, "frobenius-spectrum identity drifted past 1e-10");
    c.detail << "worst frobenius mismatch " << worst;
    return c;
}

Check criterion_high_rank() {
    Check c;
    auto make = []() { return std::make_unique<MlpObjective>(32, 32, 32, 512, 0.1, 707); };
    const std::unique_ptr<Objective> probe = make();
    const BlockPartition partition = partition_uniform(probe->dim(), 4);

    RunConfig cfg;
    cfg.alpha = 0.01;
    cfg.K = 50;
    cfg.mode = Mode::stochastic;
    cfg.batch_size = 32;
    cfg.seed = 707;
    cfg.max_epochs = 10;  // 10 epochs * 4 blocks * 50 steps = 2000 inner steps

    const RunResult badam = registry.block_run("highrank_badam", make, partition, cfg, Rule::badam);

    RunConfig full_cfg = cfg;
    full_cfg.max_epochs = 40;  // 40 * 50 = 2000 steps
    const RunResult adam = registry.baseline_run("highrank_adam", make, full_cfg, Rule::adam);

    const auto block_reports = perturbation_report(badam.theta, badam.theta_init);
    const auto full_reports = perturbation_report(adam.theta, adam.theta_init);
    c.require(block_reports.size() == 2 && full_reports.size() == 2,
              "expected spectra for W1 and W2");
    for (std::size_t m = 0; m < block_reports.size() && m < full_reports.size(); ++m) {
        const auto& b = block_reports[m];
        const auto& f = full_reports[m];
        c.detail << b.name << ": badam " << b.effective_rank << " vs adam " << f.effective_rank
                 << "  ";
        c.require(static_cast<double>(b.effective_rank) >=
                      0.5 * static_cast<double>(f.effective_rank),
                  b.name + " block-update rank fell below half of the full-update rank");
        c.require(b.effective_rank > 8, b.name + " block-update rank must exceed 8");
        c.require(f.effective_rank > 8, b.name + " full-update rank must exceed 8");
    }
    return c;
}

Check criterion_ordering() {
    Check c;
    auto make = logreg_factory(20, 256, 808);
    const BlockPartition partition = partition_uniform(20, 4);
    RunConfig cfg;
    cfg.alpha = 0.02;
    cfg.K = 10;
    cfg.mode = Mode::stochastic;
    cfg.batch_size = 16;
    cfg.seed = 808;
    cfg.max_epochs = 30;

    std::map<std::string, double> finals;
    for (Ordering ordering :
         {Ordering::ascending, Ordering::descending, Ordering::random_reshuffle}) {
        RunConfig run_cfg = cfg;
        run_cfg.ordering = ordering;
        const RunResult res = registry.block_run("ordering_" + to_string(ordering), make,
                                                 partition, run_cfg, Rule::badam);
        finals[to_string(ordering)] = res.trace.final_loss;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& [name, loss] : finals) {
        lo = std::min(lo, loss);
        hi = std::max(hi, loss);
        c.detail << name << "=" << loss << "  ";
    }
    c.require((hi - lo) / lo <= 0.05, "orderings diverged by more than 5% in final loss");
    return c;
}

Check criterion_invariants() {
    Check c;
    // immutability was watched on every block run registered so far
    c.require(registry.immutability_checked > 0, "immutability watch must have coverage");
    c.require(registry.immutability_violations == 0,
              "parameters outside the active block moved during an activation");

    // state reset: the first bias-corrected moments equal g and g^2
    RunConfig cfg;
    cfg.alpha = 0.05;
    CounterRng rng(909, rng_stream::probe);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t len = 1 + rng.next_below(16);
        std::vector<double> g(len), theta(len, 0.0), update(len);
        for (auto& x : g) x = rng.next_normal() * std::pow(10.0, rng.next_unit() * 6 - 3);
        InnerState state;
        state.reset(len);
        adam_inner_step(state, g, cfg, cfg.alpha, theta, update);
        for (std::size_t i = 0; i < len; ++i) {
            const double m_hat = state.m[i] / (1.0 - cfg.beta1);
            const double v_hat = state.v[i] / (1.0 - cfg.beta2);
            worst = std::max(worst, std::abs(m_hat - g[i]) / std::max(1.0, std::abs(g[i])));
            worst = std::max(worst, std::abs(v_hat - g[i] * g[i]) / std::max(1.0, g[i] * g[i]));
        }
    }
    c.require(worst <= 1e-15, "fresh-state corrected moments drifted past 1e-15");
    c.detail << registry.immutability_checked << " frozen coordinates verified, moment drift "
             << worst;
    return c;
}

Check criterion_determinism() {
    Check c;
    for (const auto& entry : registry.entries) {
        const std::string replayed = entry.replay();
        c.require(replayed == entry.csv, "replay of '" + entry.tag + "' changed the trace bytes");
    }
    c.detail << registry.entries.size() << " runs replayed byte-identically";
    return c;
}

}  // namespace

int main() {
    struct Spec {
        int id;
        const char* name;
        double budget;
        std::function<Check()> body;
    };
    const std::vector<Spec> specs = {
        {1, "algorithm equivalence", 5.0, criterion_equivalence},
        {2, "deterministic descent", 10.0, criterion_descent},
        {3, "step-size bounds", 10.0, criterion_step_bounds},
        {4, "complexity scaling", 30.0, criterion_complexity},
        {5, "cost-model exactness", 1.0, criterion_cost_model},
        {6, "spectral correctness", 10.0, criterion_spectral},
        {7, "high-rank update", 60.0, criterion_high_rank},
        {8, "ordering ablation", 30.0, criterion_ordering},
        {9, "structural invariants", 10.0, criterion_invariants},
        {10, "determinism", 120.0, criterion_determinism},
    };

    int failures = 0;
    for (const auto& spec : specs) {
        const auto start = std::chrono::steady_clock::now();
        Check check;
        try {
            check = spec.body();
        } catch (const std::exception& e) {
            check.ok = false;
            check.detail << "exception: " << e.what();
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = seconds < spec.budget;
        const bool pass = check.ok && in_budget;
        if (!pass) ++failures;
        std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << spec.id << " (" << spec.name
                  << "): " << check.detail.str();
        if (!in_budget) std::cout << " OVER BUDGET";
        std::cout << " [" << seconds << "s < " << spec.budget << "s]\n";
    }
    std::cout << (failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED") << " ("
              << (specs.size() - static_cast<std::size_t>(failures)) << "/" << specs.size()
              << " criteria)\n";
    return failures == 0 ? 0 : 1;
}
