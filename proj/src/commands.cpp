#include "bcd/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

namespace bcd {

namespace {

using nlohmann::json;

json report_to_json(const CheckReport& r) {
    json j;
    j["name"] = r.name;
    j["checked"] = r.checked;
    j["violations"] = r.violations;
    j["worst_slack"] = std::isfinite(r.worst_slack) ? json(r.worst_slack) : json(nullptr);
    j["notes"] = r.notes;
    return j;
}

}  // namespace

TrainArtifacts run_experiment(const ExperimentConfig& cfg) {
    TrainArtifacts art;
    const std::unique_ptr<Objective> obj = make_objective(cfg);
    const BlockPartition partition = make_partition(cfg, *obj);
    const RunConfig rc = make_run_config(cfg, *obj, partition);

    if (cfg.rule == Rule::badam || cfg.rule == Rule::bsgd)
        art.result = run_training(*obj, partition, rc, cfg.rule);
    else
        art.result = run_full_baseline(*obj, rc, cfg.rule);

    RunSummary& s = art.summary;
    s.name = cfg.name;
    s.objective = std::string(obj->kind());
    s.rule = to_string(cfg.rule);
    s.mode = to_string(rc.mode);
    s.schedule = to_string(rc.schedule);
    s.ordering = to_string(rc.ordering);
    s.termination = art.result.trace.termination;
    s.d = static_cast<int>(obj->dim());
    s.n = static_cast<int>(obj->num_samples());
    s.D = partition.block_count();
    s.K = rc.K;
    s.T = rc.max_epochs;
    s.B = rc.batch_size;
    s.epochs_run = art.result.trace.epochs_run;
    s.alpha = rc.alpha;
    s.beta1 = rc.beta1;
    s.beta2 = rc.beta2;
    s.lambda = rc.lambda;
    s.weight_decay = rc.weight_decay;
    s.delta = rc.grad_tol;
    s.init_scale = rc.init_scale;
    s.seed = rc.seed;
    s.initial_loss = art.result.trace.initial_loss;
    s.initial_grad_norm = art.result.trace.initial_grad_norm;
    s.final_loss = art.result.trace.final_loss;
    s.final_grad_norm = art.result.trace.final_grad_norm;
    s.L = obj->smoothness();
    if (std::isfinite(s.L)) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& block : partition.blocks) {
            const double li = obj->block_smoothness(block);
            lo = std::min(lo, li);
            hi = std::max(hi, li);
        }
        s.L_bar = hi;
        s.L_min = lo;
    }
    return art;
}

int cmd_train(const ExperimentConfig& cfg, const std::string& out_dir, std::ostream& err) {
    TrainArtifacts art;
    try {
        art = run_experiment(cfg);
    } catch (const std::exception& e) {
        err << "train: " << e.what() << "\n";
        return kExitUsage;
    }
    try {
        std::filesystem::create_directories(out_dir);
        write_text_file(out_dir + "/trace.csv", trace_to_csv(art.result.trace));
        write_snapshot(out_dir + "/theta_init.bin", art.result.theta_init);
        write_snapshot(out_dir + "/theta_final.bin", art.result.theta);
        write_text_file(out_dir + "/summary.json", summary_to_json(art.summary));
    } catch (const std::exception& e) {
        err << "train: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitOk;
}

std::string CheckOutcome::to_json() const {
    json j;
    j["violations"] = violations;
    j["pass"] = violations == 0;
    json env_j;
    env_j["L"] = std::isfinite(env.L) ? json(env.L) : json(nullptr);
    env_j["L_bar"] = std::isfinite(env.L_bar) ? json(env.L_bar) : json(nullptr);
    env_j["L_min"] = std::isfinite(env.L_min) ? json(env.L_min) : json(nullptr);
    env_j["G"] = env.G;
    env_j["lambda"] = env.lambda;
    env_j["alpha"] = env.alpha;
    env_j["K"] = env.K;
    env_j["D"] = env.D;
    j["env"] = env_j;
    j["checks"] = json::array();
    for (const auto& r : reports) j["checks"].push_back(report_to_json(r));
    j["skipped"] = skipped;
    if (complexity_ran) {
        json c;
        c["bound"] = report_to_json(complexity.bound);
        c["slope"] = std::isnan(complexity.slope) ? json(nullptr) : json(complexity.slope);
        c["budget_exhausted"] = complexity.budget_exhausted;
        c["stats"] = json::array();
        for (const auto& s : complexity.stats) {
            json st;
            st["delta"] = s.delta;
            st["epochs"] = s.epochs;
            st["reached"] = s.reached;
            c["stats"].push_back(st);
        }
        j["complexity"] = c;
    }
    return j.dump(2) + "\n";
}

CheckOutcome run_checks(const TrainTrace& trace, const RunSummary& summary,
                        const CheckOptions& options) {
    CheckOutcome outcome;
    TheoryEnv& env = outcome.env;
    env.L = std::isfinite(options.L_override) ? options.L_override : summary.L;
    env.L_bar = std::isfinite(options.L_bar_override) ? options.L_bar_override : summary.L_bar;
    env.L_min = summary.L_min;
    env.G = observed_grad_bound(trace);
    env.lambda = summary.lambda;
    env.alpha = summary.alpha;
    env.K = summary.K;
    env.D = summary.D;

    const bool deterministic = summary.mode == "deterministic";
    const bool adam_family = summary.rule == "badam" || summary.rule == "adam";
    const bool constant_lr = summary.schedule == "const";
    const bool lambda_ok = env.lambda > 0.0 && env.lambda < 1.0;
    const bool smoothness_known = std::isfinite(env.L) && std::isfinite(env.L_bar) && env.L_bar > 0.0;

    if (adam_family && lambda_ok)
        outcome.reports.push_back(check_step_size_bounds(trace, env));
    else
        outcome.skipped.push_back("step_size_bounds: needs an Adam-family rule and lambda in (0,1)");

    if (deterministic)
        outcome.reports.push_back(check_monotone_descent(trace));
    else
        outcome.skipped.push_back("monotone_descent: deterministic runs only");

    const bool theorem_ready = deterministic && constant_lr && lambda_ok && smoothness_known &&
                               adam_family && summary.rule == "badam";
    if (theorem_ready) {
        const double lr_bound = max_theory_lr(env);
        if (env.alpha <= lr_bound || options.force_theorem) {
            outcome.reports.push_back(check_block_descent(trace, env));
            outcome.reports.push_back(check_epoch_descent(trace, env));
        } else {
            outcome.skipped.push_back("block_descent/epoch_descent: alpha " +
                                      format_g17(env.alpha) + " exceeds the theorem bound " +
                                      format_g17(lr_bound));
        }
    } else {
        outcome.skipped.push_back(
            "block_descent/epoch_descent: needs a deterministic badam run with constant lr, "
            "lambda in (0,1) and known smoothness");
    }

    if (!options.deltas.empty()) {
        if (deterministic && summary.objective == "quadratic" && lambda_ok) {
            outcome.complexity =
                check_complexity(trace, env, options.deltas, /*loss_opt=*/0.0);
            outcome.complexity_ran = true;
        } else {
            outcome.skipped.push_back("complexity: needs a deterministic quadratic run");
        }
    }

    for (const auto& r : outcome.reports) outcome.violations += r.violations;
    if (outcome.complexity_ran) outcome.violations += outcome.complexity.bound.violations;
    return outcome;
}

int cmd_check(const std::string& run_dir, const CheckOptions& options, std::ostream& out,
              std::ostream& err) {
    TrainTrace trace;
    RunSummary summary;
    try {
        trace = trace_from_csv(read_text_file(run_dir + "/trace.csv"));
        summary = summary_from_json(read_text_file(run_dir + "/summary.json"));
    } catch (const std::exception& e) {
        err << "check: " << e.what() << "\n";
        return kExitIo;
    }
    trace.initial_loss = summary.initial_loss;
    trace.initial_grad_norm = summary.initial_grad_norm;
    trace.final_loss = summary.final_loss;
    trace.final_grad_norm = summary.final_grad_norm;
    trace.epochs_run = summary.epochs_run;
    trace.termination = summary.termination;

    CheckOutcome outcome;
    try {
        outcome = run_checks(trace, summary, options);
    } catch (const std::exception& e) {
        err << "check: " << e.what() << "\n";
        return kExitUsage;
    }
    const std::string report = outcome.to_json();
    out << report;
    try {
        write_text_file(run_dir + "/check_report.json", report);
    } catch (const std::exception& e) {
        err << "check: " << e.what() << "\n";
        return kExitIo;
    }
    return outcome.violations == 0 ? kExitOk : kExitViolations;
}

std::string rank_report_csv(const std::vector<SpectralReport>& reports) {
    std::string out = "name,rows,cols,effective_rank,flag,r,cvar\n";
    for (const auto& rep : reports) {
        const std::string prefix = rep.name + "," + std::to_string(rep.rows) + "," +
                                   std::to_string(rep.cols) + "," +
                                   std::to_string(rep.effective_rank) + "," +
                                   (rep.zero ? "zero_perturbation" : "");
        if (rep.zero) {
            out += prefix + ",0,\n";
            continue;
        }
        for (std::size_t r = 0; r < rep.cvar_curve.size(); ++r)
            out += prefix + "," + std::to_string(r + 1) + "," + format_g17(rep.cvar_curve[r]) +
                   "\n";
    }
    return out;
}

int cmd_rank(const std::string& init_path, const std::string& final_path,
             const std::string& out_csv, double threshold, std::ostream& out, std::ostream& err) {
    ParamStore before, after;
    try {
        before = read_snapshot(init_path);
        after = read_snapshot(final_path);
    } catch (const std::exception& e) {
        err << "rank: " << e.what() << "\n";
        return kExitIo;
    }
    std::vector<SpectralReport> reports;
    try {
        reports = perturbation_report(after, before, threshold);
    } catch (const std::exception& e) {
        err << "rank: " << e.what() << "\n";
        return kExitUsage;
    }
    if (reports.empty()) out << "no weight matrices in the snapshot layout\n";
    for (const auto& rep : reports) {
        out << rep.name << " " << rep.rows << "x" << rep.cols << " effective_rank="
            << rep.effective_rank;
        if (rep.zero) out << " (zero perturbation)";
        out << "\n";
    }
    if (!out_csv.empty()) {
        try {
            write_text_file(out_csv, rank_report_csv(reports));
        } catch (const std::exception& e) {
            err << "rank: " << e.what() << "\n";
            return kExitIo;
        }
    }
    return kExitOk;
}

int cmd_cost(const CostSpec& spec, const std::string& method, bool csv, std::ostream& out,
             std::ostream& err) {
    try {
        spec.validate();
        if (method.empty()) {
            out << compare_table(spec, csv);
            return kExitOk;
        }
        const CostMethod m = cost_method_from_string(method);
        const long long bp = unit_backward_passes(
            m == CostMethod::badam ? BackwardScheme::badam : BackwardScheme::full, spec.K, spec.D);
        if (csv) {
            out << "method,memory_gb,unit_backward_passes\n";
            out << method << "," << format_g17(memory_gb(m, spec)) << "," << bp << "\n";
        } else {
            out << method << ": memory " << format_g17(memory_gb(m, spec)) << " GB, "
                << bp << " unit backward passes\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        err << "cost: " << e.what() << "\n";
        return kExitUsage;
    }
}

}  // namespace bcd
