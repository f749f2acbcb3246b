#include "bcd/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <set>

#include "bcd/theory.hpp"
#include "bcd/vec.hpp"

namespace bcd {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

[[noreturn]] void fail(int line, const std::string& what) {
    if (line <= 0) throw ConfigError(what);  // command-line override, no file line
    throw ConfigError("line " + std::to_string(line) + ": " + what);
}

double to_double(int line, const std::string& key, const std::string& value) {
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || !std::isfinite(v))
        fail(line, "key '" + key + "' expects a finite number, got '" + value + "'");
    return v;
}

long long to_int(int line, const std::string& key, const std::string& value) {
    char* end = nullptr;
    const long long v = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        fail(line, "key '" + key + "' expects an integer, got '" + value + "'");
    return v;
}

bool to_bool(int line, const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    fail(line, "key '" + key + "' expects true or false, got '" + value + "'");
}

std::vector<double> to_double_list(int line, const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= value.size()) {
        const std::size_t comma = std::min(value.find(',', pos), value.size());
        const std::string item = trim(std::string_view(value).substr(pos, comma - pos));
        if (item.empty()) fail(line, "key '" + key + "' has an empty list element");
        out.push_back(to_double(line, key, item));
        pos = comma + 1;
        if (comma == value.size()) break;
    }
    if (out.empty()) fail(line, "key '" + key + "' expects a comma-separated list");
    return out;
}

void set_key(ExperimentConfig& cfg, const std::string& key, const std::string& value,
             int line_no) {
    if (key == "out.dir") {
        cfg.out_dir = value;
    } else if (key == "out.name") {
        cfg.name = value;
    } else if (key == "obj.kind") {
        if (value != "quadratic" && value != "logreg" && value != "mlp")
            fail(line_no, "obj.kind must be quadratic, logreg or mlp");
        cfg.obj_kind = value;
    } else if (key == "obj.dim") {
        const long long v = to_int(line_no, key, value);
        if (v < 1) fail(line_no, "obj.dim must be at least 1");
        cfg.obj_dim = static_cast<int>(v);
    } else if (key == "obj.eigs") {
        cfg.obj_eigs = to_double_list(line_no, key, value);
        for (double e : cfg.obj_eigs)
            if (e < 0.0) fail(line_no, "obj.eigs entries must be nonnegative");
    } else if (key == "obj.eig_min") {
        cfg.eig_min = to_double(line_no, key, value);
        if (cfg.eig_min < 0.0) fail(line_no, "obj.eig_min must be nonnegative");
    } else if (key == "obj.eig_max") {
        cfg.eig_max = to_double(line_no, key, value);
        if (cfg.eig_max < 0.0) fail(line_no, "obj.eig_max must be nonnegative");
    } else if (key == "obj.l2") {
        cfg.l2 = to_double(line_no, key, value);
        if (cfg.l2 < 0.0) fail(line_no, "obj.l2 must be nonnegative");
    } else if (key == "obj.noise") {
        cfg.noise = to_double(line_no, key, value);
        if (cfg.noise < 0.0) fail(line_no, "obj.noise must be nonnegative");
    } else if (key == "obj.in" || key == "obj.hidden" || key == "obj.out") {
        const long long v = to_int(line_no, key, value);
        if (v < 1) fail(line_no, key + " must be at least 1");
        (key == "obj.in" ? cfg.mlp_in : key == "obj.hidden" ? cfg.mlp_hidden : cfg.mlp_out) =
            static_cast<int>(v);
    } else if (key == "init.scale") {
        cfg.init_scale = to_double(line_no, key, value);
        if (cfg.init_scale < 0.0) fail(line_no, "init.scale must be nonnegative");
    } else if (key == "data.n") {
        const long long v = to_int(line_no, key, value);
        if (v < 1) fail(line_no, "data.n must be at least 1");
        cfg.n = static_cast<int>(v);
    } else if (key == "data.B") {
        const long long v = to_int(line_no, key, value);
        if (v < 1) fail(line_no, "data.B must be at least 1");
        cfg.batch_size = static_cast<int>(v);
    } else if (key == "partition.D") {
        const long long v = to_int(line_no, key, value);
        if (v < 1) fail(line_no, "partition.D must be at least 1");
        cfg.D = static_cast<int>(v);
    } else if (key == "partition.ordering") {
        try {
            cfg.ordering = ordering_from_string(value);
        } catch (const std::exception& e) {
            fail(line_no, e.what());
        }
    } else if (key == "partition.scheme") {
        if (value != "uniform" && value != "modules")
            fail(line_no, "partition.scheme must be uniform or modules");
        cfg.partition_scheme = value;
    } else if (key == "opt.rule") {
        try {
            cfg.rule = rule_from_string(value);
        } catch (const std::exception& e) {
            fail(line_no, e.what());
        }
    } else if (key == "opt.alpha") {
        if (value == "theory") {
            cfg.alpha_theory = true;
        } else {
            cfg.alpha = to_double(line_no, key, value);
            if (!(cfg.alpha > 0.0)) fail(line_no, "opt.alpha must be positive");
        }
    } else if (key == "opt.beta1") {
        cfg.beta1 = to_double(line_no, key, value);
        if (!(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0)) fail(line_no, "beta1 out of [0,1)");
    } else if (key == "opt.beta2") {
        cfg.beta2 = to_double(line_no, key, value);
        if (!(cfg.beta2 >= 0.0 && cfg.beta2 < 1.0)) fail(line_no, "beta2 out of [0,1)");
    } else if (key == "opt.lambda") {
        cfg.lambda = to_double(line_no, key, value);
        if (!(cfg.lambda > 0.0)) fail(line_no, "opt.lambda must be positive");
    } else if (key == "opt.K") {
        if (value == "auto") {
            cfg.K_auto = true;
        } else {
            const long long v = to_int(line_no, key, value);
            if (v < 1) fail(line_no, "opt.K must be at least 1");
            cfg.K = static_cast<int>(v);
        }
    } else if (key == "opt.weight_decay") {
        cfg.weight_decay = to_double(line_no, key, value);
        if (cfg.weight_decay < 0.0) fail(line_no, "opt.weight_decay must be nonnegative");
    } else if (key == "opt.schedule") {
        try {
            cfg.schedule = schedule_from_string(value);
        } catch (const std::exception& e) {
            fail(line_no, e.what());
        }
    } else if (key == "run.mode") {
        try {
            cfg.mode = mode_from_string(value);
        } catch (const std::exception& e) {
            fail(line_no, e.what());
        }
    } else if (key == "run.seed") {
        char* end = nullptr;
        cfg.seed = std::strtoull(value.c_str(), &end, 10);
        if (end == value.c_str() || *end != '\0')
            fail(line_no, "key 'run.seed' expects an unsigned integer");
    } else if (key == "run.T") {
        const long long v = to_int(line_no, key, value);
        if (v < 0) fail(line_no, "run.T must be nonnegative");
        cfg.T = static_cast<int>(v);
    } else if (key == "run.delta") {
        cfg.delta = to_double(line_no, key, value);
        if (cfg.delta < 0.0) fail(line_no, "run.delta must be nonnegative");
    } else if (key == "trace.timing") {
        cfg.timing = to_bool(line_no, key, value);
    } else {
        fail(line_no, "unknown key '" + key + "'");
    }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = std::min(text.find('\n', pos), text.size());
        std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        const std::string stripped = trim(line);
        if (!stripped.empty()) {
            const std::size_t eq = stripped.find('=');
            if (eq == std::string::npos)
                fail(line_no, "expected 'key = value', got '" + stripped + "'");
            const std::string key = trim(std::string_view(stripped).substr(0, eq));
            const std::string value = trim(std::string_view(stripped).substr(eq + 1));
            if (key.empty()) fail(line_no, "missing key before '='");
            if (value.empty()) fail(line_no, "missing value for key '" + key + "'");
            if (!seen.insert(key).second) fail(line_no, "duplicate key '" + key + "'");
            set_key(cfg, key, value, line_no);
        }
        if (nl == text.size()) break;
    }
    return cfg;
}

void apply_config_override(ExperimentConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value, got '" + assignment + "'");
    const std::string key = trim(std::string_view(assignment).substr(0, eq));
    const std::string value = trim(std::string_view(assignment).substr(eq + 1));
    if (key.empty() || value.empty())
        throw ConfigError("override must look like key=value, got '" + assignment + "'");
    set_key(cfg, key, value, 0);
}

std::unique_ptr<Objective> make_objective(const ExperimentConfig& cfg) {
    if (cfg.obj_kind == "quadratic") {
        std::vector<double> eigs = cfg.obj_eigs;
        if (eigs.empty()) {
            eigs.resize(static_cast<std::size_t>(cfg.obj_dim));
            const std::size_t d = eigs.size();
            for (std::size_t i = 0; i < d; ++i)
                eigs[i] = d == 1 ? cfg.eig_max
                                 : cfg.eig_min + (cfg.eig_max - cfg.eig_min) *
                                                     static_cast<double>(i) /
                                                     static_cast<double>(d - 1);
        }
        return std::make_unique<QuadraticObjective>(
            QuadraticObjective::diagonal(std::move(eigs), static_cast<std::size_t>(cfg.n)));
    }
    if (cfg.obj_kind == "logreg") {
        return std::make_unique<LogisticObjective>(static_cast<std::size_t>(cfg.obj_dim),
                                                   static_cast<std::size_t>(cfg.n), cfg.l2,
                                                   cfg.noise, cfg.seed);
    }
    if (cfg.obj_kind == "mlp") {
        return std::make_unique<MlpObjective>(
            static_cast<std::size_t>(cfg.mlp_in), static_cast<std::size_t>(cfg.mlp_hidden),
            static_cast<std::size_t>(cfg.mlp_out), static_cast<std::size_t>(cfg.n), cfg.noise,
            cfg.seed);
    }
    throw ConfigError("unknown objective kind '" + cfg.obj_kind + "'");
}

BlockPartition make_partition(const ExperimentConfig& cfg, const Objective& obj) {
    BlockPartition p;
    if (cfg.partition_scheme == "modules") {
        // each weight matrix plus its trailing vectors forms one block
        std::vector<std::vector<std::string>> groups;
        for (const auto& spec : obj.layout()) {
            if (!spec.is_vector() || groups.empty()) groups.push_back({});
            groups.back().push_back(spec.name);
        }
        p = partition_by_modules(obj.layout(), groups);
    } else {
        p = partition_uniform(obj.dim(), cfg.D);
    }
    p.ordering = cfg.ordering;
    p.epoch_seed = cfg.seed;
    return p;
}

RunConfig make_run_config(const ExperimentConfig& cfg, const Objective& obj,
                          const BlockPartition& partition) {
    RunConfig rc;
    rc.alpha = cfg.alpha;
    rc.beta1 = cfg.beta1;
    rc.beta2 = cfg.beta2;
    rc.lambda = cfg.lambda;
    rc.weight_decay = cfg.weight_decay;
    rc.K = cfg.K;
    rc.ordering = cfg.ordering;
    rc.mode = cfg.mode;
    rc.batch_size = cfg.batch_size;
    rc.seed = cfg.seed;
    rc.max_epochs = cfg.T;
    rc.grad_tol = cfg.delta;
    rc.schedule = cfg.schedule;
    rc.init_scale = cfg.init_scale;
    rc.record_timing = cfg.timing;

    if (cfg.K_auto)
        rc.K = suggest_K(cfg.n, cfg.batch_size, partition.block_count());

    if (cfg.alpha_theory) {
        const double L = obj.smoothness();
        if (!std::isfinite(L))
            throw ConfigError("opt.alpha = theory needs an objective with known smoothness");
        double l_bar = 0.0;
        for (const auto& block : partition.blocks)
            l_bar = std::max(l_bar, obj.block_smoothness(block));
        const ParamStore theta0 = obj.initial_point(cfg.seed, cfg.init_scale);
        const std::vector<int> batch = full_batch(obj);
        const double loss0 = eval_loss(obj, theta0, batch);
        double opt = obj.loss_optimum();
        if (!std::isfinite(opt)) opt = 0.0;  // all desk objectives are bounded below by 0
        // trajectory gradient cap implied by the descent property
        const double cap = std::max(1.0, std::sqrt(std::max(2.0 * L * (loss0 - opt), 0.0)));
        TheoryEnv env;
        env.L = L;
        env.L_bar = l_bar;
        env.L_min = l_bar;
        env.G = cap;
        env.lambda = cfg.lambda;
        env.alpha = 1.0;  // unused by the bound
        env.K = rc.K;
        env.D = partition.block_count();
        rc.alpha = max_theory_lr(env);
    }
    rc.validate(cfg.alpha_theory);
    return rc;
}

}  // namespace bcd
