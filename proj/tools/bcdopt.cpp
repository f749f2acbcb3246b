#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcd/commands.hpp"

namespace {

std::string resolve_out_dir(const std::string& flag_dir, const std::string& cfg_dir) {
    if (const char* env = std::getenv("BCD_ADAM_OUT"); env && *env) return env;
    if (!flag_dir.empty()) return flag_dir;
    return cfg_dir;
}

std::vector<double> parse_delta_list(const std::string& text) {
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = std::min(text.find(',', pos), text.size());
        const std::string item = text.substr(pos, comma - pos);
        if (!item.empty()) out.push_back(std::stod(item));
        pos = comma + 1;
        if (comma == text.size()) break;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block coordinate descent optimization workbench"};
    app.require_subcommand(1);

    // train
    auto* train = app.add_subcommand("train", "run a training experiment");
    std::string config_path;
    std::string out_flag;
    std::vector<std::string> overrides;
    train->add_option("config", config_path, "key = value config file");
    train->add_option("-o,--out", out_flag, "output directory");
    train->add_option("--set", overrides, "override a config key (key=value)");

    // check
    auto* check = app.add_subcommand("check", "verify descent inequalities on a stored run");
    std::string run_dir;
    bool force_theorem = false;
    std::string deltas_text;
    double l_override = std::numeric_limits<double>::quiet_NaN();
    double lbar_override = std::numeric_limits<double>::quiet_NaN();
    check->add_option("run_dir", run_dir, "directory containing trace.csv and summary.json")
        ->required();
    check->add_flag("--force-theorem", force_theorem,
                    "run the descent checks even when alpha exceeds the theorem bound");
    check->add_option("--deltas", deltas_text,
                      "comma-separated gradient tolerances for the complexity check");
    check->add_option("--L", l_override, "override the global smoothness constant");
    check->add_option("--Lbar", lbar_override, "override the max block smoothness constant");

    // rank
    auto* rank = app.add_subcommand("rank", "spectral analysis of a learned perturbation");
    std::string init_path, final_path, rank_csv;
    double threshold = 0.9;
    rank->add_option("--init", init_path, "initial parameter snapshot")->required();
    rank->add_option("--final", final_path, "final parameter snapshot")->required();
    rank->add_option("-o,--out", rank_csv, "CSV output path");
    rank->add_option("--threshold", threshold, "effective-rank mass threshold (default 0.9)");

    // cost
    auto* cost = app.add_subcommand("cost", "analytical memory and backward-pass model");
    bcd::CostSpec spec;
    std::string method;
    bool csv = false;
    cost->add_option("--M", spec.M, "model size in billions of parameters")->required();
    cost->add_option("--D", spec.D, "block / layer count");
    cost->add_option("--r", spec.r, "low-rank adapter rank");
    cost->add_option("--mdim", spec.mdim, "square weight-matrix dimension");
    cost->add_option("--K", spec.K, "inner steps per block");
    cost->add_option("--method", method, "adam | lomo | lora | badam (default: all)");
    cost->add_flag("--csv", csv, "CSV output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? bcd::kExitOk : bcd::kExitUsage;
    }

    if (*train) {
        bcd::ExperimentConfig cfg;
        try {
            std::string text;
            if (!config_path.empty()) text = bcd::read_text_file(config_path);
            cfg = bcd::parse_config(text);
            for (const auto& kv : overrides) bcd::apply_config_override(cfg, kv);
        } catch (const bcd::IoError& e) {
            std::cerr << "train: " << e.what() << "\n";
            return bcd::kExitIo;
        } catch (const std::exception& e) {
            std::cerr << "train: " << e.what() << "\n";
            return bcd::kExitUsage;
        }
        const std::string out_dir = resolve_out_dir(out_flag, cfg.out_dir);
        const int rc = bcd::cmd_train(cfg, out_dir, std::cerr);
        if (rc == bcd::kExitOk) std::cout << "wrote " << out_dir << "\n";
        return rc;
    }
    if (*check) {
        bcd::CheckOptions options;
        options.force_theorem = force_theorem;
        options.L_override = l_override;
        options.L_bar_override = lbar_override;
        try {
            options.deltas = parse_delta_list(deltas_text);
        } catch (const std::exception&) {
            std::cerr << "check: malformed --deltas list\n";
            return bcd::kExitUsage;
        }
        return bcd::cmd_check(run_dir, options, std::cout, std::cerr);
    }
    if (*rank) return bcd::cmd_rank(init_path, final_path, rank_csv, threshold, std::cout, std::cerr);
    if (*cost) return bcd::cmd_cost(spec, method, csv, std::cout, std::cerr);
    return bcd::kExitUsage;
}
