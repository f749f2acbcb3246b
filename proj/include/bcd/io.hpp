#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bcd/optimizer.hpp"
#include "bcd/param_store.hpp"

namespace bcd {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// %.17g rendering: enough digits to round-trip a double exactly; NaN renders
// as the empty string
std::string format_g17(double v);

// Snapshot format: text header (magic, layout table, value count) followed by
// the raw values as little-endian IEEE-754 doubles. Round-trips bitwise.
std::string snapshot_to_bytes(const ParamStore& theta);
ParamStore snapshot_from_bytes(std::string_view bytes);
void write_snapshot(const std::string& path, const ParamStore& theta);
ParamStore read_snapshot(const std::string& path);

// trace CSV with fixed columns
// t,i,k,loss,block_grad_norm,full_grad_norm,h_min,h_max,wall_ms
std::string trace_to_csv(const TrainTrace& trace);
// parses rows only; run-level scalars live in the summary
TrainTrace trace_from_csv(std::string_view csv);

// Run-level metadata persisted as JSON next to the trace.
struct RunSummary {
    std::string name = "run";
    std::string objective = "quadratic";
    std::string rule = "badam";
    std::string mode = "deterministic";
    std::string schedule = "const";
    std::string ordering = "ascending";
    std::string termination = "max_epochs";
    int d = 0, n = 0, D = 0, K = 0, T = 0, B = 0, epochs_run = 0;
    double alpha = 0, beta1 = 0, beta2 = 0, lambda = 0, weight_decay = 0, delta = 0,
           init_scale = 1;
    std::uint64_t seed = 0;
    double initial_loss = std::numeric_limits<double>::quiet_NaN();
    double initial_grad_norm = std::numeric_limits<double>::quiet_NaN();
    double final_loss = std::numeric_limits<double>::quiet_NaN();
    double final_grad_norm = std::numeric_limits<double>::quiet_NaN();
    // smoothness constants of the trained objective; NaN when unknown
    double L = std::numeric_limits<double>::quiet_NaN();
    double L_bar = std::numeric_limits<double>::quiet_NaN();
    double L_min = std::numeric_limits<double>::quiet_NaN();
};

std::string summary_to_json(const RunSummary& summary);
RunSummary summary_from_json(std::string_view text);

void write_text_file(const std::string& path, std::string_view content);
std::string read_text_file(const std::string& path);

}  // namespace bcd
