#pragma once

#include <string>

namespace bcd {

enum class CostMethod { adam, lomo, lora, badam };

std::string to_string(CostMethod m);
CostMethod cost_method_from_string(const std::string& s);

// Model/partition sizes the analytical formulas depend on. M is model size in
// billions of parameters; D the block (or layer) count; r the low-rank adapter
// rank; mdim the square weight-matrix dimension; K inner steps per block.
struct CostSpec {
    double M = 1.0;
    int D = 1;
    int r = 8;
    int mdim = 4096;
    long long K = 100;

    void validate() const;
};

// GPU memory in GB for mixed-precision training state (parameters, gradient,
// optimizer states): adam 18M, lomo 2M + 2M/D, lora 2M + 36 r M / mdim,
// badam 2M + 16M/D. Activations and framework buffers are excluded.
double memory_gb(CostMethod method, const CostSpec& spec);

enum class BackwardScheme { badam, full };

// unit backward passes consumed by one block-epoch over K*D batches:
// badam K D (D+1) / 2, full methods K D^2
long long unit_backward_passes(BackwardScheme scheme, long long K, long long D);

// side-by-side memory and backward-pass comparison for all four methods
std::string compare_table(const CostSpec& spec, bool csv = false);

}  // namespace bcd
