#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bcd/matrix.hpp"
#include "bcd/param_store.hpp"

namespace bcd {

// Full singular spectrum, sorted descending, via one-sided Jacobi rotations
// with convergence tolerance 1e-12 on the remaining off-diagonal mass.
std::vector<double> singular_values(const Matrix& a);

// cumulative explained variance: fraction of squared-spectrum mass carried by
// the top r singular values; cvar(0) = 0, undefined for the zero matrix
double cvar(const Matrix& a, std::size_t r);
double cvar_from_spectrum(std::span<const double> sigma, std::size_t r);

// smallest r with cvar(r) >= threshold; 0 for the zero matrix
std::size_t effective_rank(const Matrix& a, double threshold = 0.9);
std::size_t effective_rank_from_spectrum(std::span<const double> sigma, double threshold = 0.9);

struct SpectralReport {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> sigma;       // descending
    std::vector<double> cvar_curve;  // cvar(1) .. cvar(min(rows, cols)); empty when zero
    std::size_t effective_rank = 0;
    bool zero = false;  // flagged when the perturbation vanishes
};

SpectralReport spectral_report(std::string name, const Matrix& a, double threshold = 0.9);

// One report per named weight matrix of delta = final - initial; bias vectors
// are skipped. Layouts must match.
std::vector<SpectralReport> perturbation_report(const ParamStore& theta_final,
                                                const ParamStore& theta_initial,
                                                double threshold = 0.9);

}  // namespace bcd
