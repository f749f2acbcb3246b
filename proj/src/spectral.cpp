#include "bcd/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcd {

namespace {

constexpr double kJacobiTol = 1e-12;
constexpr double kThresholdTol = 1e-12;

// One-sided Jacobi on the columns of u (m x n, m >= n): rotate column pairs
// until every pair is orthogonal relative to the column norms. Singular
// values are the final column norms.
std::vector<double> jacobi_column_norms(Matrix u) {
    const std::size_t m = u.rows;
    const std::size_t n = u.cols;
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double app = 0.0, aqq = 0.0, apq = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    const double up = u.at(i, p);
                    const double uq = u.at(i, q);
                    app += up * up;
                    aqq += uq * uq;
                    apq += up * uq;
                }
                if (app == 0.0 || aqq == 0.0) continue;
                if (std::abs(apq) <= kJacobiTol * std::sqrt(app * aqq)) continue;
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double up = u.at(i, p);
                    const double uq = u.at(i, q);
                    u.at(i, p) = c * up - s * uq;
                    u.at(i, q) = s * up + c * uq;
                }
                rotated = true;
            }
        }
        if (!rotated) break;
    }
    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += u.at(i, j) * u.at(i, j);
        sigma[j] = std::sqrt(s);
    }
    std::sort(sigma.begin(), sigma.end(), std::greater<double>());
    return sigma;
}

}  // namespace

std::vector<double> singular_values(const Matrix& a) {
    if (a.rows == 0 || a.cols == 0) throw std::invalid_argument("empty matrix");
    for (double v : a.data)
        if (!std::isfinite(v)) throw std::invalid_argument("matrix has non-finite entries");
    if (a.rows >= a.cols) return jacobi_column_norms(a);
    // work on the transpose so columns are the short side
    Matrix t(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
    return jacobi_column_norms(std::move(t));
}

double cvar_from_spectrum(std::span<const double> sigma, std::size_t r) {
    if (r > sigma.size()) throw std::invalid_argument("r exceeds min(rows, cols)");
    double total = 0.0;
    for (double s : sigma) total += s * s;
    if (total == 0.0) throw std::invalid_argument("undefined cvar for the zero matrix");
    if (r == 0) return 0.0;
    double head = 0.0;
    for (std::size_t i = 0; i < r; ++i) head += sigma[i] * sigma[i];
    return head / total;
}

double cvar(const Matrix& a, std::size_t r) {
    return cvar_from_spectrum(singular_values(a), r);
}

std::size_t effective_rank_from_spectrum(std::span<const double> sigma, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw std::invalid_argument("threshold must lie in (0,1]");
    double total = 0.0;
    for (double s : sigma) total += s * s;
    if (total == 0.0) return 0;
    double head = 0.0;
    for (std::size_t r = 1; r <= sigma.size(); ++r) {
        head += sigma[r - 1] * sigma[r - 1];
        if (head / total >= threshold - kThresholdTol) return r;
    }
    return sigma.size();
}

std::size_t effective_rank(const Matrix& a, double threshold) {
    return effective_rank_from_spectrum(singular_values(a), threshold);
}

SpectralReport spectral_report(std::string name, const Matrix& a, double threshold) {
    SpectralReport rep;
    rep.name = std::move(name);
    rep.rows = a.rows;
    rep.cols = a.cols;
    rep.sigma = singular_values(a);
    double total = 0.0;
    for (double s : rep.sigma) total += s * s;
    if (total == 0.0) {
        rep.zero = true;
        rep.effective_rank = 0;
        return rep;
    }
    rep.cvar_curve.resize(rep.sigma.size());
    double head = 0.0;
    for (std::size_t r = 0; r < rep.sigma.size(); ++r) {
        head += rep.sigma[r] * rep.sigma[r];
        rep.cvar_curve[r] = head / total;
    }
    rep.effective_rank = effective_rank_from_spectrum(rep.sigma, threshold);
    return rep;
}

std::vector<SpectralReport> perturbation_report(const ParamStore& theta_final,
                                                const ParamStore& theta_initial,
                                                double threshold) {
    if (!theta_final.same_layout(theta_initial))
        throw std::invalid_argument("parameter layouts do not match");
    std::vector<SpectralReport> reports;
    for (const auto& spec : theta_final.layout()) {
        if (spec.is_vector()) continue;
        Matrix delta(spec.rows, spec.cols);
        const auto after = theta_final.entry_values(spec);
        const auto before = theta_initial.entry_values(spec);
        for (std::size_t i = 0; i < delta.data.size(); ++i) delta.data[i] = after[i] - before[i];
        reports.push_back(spectral_report(spec.name, delta, threshold));
    }
    return reports;
}

}  // namespace bcd
