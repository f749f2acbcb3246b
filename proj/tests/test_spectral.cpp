#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bcd/rng.hpp"
#include "bcd/spectral.hpp"

using namespace bcd;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    Matrix a(rows, cols);
    CounterRng rng(seed, rng_stream::probe);
    for (auto& v : a.data) v = rng.next_normal();
    return a;
}

// independent oracle: eigenvalues of A'A via power iteration with Hotelling
// deflation; returns their square roots, descending
std::vector<double> power_iteration_sigma(const Matrix& a, std::size_t count) {
    const std::size_t n = a.cols;
    Matrix b(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows; ++r) s += a.at(r, i) * a.at(r, j);
            b.at(i, j) = s;
        }
    std::vector<double> sigma;
    CounterRng rng(31, rng_stream::probe);
    for (std::size_t rank = 0; rank < count; ++rank) {
        std::vector<double> v(n);
        for (auto& x : v) x = rng.next_normal();
        double lambda = 0.0;
        for (int it = 0; it < 20000; ++it) {
            std::vector<double> bv(n, 0.0);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) bv[i] += b.at(i, j) * v[j];
            double nv = 0.0;
            for (double x : bv) nv += x * x;
            nv = std::sqrt(nv);
            if (nv == 0.0) break;
            double next = 0.0;
            for (std::size_t i = 0; i < n; ++i) next += v[i] * bv[i];
            for (std::size_t i = 0; i < n; ++i) v[i] = bv[i] / nv;
            if (it > 10 && std::abs(next - lambda) <= 1e-15 * std::abs(next)) {
                lambda = next;
                break;
            }
            lambda = next;
        }
        sigma.push_back(std::sqrt(std::max(lambda, 0.0)));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) b.at(i, j) -= lambda * v[i] * v[j];
    }
    std::sort(sigma.begin(), sigma.end(), std::greater<double>());
    return sigma;
}

// Gram-Schmidt orthogonalization of a random square matrix
Matrix random_orthogonal(std::size_t n, std::uint64_t seed) {
    Matrix q = random_matrix(n, n, seed);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t prev = 0; prev < j; ++prev) {
            double proj = 0.0;
            for (std::size_t i = 0; i < n; ++i) proj += q.at(i, j) * q.at(i, prev);
            for (std::size_t i = 0; i < n; ++i) q.at(i, j) -= proj * q.at(i, prev);
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += q.at(i, j) * q.at(i, j);
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) q.at(i, j) /= norm;
    }
    return q;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a.at(i, k);
            for (std::size_t j = 0; j < b.cols; ++j) c.at(i, j) += aik * b.at(k, j);
        }
    return c;
}

}  // namespace

TEST_CASE("diagonal spectra are exact") {
    const auto sigma = singular_values(Matrix::diagonal({3.0, 4.0}));
    REQUIRE(sigma.size() == 2);
    CHECK(sigma[0] == 4.0);
    CHECK(sigma[1] == 3.0);

    const Matrix zero(3, 2);
    for (double s : singular_values(zero)) CHECK(s == 0.0);
}

TEST_CASE("non-finite entries are rejected") {
    Matrix bad(2, 2);
    bad.at(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(singular_values(bad), std::invalid_argument);
}

TEST_CASE("jacobi spectrum matches the power-iteration oracle") {
    const Matrix a = random_matrix(20, 20, 11);
    const auto jacobi = singular_values(a);
    const auto oracle = power_iteration_sigma(a, 20);
    REQUIRE(jacobi.size() == oracle.size());
    for (std::size_t i = 0; i < jacobi.size(); ++i)
        CHECK(jacobi[i] == doctest::Approx(oracle[i]).epsilon(1e-8));
}

TEST_CASE("spectrum of a constructed factorization is recovered") {
    const std::vector<double> chosen = {9.0, 4.0, 2.5, 1.0, 0.25};
    const Matrix u = random_orthogonal(5, 3);
    const Matrix v = random_orthogonal(5, 4);
    Matrix vt(5, 5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) vt.at(i, j) = v.at(j, i);
    // A = U diag V': singular values are the chosen diagonal
    const Matrix a = multiply(multiply(u, Matrix::diagonal(chosen)), vt);
    const auto sigma = singular_values(a);
    for (std::size_t i = 0; i < 5; ++i)
        CHECK(sigma[i] == doctest::Approx(chosen[i]).epsilon(1e-12));
}

TEST_CASE("transposition preserves the spectrum") {
    const Matrix a = random_matrix(7, 4, 5);
    Matrix at(4, 7);
    for (std::size_t i = 0; i < 7; ++i)
        for (std::size_t j = 0; j < 4; ++j) at.at(j, i) = a.at(i, j);
    const auto sa = singular_values(a);
    const auto sat = singular_values(at);
    REQUIRE(sa.size() == 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(sa[i] == doctest::Approx(sat[i]).epsilon(1e-13));
}

TEST_CASE("cvar fractions by hand") {
    const Matrix d34 = Matrix::diagonal({3.0, 4.0});
    CHECK(cvar(d34, 0) == 0.0);
    CHECK(cvar(d34, 1) == 0.64);  // 16/25
    CHECK(cvar(d34, 2) == 1.0);

    Matrix outer(3, 4);
    const double uvec[3] = {1.0, -2.0, 0.5};
    const double vvec[4] = {2.0, 1.0, 0.0, -1.0};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 4; ++j) outer.at(i, j) = uvec[i] * vvec[j];
    CHECK(cvar(outer, 1) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(cvar(d34, 3), std::invalid_argument);
    const Matrix zero(2, 2);
    CHECK_THROWS_WITH_AS(cvar(zero, 1), "undefined cvar for the zero matrix",
                         std::invalid_argument);
}

TEST_CASE("effective rank thresholds") {
    CHECK(effective_rank(Matrix::diagonal({3.0, 4.0})) == 2);        // cvar(1) = 0.64 < 0.9
    CHECK(effective_rank(Matrix::diagonal({10.0, 1.0, 1.0})) == 1);  // 100/102 >= 0.9

    Matrix outer(3, 3);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) outer.at(i, j) = (i + 1.0) * (j + 0.5);
    CHECK(effective_rank(outer) == 1);

    CHECK(effective_rank(Matrix(4, 4)) == 0);  // zero matrix, flagged as rank 0
    CHECK_THROWS_AS(effective_rank(outer, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(effective_rank(outer, 1.5), std::invalid_argument);
}

TEST_CASE("threshold 1 recovers the numerical rank") {
    // rank-3 matrix from three scaled outer products
    Matrix a(6, 5);
    CounterRng rng(77, rng_stream::probe);
    for (int r = 0; r < 3; ++r) {
        std::vector<double> u(6), v(5);
        for (auto& x : u) x = rng.next_normal();
        for (auto& x : v) x = rng.next_normal();
        const double scale = std::pow(4.0, -r);
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = 0; j < 5; ++j) a.at(i, j) += scale * u[i] * v[j];
    }
    const auto sigma = singular_values(a);
    const auto numerical_rank = static_cast<std::size_t>(
        std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > 1e-12 * sigma[0]; }));
    CHECK(numerical_rank == 3);
    CHECK(effective_rank(a, 1.0) == numerical_rank);
}

TEST_CASE("frobenius mass equals the squared spectrum") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Matrix a = random_matrix(12, 9, seed);
        double frob = 0.0;
        for (double v : a.data) frob += v * v;
        double mass = 0.0;
        for (double s : singular_values(a)) mass += s * s;
        CHECK(frob == doctest::Approx(mass).epsilon(1e-10));
    }
}

TEST_CASE("orthogonal rotations preserve the effective rank") {
    const Matrix a = Matrix::diagonal({6.0, 5.0, 3.0, 1.0, 0.5, 0.1, 0.05, 0.01});
    const std::size_t base = effective_rank(a);
    for (std::uint64_t seed = 2; seed <= 4; ++seed) {
        const Matrix rotated =
            multiply(multiply(random_orthogonal(8, seed), a), random_orthogonal(8, seed + 50));
        CHECK(effective_rank(rotated) == base);
    }
}

TEST_CASE("cvar curves are monotone with full mass at the end") {
    const Matrix a = random_matrix(10, 6, 9);
    const SpectralReport rep = spectral_report("delta", a);
    REQUIRE(rep.cvar_curve.size() == 6);
    double prev = 0.0;
    for (double c : rep.cvar_curve) {
        CHECK(c >= prev);
        prev = c;
    }
    CHECK(rep.cvar_curve.back() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(rep.zero);
}

TEST_CASE("perturbation reports cover weight matrices only") {
    const std::vector<MatrixSpec> layout = {MatrixSpec{"W1", 3, 2, 0}, MatrixSpec{"b1", 3, 1, 6},
                                            MatrixSpec{"W2", 2, 3, 9}, MatrixSpec{"b2", 2, 1, 15}};
    const ParamStore before(layout);
    ParamStore after(layout);
    for (std::size_t i = 0; i < after.dim(); ++i) after[i] = static_cast<double>(i) * 0.1;

    const auto reports = perturbation_report(after, before);
    REQUIRE(reports.size() == 2);  // bias vectors skipped
    CHECK(reports[0].name == "W1");
    CHECK(reports[1].name == "W2");
    CHECK(reports[0].rows == 3);
    CHECK(reports[0].cols == 2);
    CHECK_FALSE(reports[0].zero);

    const auto unchanged = perturbation_report(before, before);
    for (const auto& rep : unchanged) {
        CHECK(rep.zero);
        CHECK(rep.effective_rank == 0);
        CHECK(rep.cvar_curve.empty());
    }

    const ParamStore other(std::vector<MatrixSpec>{
        MatrixSpec{"W1", 2, 3, 0}, MatrixSpec{"b1", 3, 1, 6}, MatrixSpec{"W2", 2, 3, 9},
        MatrixSpec{"b2", 2, 1, 15}});
    CHECK_THROWS_AS(perturbation_report(after, other), std::invalid_argument);
}
