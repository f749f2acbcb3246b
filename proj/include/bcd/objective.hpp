#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "bcd/matrix.hpp"
#include "bcd/param_store.hpp"
#include "bcd/partition.hpp"

namespace bcd {

using Batch = std::span<const int>;

// A differentiable objective of the form L(theta) = mean_j l_j(theta) over n
// training points. Loss/gradient evaluation is pure; per-sample terms are
// accumulated left to right over the batch so results are reproducible.
class Objective {
public:
    virtual ~Objective() = default;

    virtual std::string_view kind() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::size_t num_samples() const = 0;
    virtual const std::vector<MatrixSpec>& layout() const = 0;

    virtual ParamStore initial_point(std::uint64_t seed, double scale) const = 0;

    // mean loss over the batch; batch indices must lie in [0, n)
    virtual double loss(const ParamStore& theta, Batch batch) const = 0;
    // gradient of the mean batch loss, written into out (length d)
    virtual void grad(const ParamStore& theta, Batch batch, std::span<double> out) const = 0;

    // global smoothness constant L: exact for quadratic, an analytic upper
    // bound for logistic regression, NaN when unknown (mlp)
    virtual double smoothness() const = 0;
    // block-restricted smoothness constant, same conventions
    virtual double block_smoothness(const Block& block) const = 0;
    // exact global minimum of the loss when known, NaN otherwise
    virtual double loss_optimum() const = 0;
};

double eval_loss(const Objective& obj, const ParamStore& theta, Batch batch);
std::vector<double> eval_grad(const Objective& obj, const ParamStore& theta, Batch batch);

// gathered sub-vector of eval_grad restricted to the block; equals the
// corresponding slice of the full gradient bitwise
std::vector<double> eval_block_grad(const Objective& obj, const ParamStore& theta, Batch batch,
                                    const Block& block);

// central-difference oracle, (l(theta + h e_i) - l(theta - h e_i)) / (2h)
std::vector<double> fd_gradient(const Objective& obj, const ParamStore& theta, Batch batch,
                                double h);

// max over sampled point pairs (differing only inside the block) of the ratio
// |grad_i(theta1) - grad_i(theta2)| / |theta1_i - theta2_i|; for quadratic
// objectives returns the exact block lambda_max instead
double estimate_block_smoothness(const Objective& obj, const Block& block, int samples,
                                 std::uint64_t seed);

std::vector<int> full_batch(const Objective& obj);

// L(theta) = 1/2 theta' A theta with A symmetric positive semidefinite; every
// training point carries the same loss term, so batch choice is irrelevant.
class QuadraticObjective final : public Objective {
public:
    QuadraticObjective(Matrix a, std::size_t n_samples);
    static QuadraticObjective diagonal(std::vector<double> eigs, std::size_t n_samples = 1);

    std::string_view kind() const override { return "quadratic"; }
    std::size_t dim() const override { return a_.rows; }
    std::size_t num_samples() const override { return n_; }
    const std::vector<MatrixSpec>& layout() const override { return layout_; }
    ParamStore initial_point(std::uint64_t seed, double scale) const override;
    double loss(const ParamStore& theta, Batch batch) const override;
    void grad(const ParamStore& theta, Batch batch, std::span<double> out) const override;
    double smoothness() const override;
    double block_smoothness(const Block& block) const override;
    double loss_optimum() const override { return 0.0; }

    const Matrix& matrix() const { return a_; }

private:
    Matrix a_;
    std::size_t n_;
    std::vector<MatrixSpec> layout_;
};

// l2-regularized logistic regression on synthetic Gaussian data with labels
// from a noisy random linear teacher.
class LogisticObjective final : public Objective {
public:
    LogisticObjective(std::size_t dim, std::size_t n, double l2, double label_noise,
                      std::uint64_t seed);

    std::string_view kind() const override { return "logreg"; }
    std::size_t dim() const override { return d_; }
    std::size_t num_samples() const override { return n_; }
    const std::vector<MatrixSpec>& layout() const override { return layout_; }
    ParamStore initial_point(std::uint64_t seed, double scale) const override;
    double loss(const ParamStore& theta, Batch batch) const override;
    void grad(const ParamStore& theta, Batch batch, std::span<double> out) const override;
    double smoothness() const override;
    double block_smoothness(const Block& block) const override;
    double loss_optimum() const override;

private:
    std::size_t d_, n_;
    double l2_;
    std::vector<double> x_;   // n * d, row-major
    std::vector<double> y_;   // +-1 labels
    std::vector<MatrixSpec> layout_;
};

// Two-layer tanh MLP trained with squared error against a noisy random
// teacher network; gradients come from hand-written backpropagation.
class MlpObjective final : public Objective {
public:
    MlpObjective(std::size_t in, std::size_t hidden, std::size_t out, std::size_t n,
                 double label_noise, std::uint64_t seed);

    std::string_view kind() const override { return "mlp"; }
    std::size_t dim() const override { return d_; }
    std::size_t num_samples() const override { return n_; }
    const std::vector<MatrixSpec>& layout() const override { return layout_; }
    ParamStore initial_point(std::uint64_t seed, double scale) const override;
    double loss(const ParamStore& theta, Batch batch) const override;
    void grad(const ParamStore& theta, Batch batch, std::span<double> out) const override;
    double smoothness() const override;
    double block_smoothness(const Block& block) const override;
    double loss_optimum() const override;

    std::size_t input_dim() const { return in_; }
    std::size_t hidden_dim() const { return hidden_; }
    std::size_t output_dim() const { return out_; }

private:
    std::size_t in_, hidden_, out_, n_, d_;
    std::vector<double> x_;   // n * in
    std::vector<double> y_;   // n * out
    std::vector<MatrixSpec> layout_;
};

// largest eigenvalue of a symmetric matrix: exact scan for diagonal input,
// power iteration with a small safety inflation otherwise
double sym_lambda_max(const Matrix& a);

}  // namespace bcd
