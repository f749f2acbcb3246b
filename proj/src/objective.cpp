#include "bcd/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "bcd/rng.hpp"
#include "bcd/vec.hpp"

namespace bcd {

namespace {

void check_batch(const Objective& obj, Batch batch) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    const auto n = static_cast<long long>(obj.num_samples());
    for (int j : batch)
        if (j < 0 || j >= n) throw std::invalid_argument("batch index out of range");
}

void check_block(const Objective& obj, const Block& block) {
    if (block.ranges.empty()) throw std::invalid_argument("block has no ranges");
    for (const auto& r : block.ranges)
        if (r.begin >= r.end || r.end > obj.dim())
            throw std::invalid_argument("block range out of bounds");
}

std::vector<double> gaussian_vector(std::uint64_t seed, std::uint64_t stream, std::size_t count) {
    CounterRng rng(seed, stream);
    std::vector<double> out(count);
    for (auto& v : out) v = rng.next_normal();
    return out;
}

// log(1 + exp(-t)) without overflow
double log1p_exp_neg(double t) {
    if (t > 0.0) return std::log1p(std::exp(-t));
    return -t + std::log1p(std::exp(t));
}

}  // namespace

double sym_lambda_max(const Matrix& a) {
    if (a.rows != a.cols) throw std::invalid_argument("matrix must be square");
    const std::size_t n = a.rows;
    if (n == 0) return 0.0;
    bool is_diag = true;
    for (std::size_t i = 0; i < n && is_diag; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && a.at(i, j) != 0.0) { is_diag = false; break; }
    if (is_diag) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::abs(a.at(i, i)));
        return m;
    }
    // power iteration on a fixed pseudo-random start vector
    std::vector<double> v = gaussian_vector(0xA11CE, rng_stream::probe, n);
    std::vector<double> av(n);
    double rayleigh = 0.0;
    for (int it = 0; it < 2000; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += a.at(i, j) * v[j];
            av[i] = s;
        }
        const double nv = norm(av);
        if (nv == 0.0) return 0.0;
        const double next = dot(v, av) / squared_norm(v);
        for (std::size_t i = 0; i < n; ++i) v[i] = av[i] / nv;
        if (it > 4 && std::abs(next - rayleigh) <= 1e-14 * std::abs(next)) {
            rayleigh = next;
            break;
        }
        rayleigh = next;
    }
    return std::abs(rayleigh);
}

double eval_loss(const Objective& obj, const ParamStore& theta, Batch batch) {
    check_batch(obj, batch);
    return obj.loss(theta, batch);
}

std::vector<double> eval_grad(const Objective& obj, const ParamStore& theta, Batch batch) {
    check_batch(obj, batch);
    std::vector<double> g(obj.dim(), 0.0);
    obj.grad(theta, batch, g);
    return g;
}

std::vector<double> eval_block_grad(const Objective& obj, const ParamStore& theta, Batch batch,
                                    const Block& block) {
    check_block(obj, block);
    const std::vector<double> g = eval_grad(obj, theta, batch);
    std::vector<double> out;
    out.reserve(block.size());
    for (const auto& r : block.ranges)
        for (std::size_t i = r.begin; i < r.end; ++i) out.push_back(g[i]);
    return out;
}

std::vector<double> fd_gradient(const Objective& obj, const ParamStore& theta, Batch batch,
                                double h) {
    if (!(h > 0.0)) throw std::invalid_argument("step size h must be positive");
    check_batch(obj, batch);
    ParamStore point = theta;
    std::vector<double> g(obj.dim());
    for (std::size_t i = 0; i < obj.dim(); ++i) {
        const double orig = point[i];
        point[i] = orig + h;
        const double up = obj.loss(point, batch);
        point[i] = orig - h;
        const double down = obj.loss(point, batch);
        point[i] = orig;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

double estimate_block_smoothness(const Objective& obj, const Block& block, int samples,
                                 std::uint64_t seed) {
    check_block(obj, block);
    if (samples < 2) throw std::invalid_argument("need at least 2 samples");
    if (obj.kind() == "quadratic") return obj.block_smoothness(block);

    const std::vector<int> batch = full_batch(obj);
    CounterRng rng(seed, rng_stream::probe);
    double best = 0.0;
    for (int s = 0; s < samples; ++s) {
        ParamStore base = obj.initial_point(rng.next_u64(), 1.0);
        ParamStore p1 = base;
        ParamStore p2 = base;
        for (const auto& r : block.ranges)
            for (std::size_t i = r.begin; i < r.end; ++i) {
                p1[i] += 0.5 * rng.next_normal();
                p2[i] += 0.5 * rng.next_normal();
            }
        const std::vector<double> g1 = eval_block_grad(obj, p1, batch, block);
        const std::vector<double> g2 = eval_block_grad(obj, p2, batch, block);
        double num = 0.0, den = 0.0;
        std::size_t pos = 0;
        for (const auto& r : block.ranges)
            for (std::size_t i = r.begin; i < r.end; ++i, ++pos) {
                const double dg = g1[pos] - g2[pos];
                const double dt = p1[i] - p2[i];
                num += dg * dg;
                den += dt * dt;
            }
        if (den > 0.0) best = std::max(best, std::sqrt(num / den));
    }
    return best;
}

std::vector<int> full_batch(const Objective& obj) {
    std::vector<int> b(obj.num_samples());
    std::iota(b.begin(), b.end(), 0);
    return b;
}

// ---------------------------------------------------------------------------
// quadratic

QuadraticObjective::QuadraticObjective(Matrix a, std::size_t n_samples)
    : a_(std::move(a)), n_(n_samples) {
    if (a_.rows != a_.cols || a_.rows == 0) throw std::invalid_argument("A must be square and non-empty");
    if (n_ < 1) throw std::invalid_argument("need at least one training point");
    for (std::size_t i = 0; i < a_.rows; ++i) {
        if (a_.at(i, i) < 0.0) throw std::invalid_argument("A must be positive semidefinite");
        for (std::size_t j = i + 1; j < a_.cols; ++j)
            if (a_.at(i, j) != a_.at(j, i)) throw std::invalid_argument("A must be symmetric");
    }
    layout_ = {MatrixSpec{"theta", a_.rows, 1, 0}};
}

QuadraticObjective QuadraticObjective::diagonal(std::vector<double> eigs, std::size_t n_samples) {
    return QuadraticObjective(Matrix::diagonal(eigs), n_samples);
}

ParamStore QuadraticObjective::initial_point(std::uint64_t seed, double scale) const {
    ParamStore p(layout_);
    CounterRng rng(seed, rng_stream::init);
    for (std::size_t i = 0; i < p.dim(); ++i) p[i] = scale * rng.next_normal();
    return p;
}

double QuadraticObjective::loss(const ParamStore& theta, Batch) const {
    // every l_j is identical, so the batch mean is the full objective
    double s = 0.0;
    for (std::size_t i = 0; i < a_.rows; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a_.cols; ++j) row += a_.at(i, j) * theta[j];
        s += theta[i] * row;
    }
    return 0.5 * s;
}

void QuadraticObjective::grad(const ParamStore& theta, Batch, std::span<double> out) const {
    for (std::size_t i = 0; i < a_.rows; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < a_.cols; ++j) row += a_.at(i, j) * theta[j];
        out[i] = row;
    }
}

double QuadraticObjective::smoothness() const { return sym_lambda_max(a_); }

double QuadraticObjective::block_smoothness(const Block& block) const {
    std::vector<std::size_t> idx;
    for (const auto& r : block.ranges)
        for (std::size_t i = r.begin; i < r.end; ++i) idx.push_back(i);
    Matrix sub(idx.size(), idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < idx.size(); ++j) sub.at(i, j) = a_.at(idx[i], idx[j]);
    return sym_lambda_max(sub);
}

// ---------------------------------------------------------------------------
// logistic regression

LogisticObjective::LogisticObjective(std::size_t dim, std::size_t n, double l2,
                                     double label_noise, std::uint64_t seed)
    : d_(dim), n_(n), l2_(l2) {
    if (d_ == 0 || n_ == 0) throw std::invalid_argument("need dim >= 1 and n >= 1");
    if (l2_ < 0.0) throw std::invalid_argument("l2 coefficient must be nonnegative");
    x_ = gaussian_vector(seed, rng_stream::data_x, n_ * d_);
    std::vector<double> w = gaussian_vector(seed, rng_stream::teacher, d_);
    const double wn = norm(w);
    if (wn > 0.0)
        for (auto& v : w) v /= wn;
    CounterRng noise(seed, rng_stream::data_y);
    y_.resize(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        const double margin =
            dot(std::span<const double>(x_).subspan(j * d_, d_), w) + label_noise * noise.next_normal();
        y_[j] = margin >= 0.0 ? 1.0 : -1.0;
    }
    layout_ = {MatrixSpec{"theta", d_, 1, 0}};
}

ParamStore LogisticObjective::initial_point(std::uint64_t seed, double scale) const {
    ParamStore p(layout_);
    CounterRng rng(seed, rng_stream::init);
    for (std::size_t i = 0; i < p.dim(); ++i) p[i] = scale * rng.next_normal();
    return p;
}

double LogisticObjective::loss(const ParamStore& theta, Batch batch) const {
    double s = 0.0;
    for (int j : batch) {
        const auto xj = std::span<const double>(x_).subspan(static_cast<std::size_t>(j) * d_, d_);
        s += log1p_exp_neg(y_[static_cast<std::size_t>(j)] * dot(xj, theta.values()));
    }
    return s / static_cast<double>(batch.size()) + 0.5 * l2_ * squared_norm(theta.values());
}

void LogisticObjective::grad(const ParamStore& theta, Batch batch, std::span<double> out) const {
    std::fill(out.begin(), out.end(), 0.0);
    for (int j : batch) {
        const auto xj = std::span<const double>(x_).subspan(static_cast<std::size_t>(j) * d_, d_);
        const double yj = y_[static_cast<std::size_t>(j)];
        const double t = yj * dot(xj, theta.values());
        const double coef = -yj / (1.0 + std::exp(t));
        for (std::size_t c = 0; c < d_; ++c) out[c] += coef * xj[c];
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (std::size_t c = 0; c < d_; ++c) out[c] = out[c] * inv + l2_ * theta[c];
}

double LogisticObjective::smoothness() const {
    Matrix gram(d_, d_);
    for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t a = 0; a < d_; ++a)
            for (std::size_t b = 0; b < d_; ++b)
                gram.at(a, b) += x_[j * d_ + a] * x_[j * d_ + b];
    // logistic curvature is at most 1/4; inflate the power-iteration estimate
    // slightly so the result stays a valid upper bound
    return 0.25 * sym_lambda_max(gram) / static_cast<double>(n_) * (1.0 + 1e-9) + l2_;
}

double LogisticObjective::block_smoothness(const Block& block) const {
    std::vector<std::size_t> idx;
    for (const auto& r : block.ranges)
        for (std::size_t i = r.begin; i < r.end; ++i) idx.push_back(i);
    Matrix gram(idx.size(), idx.size());
    for (std::size_t j = 0; j < n_; ++j)
        for (std::size_t a = 0; a < idx.size(); ++a)
            for (std::size_t b = 0; b < idx.size(); ++b)
                gram.at(a, b) += x_[j * d_ + idx[a]] * x_[j * d_ + idx[b]];
    return 0.25 * sym_lambda_max(gram) / static_cast<double>(n_) * (1.0 + 1e-9) + l2_;
}

double LogisticObjective::loss_optimum() const {
    return std::numeric_limits<double>::quiet_NaN();
}

// ---------------------------------------------------------------------------
// two-layer tanh MLP

MlpObjective::MlpObjective(std::size_t in, std::size_t hidden, std::size_t out, std::size_t n,
                           double label_noise, std::uint64_t seed)
    : in_(in), hidden_(hidden), out_(out), n_(n) {
    if (in_ == 0 || hidden_ == 0 || out_ == 0 || n_ == 0)
        throw std::invalid_argument("mlp dimensions and n must be positive");
    d_ = hidden_ * in_ + hidden_ + out_ * hidden_ + out_;
    layout_ = {
        MatrixSpec{"W1", hidden_, in_, 0},
        MatrixSpec{"b1", hidden_, 1, hidden_ * in_},
        MatrixSpec{"W2", out_, hidden_, hidden_ * in_ + hidden_},
        MatrixSpec{"b2", out_, 1, hidden_ * in_ + hidden_ + out_ * hidden_},
    };

    x_ = gaussian_vector(seed, rng_stream::data_x, n_ * in_);
    // noisy random teacher of the same shape, zero biases
    const std::vector<double> tw1 = gaussian_vector(seed, rng_stream::teacher, hidden_ * in_);
    const std::vector<double> tw2 =
        gaussian_vector(seed ^ 0x7ea0c4e6u, rng_stream::teacher, out_ * hidden_);
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in_));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    CounterRng noise(seed, rng_stream::data_y);
    y_.resize(n_ * out_);
    std::vector<double> h(hidden_);
    for (std::size_t j = 0; j < n_; ++j) {
        const double* xj = &x_[j * in_];
        for (std::size_t a = 0; a < hidden_; ++a) {
            double z = 0.0;
            for (std::size_t b = 0; b < in_; ++b) z += s1 * tw1[a * in_ + b] * xj[b];
            h[a] = std::tanh(z);
        }
        for (std::size_t o = 0; o < out_; ++o) {
            double z = 0.0;
            for (std::size_t a = 0; a < hidden_; ++a) z += s2 * tw2[o * hidden_ + a] * h[a];
            y_[j * out_ + o] = z + label_noise * noise.next_normal();
        }
    }
}

ParamStore MlpObjective::initial_point(std::uint64_t seed, double scale) const {
    ParamStore p(layout_);
    CounterRng rng(seed, rng_stream::init);
    for (const auto& spec : layout_) {
        auto vals = p.entry_values(spec);
        if (spec.is_vector()) continue;  // biases start at zero
        const double s = scale / std::sqrt(static_cast<double>(spec.cols));
        for (auto& v : vals) v = s * rng.next_normal();
    }
    return p;
}

double MlpObjective::loss(const ParamStore& theta, Batch batch) const {
    const double* w1 = theta.values().data();
    const double* b1 = w1 + hidden_ * in_;
    const double* w2 = b1 + hidden_;
    const double* b2 = w2 + out_ * hidden_;
    std::vector<double> h(hidden_);
    double s = 0.0;
    for (int j : batch) {
        const double* xj = &x_[static_cast<std::size_t>(j) * in_];
        const double* yj = &y_[static_cast<std::size_t>(j) * out_];
        for (std::size_t a = 0; a < hidden_; ++a) {
            double z = b1[a];
            for (std::size_t b = 0; b < in_; ++b) z += w1[a * in_ + b] * xj[b];
            h[a] = std::tanh(z);
        }
        for (std::size_t o = 0; o < out_; ++o) {
            double z = b2[o];
            for (std::size_t a = 0; a < hidden_; ++a) z += w2[o * hidden_ + a] * h[a];
            const double r = z - yj[o];
            s += 0.5 * r * r;
        }
    }
    return s / static_cast<double>(batch.size());
}

void MlpObjective::grad(const ParamStore& theta, Batch batch, std::span<double> out) const {
    const double* w1 = theta.values().data();
    const double* b1 = w1 + hidden_ * in_;
    const double* w2 = b1 + hidden_;
    const double* b2 = w2 + out_ * hidden_;
    double* gw1 = out.data();
    double* gb1 = gw1 + hidden_ * in_;
    double* gw2 = gb1 + hidden_;
    double* gb2 = gw2 + out_ * hidden_;
    std::fill(out.begin(), out.end(), 0.0);

    std::vector<double> h(hidden_), r(out_), dh(hidden_);
    for (int j : batch) {
        const double* xj = &x_[static_cast<std::size_t>(j) * in_];
        const double* yj = &y_[static_cast<std::size_t>(j) * out_];
        for (std::size_t a = 0; a < hidden_; ++a) {
            double z = b1[a];
            for (std::size_t b = 0; b < in_; ++b) z += w1[a * in_ + b] * xj[b];
            h[a] = std::tanh(z);
        }
        for (std::size_t o = 0; o < out_; ++o) {
            double z = b2[o];
            for (std::size_t a = 0; a < hidden_; ++a) z += w2[o * hidden_ + a] * h[a];
            r[o] = z - yj[o];
        }
        for (std::size_t o = 0; o < out_; ++o) {
            gb2[o] += r[o];
            for (std::size_t a = 0; a < hidden_; ++a) gw2[o * hidden_ + a] += r[o] * h[a];
        }
        for (std::size_t a = 0; a < hidden_; ++a) {
            double s = 0.0;
            for (std::size_t o = 0; o < out_; ++o) s += w2[o * hidden_ + a] * r[o];
            dh[a] = s * (1.0 - h[a] * h[a]);
        }
        for (std::size_t a = 0; a < hidden_; ++a) {
            gb1[a] += dh[a];
            for (std::size_t b = 0; b < in_; ++b) gw1[a * in_ + b] += dh[a] * xj[b];
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (auto& v : out) v *= inv;
}

double MlpObjective::smoothness() const { return std::numeric_limits<double>::quiet_NaN(); }

double MlpObjective::block_smoothness(const Block&) const {
    return std::numeric_limits<double>::quiet_NaN();
}

double MlpObjective::loss_optimum() const { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace bcd
