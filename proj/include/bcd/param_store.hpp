#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bcd {

// One named sub-matrix inside the flat parameter vector.
struct MatrixSpec {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::size_t offset = 0;

    std::size_t size() const { return rows * cols; }
    bool is_vector() const { return rows <= 1 || cols <= 1; }
};

// Flat 64-bit parameter vector with a named sub-matrix layout. The layout
// entries tile [0, d) exactly: non-overlapping, no gaps.
class ParamStore {
public:
    ParamStore() = default;
    explicit ParamStore(std::vector<MatrixSpec> layout);

    // single unnamed-structure vector of length d
    static ParamStore flat(std::string name, std::size_t d);

    std::size_t dim() const { return values_.size(); }
    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }
    double& operator[](std::size_t i) { return values_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }

    const std::vector<MatrixSpec>& layout() const { return layout_; }
    const MatrixSpec* find(std::string_view name) const;
    bool same_layout(const ParamStore& other) const;

    std::span<double> entry_values(const MatrixSpec& spec) {
        return std::span<double>(values_).subspan(spec.offset, spec.size());
    }
    std::span<const double> entry_values(const MatrixSpec& spec) const {
        return std::span<const double>(values_).subspan(spec.offset, spec.size());
    }

    // throws if any value is NaN or infinite
    void check_finite() const;

private:
    std::vector<double> values_;
    std::vector<MatrixSpec> layout_;
};

}  // namespace bcd
