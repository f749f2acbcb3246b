#pragma once

#include <cstddef>
#include <vector>

namespace bcd {

// Dense row-major matrix of 64-bit reals. Deliberately minimal; everything at
// desk scale fits in a flat vector.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::size_t size() const { return rows * cols; }

    static Matrix diagonal(const std::vector<double>& d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m.at(i, i) = d[i];
        return m;
    }

    static Matrix identity(std::size_t n) {
        return diagonal(std::vector<double>(n, 1.0));
    }
};

}  // namespace bcd
