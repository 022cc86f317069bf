#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "uqcal/errors.hpp"

namespace uqcal {

/// Minimal dense row-major matrix. Just storage plus bounds-free indexing;
/// the numerics in this project never need BLAS-grade machinery.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
        std::size_t i = 0;
        for (const auto& r : rows) {
            if (r.size() != m.cols_) throw invalid_input("ragged matrix initializer");
            std::size_t j = 0;
            for (double x : r) m(i, j++) = x;
            ++i;
        }
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

    const double* row(std::size_t i) const { return v_.data() + i * cols_; }
    double* row(std::size_t i) { return v_.data() + i * cols_; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return v_.empty(); }

    std::vector<double> col(std::size_t j) const {
        std::vector<double> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
        return out;
    }

    bool all_finite() const {
        for (double x : v_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    const std::vector<double>& data() const { return v_; }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> v_;
};

} // namespace uqcal
