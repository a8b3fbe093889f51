#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "mdgait/errors.hpp"

namespace mdgait {

using cplx = std::complex<double>;

// Dense row-major matrix of doubles. Spectrograms store frames as rows and
// frequency bins as columns; gray images store frequency rows (ascending
// |Doppler|) and time columns.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    double max_value() const;
    double min_value() const;

    // Rectangular copy: rows [r0, r0+nrows), cols [c0, c0+ncols).
    Matrix block(std::size_t r0, std::size_t c0, std::size_t nrows, std::size_t ncols) const;

    // New matrix with the row order reversed (row 0 becomes the last row).
    Matrix flipped_rows() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

} // namespace mdgait
