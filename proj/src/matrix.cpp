#include "mdgait/matrix.hpp"

#include <algorithm>

namespace mdgait {

double Matrix::max_value() const {
    if (data_.empty()) throw ValidationError("max_value: empty matrix");
    return *std::max_element(data_.begin(), data_.end());
}

double Matrix::min_value() const {
    if (data_.empty()) throw ValidationError("min_value: empty matrix");
    return *std::min_element(data_.begin(), data_.end());
}

Matrix Matrix::block(std::size_t r0, std::size_t c0, std::size_t nrows, std::size_t ncols) const {
    if (r0 + nrows > rows_ || c0 + ncols > cols_)
        throw ValidationError("block: region exceeds matrix bounds");
    Matrix out(nrows, ncols);
    for (std::size_t r = 0; r < nrows; ++r)
        for (std::size_t c = 0; c < ncols; ++c)
            out(r, c) = (*this)(r0 + r, c0 + c);
    return out;
}

Matrix Matrix::flipped_rows() const {
    Matrix out(rows_, cols_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            out(rows_ - 1 - r, c) = (*this)(r, c);
    return out;
}

} // namespace mdgait
