#pragma once

#include <cstddef>
#include <vector>

#include "mdgait/matrix.hpp"

namespace mdgait {

// Hamming window, w(m) = 0.54 - 0.46 cos(2 pi m / (L-1)); strictly positive
// and symmetric for L >= 2.
std::vector<double> hamming_window(std::size_t length);

// Nearest-rank percentile: element at index ceil(q*n) - 1 of the sorted data,
// q in (0, 1]. Does not modify the input.
double percentile(const std::vector<double>& values, double q);

// Sliding-window median with the window shrunk symmetrically at the edges;
// box must be odd.
std::vector<double> median_filter(const std::vector<double>& x, std::size_t box);

// Forward complex DFT, y[k] = sum_m x[m] exp(-2 pi i m k / n). Wraps FFTW
// with an internal aligned buffer pair; one instance per thread (execute is
// not reentrant on the same plan).
class FftPlan {
public:
    explicit FftPlan(std::size_t n);
    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&& other) noexcept;
    FftPlan& operator=(FftPlan&&) = delete;

    void execute(const cplx* in, cplx* out);
    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    void* plan_ = nullptr;
    void* buf_in_ = nullptr;
    void* buf_out_ = nullptr;
};

} // namespace mdgait
