#include "mdgait/signal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

namespace mdgait {

std::vector<double> hamming_window(std::size_t length) {
    if (length < 2) throw ValidationError("hamming_window: length must be >= 2");
    std::vector<double> w(length);
    for (std::size_t m = 0; m < length; ++m)
        w[m] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) /
                                      static_cast<double>(length - 1));
    return w;
}

double percentile(const std::vector<double>& values, double q) {
    if (values.empty()) throw ValidationError("percentile: empty input");
    if (!(q > 0.0 && q <= 1.0)) throw ValidationError("percentile: q must be in (0, 1]");
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(sorted.size())));
    if (rank == 0) rank = 1;
    return sorted[rank - 1];
}

std::vector<double> median_filter(const std::vector<double>& x, std::size_t box) {
    if (box % 2 == 0) throw ValidationError("median_filter: box size must be odd");
    if (x.empty()) return {};
    const std::size_t half = box / 2;
    const std::size_t n = x.size();
    std::vector<double> out(n);
    std::vector<double> window;
    window.reserve(box);
    for (std::size_t i = 0; i < n; ++i) {
        // Shrink symmetrically near the edges so the window stays centered.
        std::size_t h = std::min({half, i, n - 1 - i});
        window.assign(x.begin() + static_cast<std::ptrdiff_t>(i - h),
                      x.begin() + static_cast<std::ptrdiff_t>(i + h + 1));
        std::nth_element(window.begin(), window.begin() + static_cast<std::ptrdiff_t>(h),
                         window.end());
        out[i] = window[h];
    }
    return out;
}

namespace {
// FFTW's planner is not thread-safe; serialize plan creation/destruction.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

FftPlan::FftPlan(std::size_t n) : n_(n) {
    if (n == 0) throw ValidationError("FftPlan: size must be positive");
    std::lock_guard<std::mutex> lock(planner_mutex());
    buf_in_ = fftw_malloc(sizeof(fftw_complex) * n);
    buf_out_ = fftw_malloc(sizeof(fftw_complex) * n);
    if (!buf_in_ || !buf_out_) {
        fftw_free(buf_in_);
        fftw_free(buf_out_);
        throw std::bad_alloc();
    }
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), static_cast<fftw_complex*>(buf_in_),
                             static_cast<fftw_complex*>(buf_out_), FFTW_FORWARD, FFTW_ESTIMATE);
    if (!plan_) {
        fftw_free(buf_in_);
        fftw_free(buf_out_);
        throw std::runtime_error("FftPlan: plan creation failed");
    }
}

FftPlan::~FftPlan() {
    if (plan_ || buf_in_ || buf_out_) {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
        fftw_free(buf_in_);
        fftw_free(buf_out_);
    }
}

FftPlan::FftPlan(FftPlan&& other) noexcept
    : n_(other.n_), plan_(other.plan_), buf_in_(other.buf_in_), buf_out_(other.buf_out_) {
    other.plan_ = nullptr;
    other.buf_in_ = nullptr;
    other.buf_out_ = nullptr;
    other.n_ = 0;
}

void FftPlan::execute(const cplx* in, cplx* out) {
    // std::complex<double> is layout-compatible with fftw_complex.
    std::memcpy(buf_in_, in, sizeof(cplx) * n_);
    fftw_execute(static_cast<fftw_plan>(plan_));
    std::memcpy(out, buf_out_, sizeof(cplx) * n_);
}

} // namespace mdgait
