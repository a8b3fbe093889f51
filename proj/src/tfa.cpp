#include "mdgait/tfa.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdgait/errors.hpp"
#include "mdgait/signal.hpp"

namespace mdgait {

namespace {
// 20th percentile of a unit-mean exponential distribution, -ln(0.8).
constexpr double kExpP20 = 0.22314355131420976;
} // namespace

void StftParams::validate() const {
    if (window_length < 2) throw ValidationError("stft: window_length must be >= 2");
    if (fft_size < window_length)
        throw ValidationError("stft: fft_size must be >= window_length");
    if (fft_size % 2 != 0) throw ValidationError("stft: fft_size must be even");
    if (hop < 1) throw ValidationError("stft: hop must be >= 1");
    if (!window.empty()) {
        if (window.size() != window_length)
            throw ValidationError("stft: custom window length mismatch");
        for (std::size_t i = 0; i < window.size(); ++i) {
            if (!(window[i] > 0)) throw ValidationError("stft: window must be strictly positive");
            if (std::abs(window[i] - window[window.size() - 1 - i]) > 1e-12)
                throw ValidationError("stft: window must be symmetric");
        }
    }
}

std::size_t Spectrogram::bin_of(double freq_hz) const {
    auto k = static_cast<long long>(std::llround(freq_hz / bin_width())) +
             static_cast<long long>(params.fft_size / 2);
    k = std::clamp<long long>(k, 0, static_cast<long long>(params.fft_size) - 1);
    return static_cast<std::size_t>(k);
}

Spectrogram stft_spectrogram(const IqSignal& signal, const StftParams& params) {
    params.validate();
    if (!(signal.sample_rate > 0)) throw ValidationError("stft: signal needs a sample rate");
    const std::size_t n = signal.samples.size();
    const std::size_t len = params.window_length;
    const std::size_t k = params.fft_size;
    if (n < len) throw DataError("stft: signal shorter than the analysis window");

    std::vector<double> window = params.window.empty() ? hamming_window(len) : params.window;

    const std::size_t frames = (n - len) / params.hop + 1;
    Spectrogram spec;
    spec.params = params;
    spec.sample_rate = signal.sample_rate;
    spec.power = Matrix(frames, k);
    spec.frame_times.resize(frames);
    spec.freq_axis.resize(k);
    for (std::size_t j = 0; j < k; ++j)
        spec.freq_axis[j] = (static_cast<double>(j) - static_cast<double>(k) / 2.0) *
                            signal.sample_rate / static_cast<double>(k);

    FftPlan plan(k);
    std::vector<cplx> buf(k), out(k);
    const std::size_t half = k / 2;
    for (std::size_t f = 0; f < frames; ++f) {
        const std::size_t start = f * params.hop;
        spec.frame_times[f] =
            (static_cast<double>(start) + static_cast<double>(len - 1) / 2.0) /
            signal.sample_rate;
        for (std::size_t m = 0; m < len; ++m) buf[m] = window[m] * signal.samples[start + m];
        std::fill(buf.begin() + static_cast<std::ptrdiff_t>(len), buf.end(), cplx(0.0, 0.0));
        plan.execute(buf.data(), out.data());
        // Center the axis: column j holds raw bin (j + K/2) mod K.
        for (std::size_t j = 0; j < k; ++j)
            spec.power(f, j) = std::norm(out[(j + half) % k]);
    }
    return spec;
}

Spectrogram denoise(const Spectrogram& spec, double margin_db) {
    if (!(margin_db >= 0)) throw ValidationError("denoise: margin_db must be >= 0");
    if (spec.power.empty()) throw ValidationError("denoise: empty spectrogram");

    Spectrogram out = spec;
    out.denoised = true;
    out.denoise_margin_db = margin_db;
    out.noise_floor.resize(spec.bins());

    const double margin = std::pow(10.0, margin_db / 10.0);
    const std::size_t frames = spec.frames();
    std::vector<double> column(frames);
    for (std::size_t k = 0; k < spec.bins(); ++k) {
        for (std::size_t f = 0; f < frames; ++f) column[f] = spec.power(f, k);
        const double floor = percentile(column, 0.2);
        const double threshold = floor / kExpP20 * margin;
        out.noise_floor[k] = floor;
        for (std::size_t f = 0; f < frames; ++f)
            if (spec.power(f, k) < threshold) out.power(f, k) = floor;
    }
    return out;
}

Matrix to_db(const Spectrogram& spec) {
    if (spec.power.empty()) throw ValidationError("to_db: empty spectrogram");
    const double peak = spec.power.max_value();
    Matrix db(spec.power.rows(), spec.power.cols());
    for (std::size_t r = 0; r < db.rows(); ++r)
        for (std::size_t c = 0; c < db.cols(); ++c) {
            double p = spec.power(r, c);
            db(r, c) = p > 0 && peak > 0 ? 10.0 * std::log10(p / peak)
                                         : -std::numeric_limits<double>::infinity();
        }
    return db;
}

Matrix to_gray(const Matrix& power_region, double db_floor, double db_ceil) {
    if (power_region.empty()) throw ValidationError("to_gray: empty region");
    if (!(db_floor < db_ceil)) throw ValidationError("to_gray: db_floor must be below db_ceil");
    const double peak = power_region.max_value();
    Matrix gray(power_region.rows(), power_region.cols());
    if (peak <= 0) return gray;
    const double span = db_ceil - db_floor;
    for (std::size_t r = 0; r < gray.rows(); ++r)
        for (std::size_t c = 0; c < gray.cols(); ++c) {
            double p = power_region(r, c);
            if (p <= 0) continue;
            double db = 10.0 * std::log10(p / peak);
            gray(r, c) = std::clamp((db - db_floor) / span, 0.0, 1.0);
        }
    return gray;
}

} // namespace mdgait
