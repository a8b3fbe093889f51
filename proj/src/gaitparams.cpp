#include "mdgait/gaitparams.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mdgait/errors.hpp"
#include "mdgait/signal.hpp"

namespace mdgait {

namespace {
constexpr double kExpP20 = 0.22314355131420976; // -ln(0.8)
constexpr double kStepBandLow = 0.5; // Hz
constexpr double kStepBandHigh = 4.0; // Hz
} // namespace

void EnvelopeParams::validate() const {
    if (!(margin_db >= 0)) throw ValidationError("envelope: margin_db must be >= 0");
    if (!(dynamic_range_db > 0))
        throw ValidationError("envelope: dynamic_range_db must be > 0");
    if (median_frames % 2 == 0 || median_frames == 0)
        throw ValidationError("envelope: median_frames must be odd");
}

Envelope envelope(const Spectrogram& spec, Direction dir, const EnvelopeParams& params) {
    params.validate();
    if (!spec.denoised)
        throw ValidationError("envelope: expects a denoised spectrogram");
    const std::size_t frames = spec.frames();
    const std::size_t bins = spec.bins();
    if (frames == 0 || bins == 0) throw ValidationError("envelope: empty spectrogram");

    // Global noise mean: median over bins of the per-bin 20th-percentile
    // power, rescaled by the exponential-noise percentile factor.
    std::vector<double> column(frames), bin_floors(bins);
    for (std::size_t k = 0; k < bins; ++k) {
        for (std::size_t f = 0; f < frames; ++f) column[f] = spec.power(f, k);
        bin_floors[k] = percentile(column, 0.2) / kExpP20;
    }
    const double noise_mean = percentile(bin_floors, 0.5);
    const double noise_threshold = noise_mean * std::pow(10.0, params.margin_db / 10.0);
    const double dyn = std::pow(10.0, -params.dynamic_range_db / 10.0);

    Envelope env;
    env.frame_rate = spec.frame_rate();
    env.values_hz.assign(frames, 0.0);
    env.empty_frames.assign(frames, 0);

    for (std::size_t f = 0; f < frames; ++f) {
        double frame_max = 0.0;
        for (std::size_t k = 0; k < bins; ++k) frame_max = std::max(frame_max, spec.power(f, k));
        const double threshold = std::max(noise_threshold, frame_max * dyn);

        double value = 0.0;
        bool found = false;
        if (dir == Direction::toward) {
            for (std::size_t k = bins; k-- > 0 && spec.freq_axis[k] > 0.0;) {
                if (spec.power(f, k) > threshold) {
                    value = spec.freq_axis[k];
                    found = true;
                    break;
                }
            }
        } else {
            for (std::size_t k = 0; k < bins && spec.freq_axis[k] < 0.0; ++k) {
                if (spec.power(f, k) > threshold) {
                    value = spec.freq_axis[k];
                    found = true;
                    break;
                }
            }
        }
        env.values_hz[f] = value;
        if (!found) {
            env.empty_frames[f] = 1;
            env.any_empty = true;
        }
    }
    env.values_hz = median_filter(env.values_hz, params.median_frames);
    return env;
}

double estimate_step_rate(const Envelope& env) {
    if (!(env.frame_rate > 0)) throw ValidationError("step rate: envelope has no frame rate");
    const std::size_t n = env.values_hz.size();
    if (static_cast<double>(n) / env.frame_rate < 2.0)
        throw DataError("step rate: need at least 2 s of envelope");

    double mean = std::accumulate(env.values_hz.begin(), env.values_hz.end(), 0.0) /
                  static_cast<double>(n);

    std::size_t nfft = 1;
    while (nfft < 8 * n) nfft <<= 1;
    std::vector<cplx> buf(nfft, cplx(0.0, 0.0)), out(nfft);
    for (std::size_t i = 0; i < n; ++i) buf[i] = cplx(env.values_hz[i] - mean, 0.0);
    FftPlan plan(nfft);
    plan.execute(buf.data(), out.data());

    const double resolution = env.frame_rate / static_cast<double>(nfft);
    auto lo = static_cast<std::size_t>(std::ceil(kStepBandLow / resolution));
    auto hi = static_cast<std::size_t>(std::floor(kStepBandHigh / resolution));
    hi = std::min(hi, nfft / 2);
    if (lo == 0) lo = 1;
    if (lo > hi) throw DataError("step rate: no gait periodicity (band empty)");

    double best = 0.0;
    std::size_t best_idx = 0;
    for (std::size_t i = lo; i <= hi; ++i) {
        double mag = std::abs(out[i]);
        if (mag > best) {
            best = mag;
            best_idx = i;
        }
    }
    if (best <= 0.0) throw DataError("step rate: no gait periodicity");
    return static_cast<double>(best_idx) * resolution;
}

std::vector<StepPeak> detect_step_peaks(const Envelope& env, double f_step) {
    if (!(f_step > 0)) throw ValidationError("step peaks: f_step must be > 0");
    const std::size_t n = env.values_hz.size();
    std::vector<double> mag(n);
    for (std::size_t i = 0; i < n; ++i) mag[i] = std::abs(env.values_hz[i]);

    // The envelope is quantized to the frequency grid, so maxima come as flat
    // runs; anchor each peak at the middle of its run to avoid a sideways bias.
    std::vector<std::size_t> candidates;
    for (std::size_t i = 1; i + 1 < n;) {
        if (!(mag[i] > mag[i - 1])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && mag[j + 1] == mag[i]) ++j;
        if (j + 1 >= n || mag[j + 1] < mag[i]) candidates.push_back((i + j) / 2);
        i = j + 1;
    }

    auto separation =
        static_cast<std::size_t>(std::lround(0.6 / f_step * env.frame_rate));
    if (separation == 0) separation = 1;

    // Strongest-first greedy selection under the separation constraint.
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
        if (mag[a] != mag[b]) return mag[a] > mag[b];
        return a < b;
    });
    std::vector<std::size_t> accepted;
    for (std::size_t c : candidates) {
        bool ok = true;
        for (std::size_t a : accepted) {
            std::size_t gap = c > a ? c - a : a - c;
            if (gap < separation) {
                ok = false;
                break;
            }
        }
        if (ok) accepted.push_back(c);
    }
    std::sort(accepted.begin(), accepted.end());

    if (accepted.size() < 4) throw DataError("step peaks: insufficient steps");
    std::vector<StepPeak> peaks;
    peaks.reserve(accepted.size());
    for (std::size_t idx : accepted) peaks.push_back({idx, env.values_hz[idx]});
    return peaks;
}

double estimate_max_doppler(const std::vector<StepPeak>& peaks) {
    if (peaks.size() < 2) throw DataError("max Doppler: fewer than 2 step peaks");
    double sum = 0.0;
    for (const auto& p : peaks) sum += p.envelope_hz;
    return sum / static_cast<double>(peaks.size());
}

double estimate_torso_doppler(const Spectrogram& spec, const Envelope& env, Direction dir) {
    if (spec.frames() != env.values_hz.size())
        throw ValidationError("torso Doppler: envelope does not match the spectrogram");
    double emax = 0.0;
    for (double e : env.values_hz) emax = std::max(emax, std::abs(e));
    if (!(emax > 0)) throw DataError("torso Doppler: empty envelope");
    const double limit = 0.5 * emax;

    // Centroid half-width: four frequency-resolution widths of the window.
    const auto half_width = static_cast<std::size_t>(
        std::ceil(4.0 * static_cast<double>(spec.params.fft_size) /
                  static_cast<double>(spec.params.window_length)));

    const std::size_t bins = spec.bins();
    std::size_t side_lo = bins, side_hi = 0; // inclusive range of usable bins
    for (std::size_t k = 0; k < bins; ++k) {
        double f = spec.freq_axis[k];
        bool usable = dir == Direction::toward ? (f > 0 && f <= limit) : (f < 0 && -f <= limit);
        if (usable) {
            side_lo = std::min(side_lo, k);
            side_hi = std::max(side_hi, k);
        }
    }
    if (side_lo > side_hi) throw DataError("torso Doppler: empty search region");

    std::vector<double> centroids;
    centroids.reserve(spec.frames());
    for (std::size_t f = 0; f < spec.frames(); ++f) {
        std::size_t peak = side_lo;
        double peak_power = -1.0;
        for (std::size_t k = side_lo; k <= side_hi; ++k)
            if (spec.power(f, k) > peak_power) {
                peak_power = spec.power(f, k);
                peak = k;
            }
        if (peak_power <= 0) continue;
        std::size_t lo = peak > half_width ? peak - half_width : 0;
        std::size_t hi = std::min(peak + half_width, bins - 1);
        lo = std::max(lo, side_lo);
        hi = std::min(hi, side_hi);
        double wsum = 0.0, fsum = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) {
            wsum += spec.power(f, k);
            fsum += spec.power(f, k) * spec.freq_axis[k];
        }
        if (wsum > 0) centroids.push_back(fsum / wsum);
    }
    if (centroids.empty()) throw DataError("torso Doppler: no usable frames");
    return percentile(centroids, 0.5);
}

GaitStats analyze_gait(const Spectrogram& denoised, Direction dir,
                       const EnvelopeParams& params) {
    GaitStats stats;
    Envelope env = envelope(denoised, dir, params);
    stats.envelope_gaps = env.any_empty;
    stats.f_step = estimate_step_rate(env);
    stats.step_peaks = detect_step_peaks(env, stats.f_step);
    stats.f_max = estimate_max_doppler(stats.step_peaks);
    stats.f_torso = estimate_torso_doppler(denoised, env, dir);
    if (!(std::abs(stats.f_torso) < std::abs(stats.f_max)))
        throw DataError("gait stats: torso Doppler not below the maximal Doppler");
    return stats;
}

} // namespace mdgait
