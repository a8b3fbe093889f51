#pragma once

#include <cstddef>
#include <vector>

#include "mdgait/matrix.hpp"
#include "mdgait/sim.hpp"

namespace mdgait {

struct StftParams {
    std::size_t window_length = 255;
    std::size_t fft_size = 2048;
    std::size_t hop = 1;
    // Optional custom analysis window; empty selects a Hamming window of
    // window_length. Must be strictly positive and symmetric when given.
    std::vector<double> window;

    void validate() const;
};

struct Spectrogram {
    Matrix power; // frames x fft_size, linear power
    std::vector<double> frame_times; // s, window centers
    std::vector<double> freq_axis; // Hz, ascending, [-f_s/2, f_s/2)
    StftParams params;
    double sample_rate = 0.0;
    bool denoised = false;
    double denoise_margin_db = 0.0;
    std::vector<double> noise_floor; // per-bin floor (set by denoise)

    std::size_t frames() const { return power.rows(); }
    std::size_t bins() const { return power.cols(); }
    double bin_width() const { return sample_rate / static_cast<double>(params.fft_size); }
    double frame_rate() const { return sample_rate / static_cast<double>(params.hop); }
    // Column index of the bin whose center is nearest to f (clamped).
    std::size_t bin_of(double freq_hz) const;
};

// Squared-magnitude STFT with zero-padding from window_length to fft_size and
// centered frequency axis (negative Doppler at low column indices).
Spectrogram stft_spectrogram(const IqSignal& signal, const StftParams& params);

// Adaptive per-bin noise suppression. Each frequency bin's floor is the 20th
// percentile of its power over time; scaled by 1/(-ln 0.8) this percentile
// estimates the bin's noise mean, and cells below mean * 10^(margin_db/10)
// are clamped to the floor. Idempotent; an all-equal matrix passes through
// unchanged.
Spectrogram denoise(const Spectrogram& spec, double margin_db);

// dB relative to the matrix maximum; zero power maps to -infinity.
Matrix to_db(const Spectrogram& spec);

// Linear power to gray levels in [0, 1]: 0 dB = region maximum, db_floor and
// below = 0.
Matrix to_gray(const Matrix& power_region, double db_floor = -50.0, double db_ceil = 0.0);

} // namespace mdgait
