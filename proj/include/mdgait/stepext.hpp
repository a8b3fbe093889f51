#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mdgait/gaitparams.hpp"

namespace mdgait {

// Four-step analysis window cut from the denoised spectrogram and converted
// to gray. Rows run over |Doppler| ascending (row 0 nearest the torso band)
// regardless of walking direction; columns are time frames.
struct StepWindow {
    Matrix gray; // M_y x M_x
    std::size_t start_frame = 0; // spectrogram frame of column 0
    double band_lo_hz = 0.0; // |Doppler| band covered by the rows
    double band_hi_hz = 0.0;
    std::array<std::size_t, 4> peak_cols{}; // selected step peaks, window-relative
    double frame_rate = 0.0;

    std::size_t width() const { return gray.cols(); }
    std::size_t height() const { return gray.rows(); }
};

// Averaged per-leg step signatures. Which physical leg is which is unknown;
// the two are just labelled A and B.
struct StepPair {
    Matrix a; // N_y x N_x
    Matrix b;
    std::array<std::size_t, 4> step_cols{}; // step centers in window columns
    double gamma_a = 0.0; // registration score at A's final positions
    double gamma_b = 0.0;
    std::vector<std::string> flags;
};

// Width of one step signature in frames: round((2/3) * f_s / (f_step * hop)).
std::size_t step_signature_width(double sample_rate, double f_step, std::size_t hop);

// Picks the run of four consecutive step peaks with the largest mean squared
// envelope, spans it half a step beyond the outer peaks, and crops rows to
// the band [1.5 |f_torso|, |f_max|] on the walking-direction side.
StepWindow select_four_step_window(const Spectrogram& denoised, const GaitStats& stats,
                                   Direction dir, double db_floor = -50.0,
                                   double db_ceil = 0.0);

// Cuts one n_x-wide patch centered on each step and averages steps 1,3 into A
// and 2,4 into B. Out-of-window columns are zero-padded and flagged.
StepPair extract_and_average(const StepWindow& window,
                             const std::array<std::size_t, 4>& step_cols, std::size_t n_x);

// Normalized 2D cross-correlation of the template against the window at every
// x-shift u (no y-shift). Zero-variance spots yield 0 and are marked in
// `degenerate` when provided.
std::vector<double> ncc_profile(const Matrix& window, const Matrix& templ,
                                std::vector<std::uint8_t>* degenerate = nullptr);

// One registration pass: correlate each leg's average against the window,
// move each step to the correlation maximum within 0.25 / f_step seconds of
// its initial spot, then re-extract and re-average.
StepPair refine_step_pair(const StepWindow& window, const StepPair& initial, double f_step);

} // namespace mdgait
