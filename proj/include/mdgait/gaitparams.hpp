#pragma once

#include <cstdint>
#include <vector>

#include "mdgait/tfa.hpp"

namespace mdgait {

struct EnvelopeParams {
    // Cells count toward the envelope when they exceed both the estimated
    // global noise mean by margin_db and the frame maximum minus
    // dynamic_range_db (the latter keeps window sidelobes out on clean data).
    double margin_db = 12.0;
    double dynamic_range_db = 30.0;
    std::size_t median_frames = 11;

    void validate() const;
};

struct Envelope {
    std::vector<double> values_hz; // signed, per frame; median-filtered
    std::vector<std::uint8_t> empty_frames; // 1 where nothing super-threshold
    double frame_rate = 0.0; // frames per second
    bool any_empty = false;
};

struct StepPeak {
    std::size_t frame = 0;
    double envelope_hz = 0.0; // signed envelope value at the peak
};

struct GaitStats {
    double f_step = 0.0; // steps per second
    double f_max = 0.0; // mean envelope at step peaks, signed
    double f_torso = 0.0; // median torso-ridge centroid, signed
    std::vector<StepPeak> step_peaks; // sorted by frame
    bool envelope_gaps = false;
};

// Per-frame extreme Doppler on the walking-direction side of the denoised
// spectrogram.
Envelope envelope(const Spectrogram& spec, Direction dir, const EnvelopeParams& params = {});

// Dominant envelope periodicity in [0.5, 4] Hz via a zero-padded magnitude
// spectrum with DC removed. Needs at least 2 s of envelope.
double estimate_step_rate(const Envelope& env);

// Local envelope maxima with minimum separation 0.6 / f_step seconds,
// strongest kept first. Fewer than four peaks is an error.
std::vector<StepPeak> detect_step_peaks(const Envelope& env, double f_step);

// Mean envelope value over the detected step peaks (at least two).
double estimate_max_doppler(const std::vector<StepPeak>& peaks);

// Median over frames of the power-weighted centroid of the dominant ridge in
// the low-Doppler region |f| <= 0.5 * max |envelope|.
double estimate_torso_doppler(const Spectrogram& spec, const Envelope& env, Direction dir);

GaitStats analyze_gait(const Spectrogram& denoised, Direction dir,
                       const EnvelopeParams& params = {});

} // namespace mdgait
