#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mdgait/config.hpp"
#include "mdgait/io.hpp"

namespace mdgait {

// Everything the per-measurement chain produces, kept for export.
struct AnalysisResult {
    Spectrogram denoised;
    GaitStats stats;
    StepWindow window;
    StepPair pair; // after registration refinement
    FeatureVector features;
    std::size_t n_x = 0; // step signature width in frames
};

// Full chain: STFT -> denoise -> gait statistics -> four-step window ->
// extract + register per-leg signatures -> feature vector.
AnalysisResult analyze_measurement(const Measurement& m, const PipelineConfig& config);

// As above, folded into a table row. A DataError anywhere in the chain yields
// a row with zeroed features and an "error:..." flag instead of propagating.
FeatureRow feature_row(const Measurement& m, const PipelineConfig& config);

std::string join_flags(const std::vector<std::string>& flags);

// Gray spectrogram image: frequency descending over rows (positive Doppler on
// top), time over columns.
Matrix spectrogram_image(const Spectrogram& spec, double db_floor, double db_ceil);

// Walking direction from the Doppler sign: toward when the positive-frequency
// half of the signal spectrum carries more power.
Direction infer_direction(const IqSignal& signal);

// Feature rows for a whole dataset manifest, processed with `jobs` worker
// threads (0 = hardware concurrency). Row order matches the manifest.
// Measurements whose header metadata contradicts the manifest are errors.
FeatureTable compute_features(const std::filesystem::path& manifest_path,
                              const PipelineConfig& config, unsigned jobs = 1);

} // namespace mdgait
