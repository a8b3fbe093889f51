#pragma once

#include <array>
#include <string>
#include <vector>

#include "mdgait/stepext.hpp"

namespace mdgait {

struct SsimParams {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 1.0;
    // Stabilizers for dynamic range 1: C1 = (0.01)^2, C2 = (0.03)^2, C3 = C2/2.
    double c1 = 1e-4;
    double c2 = 9e-4;
    double c3 = 4.5e-4;
    std::size_t window = 11;
    double sigma = 1.5;

    void validate() const;
};

// The eight-entry feature vector comparing the two per-leg step signatures,
// ordered r, r_H, r_M, r_L, MSE, MAE, MSSIM, delta_fmax.
struct FeatureVector {
    double r = 0.0;
    double r_h = 0.0;
    double r_m = 0.0;
    double r_l = 0.0;
    double mse_value = 0.0;
    double mae_value = 0.0;
    double mssim_value = 0.0;
    double delta_fmax_value = 0.0;
    std::vector<std::string> flags;

    static const std::array<std::string, 8>& names();
    std::array<double, 8> values() const;
};

// Pearson correlation over all pixels; 0 with *degenerate set when either
// image has zero variance.
double correlation(const Matrix& a, const Matrix& b, bool* degenerate = nullptr);

// Correlation restricted to rows [row_begin, row_end).
double correlation_rows(const Matrix& a, const Matrix& b, std::size_t row_begin,
                        std::size_t row_end, bool* degenerate = nullptr);

double mse(const Matrix& a, const Matrix& b);
double mae(const Matrix& a, const Matrix& b);

// Mean structural similarity over all fully interior window positions.
double mssim(const Matrix& a, const Matrix& b, const SsimParams& params = {});

// Mean absolute Doppler difference between consecutive step peaks.
double delta_fmax(const std::vector<StepPeak>& peaks);

FeatureVector feature_vector(const StepPair& pair, const GaitStats& stats,
                             const SsimParams& ssim = {});

// One labelled measurement in a feature table.
struct FeatureRow {
    std::string subject;
    Direction direction = Direction::toward;
    int label = 0; // 1 = asymmetric
    std::array<double, 8> features{};
    std::string flags; // semicolon-joined; "error:..." marks a failed pipeline
};

using FeatureTable = std::vector<FeatureRow>;

} // namespace mdgait
