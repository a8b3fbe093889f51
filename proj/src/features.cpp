#include "mdgait/features.hpp"

#include <algorithm>
#include <cmath>

#include "mdgait/errors.hpp"

namespace mdgait {

void SsimParams::validate() const {
    if (!(c1 > 0 && c2 > 0 && c3 > 0)) throw ValidationError("ssim: constants must be > 0");
    if (window < 2 || window % 2 == 0) throw ValidationError("ssim: window must be odd and > 1");
    if (!(sigma > 0)) throw ValidationError("ssim: sigma must be > 0");
    if (!std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(gamma))
        throw ValidationError("ssim: exponents must be finite");
}

const std::array<std::string, 8>& FeatureVector::names() {
    static const std::array<std::string, 8> n = {"r",   "r_H", "r_M",   "r_L",
                                                 "MSE", "MAE", "MSSIM", "delta_fmax"};
    return n;
}

std::array<double, 8> FeatureVector::values() const {
    return {r, r_h, r_m, r_l, mse_value, mae_value, mssim_value, delta_fmax_value};
}

double correlation_rows(const Matrix& a, const Matrix& b, std::size_t row_begin,
                        std::size_t row_end, bool* degenerate) {
    if (!a.same_shape(b)) throw ValidationError("correlation: image sizes differ");
    if (row_end > a.rows() || row_begin >= row_end)
        throw ValidationError("correlation: bad row range");
    if (degenerate) *degenerate = false;

    const double n = static_cast<double>((row_end - row_begin) * a.cols());
    double ma = 0.0, mb = 0.0;
    double a_lo = a(row_begin, 0), a_hi = a_lo, b_lo = b(row_begin, 0), b_hi = b_lo;
    for (std::size_t r = row_begin; r < row_end; ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            ma += a(r, c);
            mb += b(r, c);
            a_lo = std::min(a_lo, a(r, c));
            a_hi = std::max(a_hi, a(r, c));
            b_lo = std::min(b_lo, b(r, c));
            b_hi = std::max(b_hi, b(r, c));
        }
    ma /= n;
    mb /= n;

    // A constant image has zero variance by definition; testing it directly
    // avoids the rounding residue the centered sums can pick up from an
    // inexact mean.
    if (a_lo == a_hi || b_lo == b_hi) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }

    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t r = row_begin; r < row_end; ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            const double da = a(r, c) - ma;
            const double db = b(r, c) - mb;
            cov += da * db;
            va += da * da;
            vb += db * db;
        }
    if (va <= 0 || vb <= 0) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    return std::clamp(cov / (std::sqrt(va) * std::sqrt(vb)), -1.0, 1.0);
}

double correlation(const Matrix& a, const Matrix& b, bool* degenerate) {
    return correlation_rows(a, b, 0, a.rows(), degenerate);
}

double mse(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ValidationError("mse: image sizes differ");
    if (a.empty()) throw ValidationError("mse: empty images");
    double sum = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            const double d = a(r, c) - b(r, c);
            sum += d * d;
        }
    return sum / static_cast<double>(a.size());
}

double mae(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw ValidationError("mae: image sizes differ");
    if (a.empty()) throw ValidationError("mae: empty images");
    double sum = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) sum += std::abs(a(r, c) - b(r, c));
    return sum / static_cast<double>(a.size());
}

double mssim(const Matrix& a, const Matrix& b, const SsimParams& params) {
    params.validate();
    if (!a.same_shape(b)) throw ValidationError("mssim: image sizes differ");
    const std::size_t w = params.window;
    if (a.rows() < w || a.cols() < w) throw DataError("mssim: image smaller than the window");

    // Normalized Gaussian weights.
    Matrix kernel(w, w);
    const double half = static_cast<double>(w - 1) / 2.0;
    double ksum = 0.0;
    for (std::size_t r = 0; r < w; ++r)
        for (std::size_t c = 0; c < w; ++c) {
            const double dr = static_cast<double>(r) - half;
            const double dc = static_cast<double>(c) - half;
            kernel(r, c) = std::exp(-(dr * dr + dc * dc) / (2.0 * params.sigma * params.sigma));
            ksum += kernel(r, c);
        }
    for (std::size_t r = 0; r < w; ++r)
        for (std::size_t c = 0; c < w; ++c) kernel(r, c) /= ksum;

    auto term = [](double value, double exponent) {
        return exponent == 1.0 ? value : std::pow(value, exponent);
    };

    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t r0 = 0; r0 + w <= a.rows(); ++r0)
        for (std::size_t c0 = 0; c0 + w <= a.cols(); ++c0) {
            double mu_a = 0.0, mu_b = 0.0, aa = 0.0, bb = 0.0, ab = 0.0;
            for (std::size_t r = 0; r < w; ++r)
                for (std::size_t c = 0; c < w; ++c) {
                    const double k = kernel(r, c);
                    const double va = a(r0 + r, c0 + c);
                    const double vb = b(r0 + r, c0 + c);
                    mu_a += k * va;
                    mu_b += k * vb;
                    aa += k * va * va;
                    bb += k * vb * vb;
                    ab += k * va * vb;
                }
            const double var_a = std::max(0.0, aa - mu_a * mu_a);
            const double var_b = std::max(0.0, bb - mu_b * mu_b);
            const double cov = ab - mu_a * mu_b;
            const double sd_a = std::sqrt(var_a);
            const double sd_b = std::sqrt(var_b);

            const double l = (2.0 * mu_a * mu_b + params.c1) /
                             (mu_a * mu_a + mu_b * mu_b + params.c1);
            const double c = (2.0 * sd_a * sd_b + params.c2) / (var_a + var_b + params.c2);
            const double s = (cov + params.c3) / (sd_a * sd_b + params.c3);
            total += term(l, params.alpha) * term(c, params.beta) * term(s, params.gamma);
            ++count;
        }
    return total / static_cast<double>(count);
}

double delta_fmax(const std::vector<StepPeak>& peaks) {
    if (peaks.size() < 2) throw DataError("delta_fmax: fewer than 2 step peaks");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < peaks.size(); ++i)
        sum += std::abs(peaks[i + 1].envelope_hz - peaks[i].envelope_hz);
    return sum / static_cast<double>(peaks.size() - 1);
}

FeatureVector feature_vector(const StepPair& pair, const GaitStats& stats,
                             const SsimParams& ssim) {
    FeatureVector fv;
    fv.flags = pair.flags;

    const std::size_t n_y = pair.a.rows();
    bool degenerate = false;
    fv.r = correlation(pair.a, pair.b, &degenerate);
    if (degenerate) fv.flags.push_back("degenerate_r");

    if (n_y >= 3) {
        const std::size_t b1 = n_y / 3;
        const std::size_t b2 = 2 * n_y / 3;
        fv.r_l = correlation_rows(pair.a, pair.b, 0, b1, &degenerate);
        if (degenerate) fv.flags.push_back("degenerate_r_L");
        fv.r_m = correlation_rows(pair.a, pair.b, b1, b2, &degenerate);
        if (degenerate) fv.flags.push_back("degenerate_r_M");
        fv.r_h = correlation_rows(pair.a, pair.b, b2, n_y, &degenerate);
        if (degenerate) fv.flags.push_back("degenerate_r_H");
    } else {
        fv.flags.push_back("bands_undefined");
    }

    fv.mse_value = mse(pair.a, pair.b);
    fv.mae_value = mae(pair.a, pair.b);
    try {
        fv.mssim_value = mssim(pair.a, pair.b, ssim);
    } catch (const DataError&) {
        fv.flags.push_back("mssim_undefined");
    }
    fv.delta_fmax_value = delta_fmax(stats.step_peaks);
    return fv;
}

} // namespace mdgait
