#include "mdgait/stepext.hpp"

#include <algorithm>
#include <cmath>

#include "mdgait/errors.hpp"

namespace mdgait {

std::size_t step_signature_width(double sample_rate, double f_step, std::size_t hop) {
    if (!(f_step > 0) || !(sample_rate > 0) || hop == 0)
        throw ValidationError("step width: invalid parameters");
    auto w = static_cast<std::size_t>(
        std::llround(2.0 / 3.0 * sample_rate / (f_step * static_cast<double>(hop))));
    if (w < 2) throw DataError("step width: step rate too high for this hop");
    return w;
}

StepWindow select_four_step_window(const Spectrogram& denoised, const GaitStats& stats,
                                   Direction dir, double db_floor, double db_ceil) {
    const auto& peaks = stats.step_peaks;
    if (peaks.size() < 4) throw DataError("step window: fewer than 4 step peaks");

    const double band_lo = 1.5 * std::abs(stats.f_torso);
    const double band_hi = std::abs(stats.f_max);
    if (!(band_lo < band_hi))
        throw DataError("step window: torso band reaches the maximal Doppler");

    // Contiguous bin range on the walking-direction side covering the band.
    const std::size_t bins = denoised.bins();
    std::size_t k_lo = bins, k_hi = 0;
    for (std::size_t k = 0; k < bins; ++k) {
        const double f = denoised.freq_axis[k];
        const double mag = std::abs(f);
        const bool side = dir == Direction::toward ? f > 0 : f < 0;
        if (side && mag >= band_lo && mag <= band_hi) {
            k_lo = std::min(k_lo, k);
            k_hi = std::max(k_hi, k);
        }
    }
    if (k_lo > k_hi) throw DataError("step window: Doppler band contains no bins");

    const double frames_per_step = denoised.frame_rate() / stats.f_step;
    const auto half = static_cast<std::size_t>(std::llround(frames_per_step / 2.0));

    // Best 4-peak run by mean squared envelope at the peaks. Runs whose
    // half-step margins fit inside the recording are preferred: a run against
    // either edge forces a clamped window and zero-padded extraction.
    std::size_t best_run = 0;
    double best_score = -1.0;
    bool best_fits = false;
    for (std::size_t i = 0; i + 3 < peaks.size(); ++i) {
        double score = 0.0;
        for (std::size_t j = 0; j < 4; ++j)
            score += peaks[i + j].envelope_hz * peaks[i + j].envelope_hz;
        const bool fits = peaks[i].frame >= half &&
                          peaks[i + 3].frame + half <= denoised.frames() - 1;
        if ((fits && !best_fits) || (fits == best_fits && score > best_score)) {
            best_score = score;
            best_run = i;
            best_fits = fits;
        }
    }
    const std::size_t first = peaks[best_run].frame;
    const std::size_t last = peaks[best_run + 3].frame;
    const std::size_t span_start = first > half ? first - half : 0;
    const std::size_t span_end = std::min(last + half, denoised.frames() - 1); // inclusive
    const std::size_t m_x = span_end - span_start + 1;

    Matrix region(k_hi - k_lo + 1, m_x);
    for (std::size_t r = 0; r < region.rows(); ++r) {
        // Row 0 always holds the lowest |Doppler|: on the away side that is
        // the least negative bin, so the row order flips.
        const std::size_t k = dir == Direction::toward ? k_lo + r : k_hi - r;
        for (std::size_t c = 0; c < m_x; ++c) region(r, c) = denoised.power(span_start + c, k);
    }

    StepWindow win;
    win.gray = to_gray(region, db_floor, db_ceil);
    win.start_frame = span_start;
    win.band_lo_hz = band_lo;
    win.band_hi_hz = band_hi;
    win.frame_rate = denoised.frame_rate();
    for (std::size_t j = 0; j < 4; ++j)
        win.peak_cols[j] = peaks[best_run + j].frame - span_start;
    return win;
}

StepPair extract_and_average(const StepWindow& window,
                             const std::array<std::size_t, 4>& step_cols, std::size_t n_x) {
    const std::size_t m_x = window.width();
    const std::size_t n_y = window.height();
    if (n_x == 0) throw ValidationError("extract: step width must be positive");
    if (n_x > m_x) throw DataError("extract: step width exceeds the window");

    StepPair pair;
    pair.step_cols = step_cols;
    pair.a = Matrix(n_y, n_x);
    pair.b = Matrix(n_y, n_x);
    bool padded = false;

    for (std::size_t s = 0; s < 4; ++s) {
        Matrix& dest = s % 2 == 0 ? pair.a : pair.b;
        const auto start =
            static_cast<long long>(step_cols[s]) - static_cast<long long>(n_x / 2);
        for (std::size_t c = 0; c < n_x; ++c) {
            const long long col = start + static_cast<long long>(c);
            if (col < 0 || col >= static_cast<long long>(m_x)) {
                padded = true;
                continue; // zero contribution
            }
            for (std::size_t r = 0; r < n_y; ++r)
                dest(r, c) += 0.5 * window.gray(r, static_cast<std::size_t>(col));
        }
    }
    if (padded) pair.flags.push_back("step_padded");
    return pair;
}

std::vector<double> ncc_profile(const Matrix& window, const Matrix& templ,
                                std::vector<std::uint8_t>* degenerate) {
    if (templ.rows() != window.rows())
        throw ValidationError("ncc: template and window heights differ");
    if (templ.cols() > window.cols() || templ.empty())
        throw ValidationError("ncc: template must fit inside the window");

    const std::size_t n_y = window.rows();
    const std::size_t n_x = templ.cols();
    const std::size_t m_x = window.cols();
    const std::size_t shifts = m_x - n_x + 1;
    const double n_pix = static_cast<double>(n_x) * static_cast<double>(n_y);

    std::vector<double> profile(shifts, 0.0);
    if (degenerate) degenerate->assign(shifts, 0);

    // Zero-mean template and its energy.
    double t_mean = 0.0;
    for (std::size_t r = 0; r < n_y; ++r)
        for (std::size_t c = 0; c < n_x; ++c) t_mean += templ(r, c);
    t_mean /= n_pix;
    Matrix t0(n_y, n_x);
    double t_energy = 0.0;
    for (std::size_t r = 0; r < n_y; ++r)
        for (std::size_t c = 0; c < n_x; ++c) {
            t0(r, c) = templ(r, c) - t_mean;
            t_energy += t0(r, c) * t0(r, c);
        }
    if (t_energy <= 1e-30) {
        if (degenerate) degenerate->assign(shifts, 1);
        return profile;
    }

    // Column sums of the window for O(1) local means and energies per shift.
    std::vector<double> col_sum(m_x + 1, 0.0), col_sq(m_x + 1, 0.0);
    for (std::size_t c = 0; c < m_x; ++c) {
        double s = 0.0, q = 0.0;
        for (std::size_t r = 0; r < n_y; ++r) {
            const double v = window(r, c);
            s += v;
            q += v * v;
        }
        col_sum[c + 1] = col_sum[c] + s;
        col_sq[c + 1] = col_sq[c] + q;
    }

    for (std::size_t u = 0; u < shifts; ++u) {
        const double sum_f = col_sum[u + n_x] - col_sum[u];
        const double sum_f2 = col_sq[u + n_x] - col_sq[u];
        const double var_f = sum_f2 - sum_f * sum_f / n_pix;
        if (var_f <= 1e-30) {
            if (degenerate) (*degenerate)[u] = 1;
            continue;
        }
        // The local mean cancels against the zero-mean template, so the
        // numerator is a plain inner product.
        double num = 0.0;
        for (std::size_t r = 0; r < n_y; ++r)
            for (std::size_t c = 0; c < n_x; ++c) num += window(r, u + c) * t0(r, c);
        profile[u] = std::clamp(num / std::sqrt(var_f * t_energy), -1.0, 1.0);
    }
    return profile;
}

StepPair refine_step_pair(const StepWindow& window, const StepPair& initial, double f_step) {
    if (!(f_step > 0)) throw ValidationError("refine: f_step must be > 0");
    const std::size_t n_x = initial.a.cols();
    if (n_x == 0 || initial.a.rows() != window.height())
        throw ValidationError("refine: pair does not match the window");
    if (n_x > window.width()) throw DataError("refine: step width exceeds the window");
    const auto u_max = static_cast<long long>(window.width() - n_x);
    const auto radius =
        static_cast<long long>(std::llround(0.25 / f_step * window.frame_rate));

    StepPair refined;
    refined.flags = initial.flags;
    std::array<std::size_t, 4> new_cols = initial.step_cols;

    for (int leg = 0; leg < 2; ++leg) {
        const Matrix& templ = leg == 0 ? initial.a : initial.b;
        std::vector<std::uint8_t> degenerate;
        const std::vector<double> profile = ncc_profile(window.gray, templ, &degenerate);

        double score_sum = 0.0;
        int scored = 0;
        for (std::size_t s = static_cast<std::size_t>(leg); s < 4; s += 2) {
            const auto u_init = static_cast<long long>(initial.step_cols[s]) -
                                static_cast<long long>(n_x / 2);
            const long long lo = std::max(0LL, u_init - radius);
            const long long hi = std::min(u_max, u_init + radius);
            if (lo > hi) {
                refined.flags.push_back("refine_out_of_window");
                continue;
            }
            // Prefer the initial spot on ties so a flat profile moves nothing.
            long long best_u = u_init >= lo && u_init <= hi ? u_init : lo;
            double best = profile[static_cast<std::size_t>(best_u)];
            bool flat_degenerate = degenerate[static_cast<std::size_t>(best_u)] != 0;
            for (long long u = lo; u <= hi; ++u) {
                const double g = profile[static_cast<std::size_t>(u)];
                if (g > best) {
                    best = g;
                    best_u = u;
                    flat_degenerate = degenerate[static_cast<std::size_t>(u)] != 0;
                }
            }
            new_cols[s] = static_cast<std::size_t>(best_u) + n_x / 2;
            score_sum += best;
            ++scored;
            if (flat_degenerate) refined.flags.push_back("ncc_degenerate");
        }
        const double score = scored > 0 ? score_sum / scored : 0.0;
        (leg == 0 ? refined.gamma_a : refined.gamma_b) = score;
    }

    // Per-leg registration fixes each leg's internal alignment but leaves the
    // relative A-to-B gauge free; a common residual shift of a few frames
    // depresses every pairwise comparison. Snap B onto A with one small joint
    // shift before the pair is compared.
    const auto pearson = [](const Matrix& x, const Matrix& y) {
        double mx = 0.0, my = 0.0;
        const std::size_t n = x.rows() * x.cols();
        for (std::size_t i = 0; i < n; ++i) {
            mx += x.data()[i];
            my += y.data()[i];
        }
        mx /= static_cast<double>(n);
        my /= static_cast<double>(n);
        double num = 0.0, dx = 0.0, dy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double a = x.data()[i] - mx;
            const double b = y.data()[i] - my;
            num += a * b;
            dx += a * a;
            dy += b * b;
        }
        return dx > 0 && dy > 0 ? num / std::sqrt(dx * dy) : 0.0;
    };
    const auto b_fits = [&](long long delta) {
        for (std::size_t s : {std::size_t{1}, std::size_t{3}}) {
            const long long start = static_cast<long long>(new_cols[s]) + delta -
                                    static_cast<long long>(n_x / 2);
            if (start < 0 || start + static_cast<long long>(n_x) >
                                 static_cast<long long>(window.width()))
                return false;
        }
        return true;
    };
    StepPair out = extract_and_average(window, new_cols, n_x);
    const auto gauge_limit = static_cast<long long>(n_x / 8);
    long long best_delta = 0;
    double best_r = pearson(out.a, out.b);
    for (long long mag2 = 1; mag2 <= gauge_limit; ++mag2)
        for (long long delta : {mag2, -mag2}) {
            if (!b_fits(delta)) continue;
            auto cols = new_cols;
            cols[1] = static_cast<std::size_t>(static_cast<long long>(cols[1]) + delta);
            cols[3] = static_cast<std::size_t>(static_cast<long long>(cols[3]) + delta);
            const double r = pearson(out.a, extract_and_average(window, cols, n_x).b);
            if (r > best_r) {
                best_r = r;
                best_delta = delta;
            }
        }
    if (best_delta != 0) {
        new_cols[1] =
            static_cast<std::size_t>(static_cast<long long>(new_cols[1]) + best_delta);
        new_cols[3] =
            static_cast<std::size_t>(static_cast<long long>(new_cols[3]) + best_delta);
        out = extract_and_average(window, new_cols, n_x);
    }
    out.gamma_a = refined.gamma_a;
    out.gamma_b = refined.gamma_b;
    for (const auto& f : refined.flags)
        if (std::find(out.flags.begin(), out.flags.end(), f) == out.flags.end())
            out.flags.push_back(f);
    return out;
}

} // namespace mdgait
