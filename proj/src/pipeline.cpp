#include "mdgait/pipeline.hpp"

#include <atomic>
#include <thread>

#include "mdgait/errors.hpp"
#include "mdgait/signal.hpp"

namespace mdgait {

namespace {

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

} // namespace

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (const auto& f : flags) {
        if (!out.empty()) out += ';';
        out += f;
    }
    return out;
}

AnalysisResult analyze_measurement(const Measurement& m, const PipelineConfig& config) {
    AnalysisResult result;
    Spectrogram spec = stft_spectrogram(m.signal, config.stft);
    result.denoised = denoise(spec, config.denoise_margin_db);
    result.stats = analyze_gait(result.denoised, m.direction, config.envelope);
    result.window = select_four_step_window(result.denoised, result.stats, m.direction,
                                            config.gray_floor_db, config.gray_ceil_db);
    result.n_x = step_signature_width(m.signal.sample_rate, result.stats.f_step,
                                      config.stft.hop);
    StepPair initial = extract_and_average(result.window, result.window.peak_cols, result.n_x);
    result.pair = refine_step_pair(result.window, initial, result.stats.f_step);
    result.features = feature_vector(result.pair, result.stats, config.ssim);
    return result;
}

FeatureRow feature_row(const Measurement& m, const PipelineConfig& config) {
    FeatureRow row;
    row.subject = m.subject;
    row.direction = m.direction;
    row.label = m.label;
    try {
        const AnalysisResult result = analyze_measurement(m, config);
        row.features = result.features.values();
        row.flags = join_flags(result.features.flags);
    } catch (const DataError& err) {
        row.features.fill(0.0);
        row.flags = "error:" + sanitize(err.what());
    }
    return row;
}

Matrix spectrogram_image(const Spectrogram& spec, double db_floor, double db_ceil) {
    const Matrix gray = to_gray(spec.power, db_floor, db_ceil);
    Matrix image(spec.bins(), spec.frames());
    for (std::size_t r = 0; r < image.rows(); ++r)
        for (std::size_t c = 0; c < image.cols(); ++c)
            image(r, c) = gray(c, spec.bins() - 1 - r);
    return image;
}

Direction infer_direction(const IqSignal& signal) {
    const std::size_t n = signal.samples.size();
    if (n < 2) throw DataError("signal too short to infer a direction");
    FftPlan plan(n);
    std::vector<cplx> spectrum(n);
    plan.execute(signal.samples.data(), spectrum.data());
    double positive = 0.0, negative = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        if (k < (n + 1) / 2)
            positive += std::norm(spectrum[k]);
        else if (k > n / 2)
            negative += std::norm(spectrum[k]);
    }
    return positive >= negative ? Direction::toward : Direction::away;
}

FeatureTable compute_features(const std::filesystem::path& manifest_path,
                              const PipelineConfig& config, unsigned jobs) {
    const std::vector<DatasetRow> rows = read_dataset_manifest(manifest_path);
    const std::filesystem::path base = manifest_path.parent_path();

    FeatureTable table(rows.size());
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min<unsigned>(jobs, std::max<std::size_t>(rows.size(), 1));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= rows.size()) break;
            const DatasetRow& entry = rows[i];
            FeatureRow& out = table[i];
            out.subject = entry.subject;
            out.direction = entry.direction;
            out.label = entry.label;
            try {
                Measurement m = read_measurement(base / entry.path);
                if (m.subject != entry.subject || m.direction != entry.direction ||
                    m.label != entry.label)
                    throw DataError(entry.path + ": header disagrees with the manifest row");
                out = feature_row(m, config);
            } catch (const DataError& err) {
                out.features.fill(0.0);
                out.flags = "error:" + sanitize(err.what());
            }
        }
    };

    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return table;
}

} // namespace mdgait
