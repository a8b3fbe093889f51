// mdgait: micro-Doppler gait asymmetry toolkit.
//
// Subcommands cover the full chain: simulate a radar dataset, analyze single
// measurements, build feature tables, select and fit the detector, and run
// leave-one-subject-out evaluation. Exit codes: 0 success, 2 invalid request
// or configuration, 3 unusable data.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mdgait/config.hpp"
#include "mdgait/errors.hpp"
#include "mdgait/io.hpp"
#include "mdgait/model.hpp"
#include "mdgait/pipeline.hpp"
#include "mdgait/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mdgait;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::uint64_t seed = 0;
    std::string out = ".";
    unsigned jobs = 1;
};

struct StftOverrides {
    std::optional<std::size_t> window_length;
    std::optional<std::size_t> fft_size;
    std::optional<std::size_t> hop;
    std::optional<double> margin_db;
};

PipelineConfig load(const GlobalArgs& g, const StftOverrides& o = {}) {
    PipelineConfig config =
        g.config_path.empty() ? parse_config("", "<defaults>") : load_config(g.config_path);
    if (o.window_length) config.stft.window_length = *o.window_length;
    if (o.fft_size) config.stft.fft_size = *o.fft_size;
    if (o.hop) config.stft.hop = *o.hop;
    if (o.margin_db) config.denoise_margin_db = *o.margin_db;
    config.validate();
    return config;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

class Stopwatch {
public:
    explicit Stopwatch(RunManifest& manifest) : manifest_(manifest) {}

    template <typename F>
    auto stage(const std::string& name, F&& f) {
        const auto start = std::chrono::steady_clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            record(name, start);
        } else {
            auto result = f();
            record(name, start);
            return result;
        }
    }

private:
    void record(const std::string& name, std::chrono::steady_clock::time_point start) {
        const std::chrono::duration<double, std::milli> elapsed =
            std::chrono::steady_clock::now() - start;
        manifest_.timings_ms.push_back({name, elapsed.count()});
    }

    RunManifest& manifest_;
};

// Runs f(0..n-1) on `jobs` threads; the first exception wins and is rethrown.
template <typename F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) break;
            try {
                f(i);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                break;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

Measurement load_measurement(const std::string& path, bool infer) {
    Measurement m = read_measurement(path);
    if (infer) m.direction = infer_direction(m.signal);
    return m;
}

ordered_json gait_json(const GaitStats& stats, const Spectrogram& spec) {
    ordered_json doc;
    doc["f_step"] = stats.f_step;
    doc["f_max"] = stats.f_max;
    doc["f_torso"] = stats.f_torso;
    doc["envelope_gaps"] = stats.envelope_gaps;
    doc["peaks"] = ordered_json::array();
    for (const auto& p : stats.step_peaks)
        doc["peaks"].push_back({{"frame", p.frame},
                                {"time_s", spec.frame_times[p.frame]},
                                {"envelope_hz", p.envelope_hz}});
    return doc;
}

int run_simulate(const GlobalArgs& g) {
    const PipelineConfig config = load(g);
    const std::vector<DatasetEntry> plan = plan_cohort(config.cohort, g.seed);
    const fs::path out(g.out);
    fs::create_directories(out);

    RunManifest manifest;
    manifest.command = "simulate";
    manifest.config_hash = config.config_hash;
    manifest.seed = g.seed;
    Stopwatch watch(manifest);

    std::vector<DatasetRow> rows(plan.size());
    watch.stage("synthesize", [&] {
        parallel_for(plan.size(), g.jobs, [&](std::size_t i) {
            const DatasetEntry& entry = plan[i];
            RadarConfig radar = config.radar;
            radar.rng_seed = entry.seed;
            Measurement m;
            m.signal = synthesize_return(entry.walker, radar);
            m.direction = entry.direction;
            m.label = entry.asymmetric ? 1 : 0;
            m.subject = entry.subject;
            write_measurement(out / entry.filename, m);
            rows[i] = {entry.filename, entry.subject, entry.direction, m.label, entry.seed};
        });
    });
    write_dataset_manifest(out / "dataset.csv", rows);

    watch.stage("hash", [&] {
        for (const auto& row : rows) manifest.add_artifact(out, out / row.path);
        manifest.add_artifact(out, out / "dataset.csv");
    });
    write_run_manifest(out / "manifest.json", manifest);
    std::cout << "wrote " << rows.size() << " measurements to " << out.string() << '\n';
    return 0;
}

int run_analyze(const GlobalArgs& g, const StftOverrides& o, const std::string& path,
                bool infer) {
    const PipelineConfig config = load(g, o);
    const fs::path out(g.out);
    fs::create_directories(out);

    RunManifest manifest;
    manifest.command = "analyze";
    manifest.config_hash = config.config_hash;
    manifest.seed = g.seed;
    Stopwatch watch(manifest);

    const Measurement m =
        watch.stage("read", [&] { return load_measurement(path, infer); });
    const AnalysisResult result =
        watch.stage("analyze", [&] { return analyze_measurement(m, config); });

    watch.stage("export", [&] {
        write_pgm(out / "spectrogram.pgm",
                  spectrogram_image(result.denoised, config.gray_floor_db, config.gray_ceil_db));
        write_matrix_csv(out / "spectrogram.csv", to_db(result.denoised), "time_s",
                         result.denoised.frame_times, "freq_hz", result.denoised.freq_axis);
        write_pgm(out / "window.pgm", result.window.gray.flipped_rows());
        write_pgm(out / "step_a.pgm", result.pair.a.flipped_rows());
        write_pgm(out / "step_b.pgm", result.pair.b.flipped_rows());
        write_file_atomic(out / "gaitstats.json",
                          gait_json(result.stats, result.denoised).dump(2) + '\n');

        FeatureRow row;
        row.subject = m.subject;
        row.direction = m.direction;
        row.label = m.label;
        row.features = result.features.values();
        row.flags = join_flags(result.features.flags);
        write_feature_csv(out / "features.csv", {row});
    });

    for (const char* name : {"spectrogram.pgm", "spectrogram.csv", "window.pgm", "step_a.pgm",
                             "step_b.pgm", "gaitstats.json", "features.csv"})
        manifest.add_artifact(out, out / name);
    write_run_manifest(out / "manifest.json", manifest);

    std::cout << "subject " << m.subject << " (" << direction_name(m.direction)
              << "): f_step " << fmt(result.stats.f_step) << " Hz, f_max "
              << fmt(result.stats.f_max) << " Hz, f_torso " << fmt(result.stats.f_torso)
              << " Hz\n";
    const auto& names = FeatureVector::names();
    const auto values = result.features.values();
    for (std::size_t j = 0; j < names.size(); ++j)
        std::cout << "  " << names[j] << " = " << fmt(values[j]) << '\n';
    return 0;
}

int run_gaitstats(const GlobalArgs& g, const StftOverrides& o, const std::string& path,
                  bool infer) {
    const PipelineConfig config = load(g, o);
    const Measurement m = load_measurement(path, infer);
    const Spectrogram denoised =
        denoise(stft_spectrogram(m.signal, config.stft), config.denoise_margin_db);
    const GaitStats stats = analyze_gait(denoised, m.direction, config.envelope);

    const ordered_json doc = gait_json(stats, denoised);
    std::cout << doc.dump(2) << '\n';

    const fs::path out(g.out);
    fs::create_directories(out);
    write_file_atomic(out / "gaitstats.json", doc.dump(2) + '\n');
    RunManifest manifest;
    manifest.command = "gaitstats";
    manifest.config_hash = config.config_hash;
    manifest.seed = g.seed;
    manifest.add_artifact(out, out / "gaitstats.json");
    write_run_manifest(out / "manifest.json", manifest);
    return 0;
}

int run_steps(const GlobalArgs& g, const StftOverrides& o, const std::string& path, bool infer) {
    const PipelineConfig config = load(g, o);
    const fs::path out(g.out);
    fs::create_directories(out);

    RunManifest manifest;
    manifest.command = "steps";
    manifest.config_hash = config.config_hash;
    manifest.seed = g.seed;
    Stopwatch watch(manifest);

    const Measurement m = load_measurement(path, infer);
    const AnalysisResult result =
        watch.stage("analyze", [&] { return analyze_measurement(m, config); });

    write_pgm(out / "window.pgm", result.window.gray.flipped_rows());
    write_pgm(out / "step_a.pgm", result.pair.a.flipped_rows());
    write_pgm(out / "step_b.pgm", result.pair.b.flipped_rows());

    ordered_json doc;
    doc["n_x"] = result.n_x;
    doc["band_hz"] = {result.window.band_lo_hz, result.window.band_hi_hz};
    doc["start_frame"] = result.window.start_frame;
    doc["frame_rate"] = result.window.frame_rate;
    doc["step_cols"] = result.pair.step_cols;
    ordered_json times = ordered_json::array();
    for (std::size_t col : result.pair.step_cols)
        times.push_back(result.denoised.frame_times[result.window.start_frame + col]);
    doc["step_times_s"] = times;
    doc["gamma_a"] = result.pair.gamma_a;
    doc["gamma_b"] = result.pair.gamma_b;
    doc["flags"] = result.pair.flags;
    write_file_atomic(out / "steps.json", doc.dump(2) + '\n');

    for (const char* name : {"window.pgm", "step_a.pgm", "step_b.pgm", "steps.json"})
        manifest.add_artifact(out, out / name);
    write_run_manifest(out / "manifest.json", manifest);
    std::cout << "gamma_a " << fmt(result.pair.gamma_a) << ", gamma_b "
              << fmt(result.pair.gamma_b) << '\n';
    return 0;
}

int run_features(const GlobalArgs& g, const StftOverrides& o, const std::string& dataset) {
    const PipelineConfig config = load(g, o);
    const fs::path out(g.out);
    fs::create_directories(out);

    RunManifest manifest;
    manifest.command = "features";
    manifest.config_hash = config.config_hash;
    manifest.seed = g.seed;
    Stopwatch watch(manifest);

    const FeatureTable table =
        watch.stage("features", [&] { return compute_features(dataset, config, g.jobs); });
    write_feature_csv(out / "features.csv", table);
    manifest.add_artifact(out, out / "features.csv");
    write_run_manifest(out / "manifest.json", manifest);

    std::size_t errors = 0;
    for (const auto& row : table) errors += row.flags.rfind("error:", 0) == 0;
    std::cout << table.size() << " rows (" << errors << " errors) -> "
              << (out / "features.csv").string() << '\n';
    return 0;
}

std::string mask_names(std::uint32_t mask) {
    std::string s;
    const auto& names = FeatureVector::names();
    for (std::size_t j = 0; j < names.size(); ++j)
        if (mask & (1u << j)) {
            if (!s.empty()) s += ';';
            s += names[j];
        }
    return s;
}

ordered_json model_json(const LogisticModel& model) {
    ordered_json coeffs = ordered_json::array();
    for (std::size_t j = 0; j < model.coef.size(); ++j) {
        coeffs.push_back({{"predictor", j == 0 ? "(intercept)" : model.predictor_names[j - 1]},
                          {"coefficient", model.coef[j]},
                          {"std_error", model.std_error[j]},
                          {"p_value", model.p_value[j]}});
    }
    return {{"converged", model.converged},
            {"log_likelihood", model.log_likelihood},
            {"n_train", model.n_train},
            {"coefficients", coeffs}};
}

int run_select(const GlobalArgs& g, const std::string& features_path,
               const std::string& scenario_arg) {
    const PipelineConfig config = load(g);
    const Scenario scenario =
        scenario_arg.empty() ? config.scenario : scenario_from_name(scenario_arg);
    const FeatureTable table = read_feature_csv(features_path);
    const ModelSelectionResult result = select_model(table, scenario);

    const fs::path out(g.out);
    fs::create_directories(out);

    ordered_json doc;
    doc["scenario"] = scenario_name(scenario);
    doc["n_rows"] = result.n_rows;
    doc["best_mask"] = result.best_mask;
    doc["predictors"] = mask_names(result.best_mask);
    doc["bic"] = result.best_bic;
    doc["model"] = model_json(result.best_model);
    write_file_atomic(out / "model.json", doc.dump(2) + '\n');

    std::string csv = "order,bic,mask,predictors\n";
    for (std::size_t d = 0; d < 8; ++d) {
        csv += std::to_string(d + 1) + ',' + fmt(result.best_bic_per_order[d]) + ',' +
               std::to_string(result.best_mask_per_order[d]) + ',' +
               mask_names(result.best_mask_per_order[d]) + '\n';
    }
    write_file_atomic(out / "bic_per_order.csv", csv);

    RunManifest manifest;
    manifest.command = "select";
    manifest.config_hash = config.config_hash;
    manifest.seed = g.seed;
    manifest.add_artifact(out, out / "model.json");
    manifest.add_artifact(out, out / "bic_per_order.csv");
    write_run_manifest(out / "manifest.json", manifest);

    std::cout << "scenario " << scenario_name(scenario) << ": best subset {"
              << mask_names(result.best_mask) << "}, BIC " << fmt(result.best_bic) << "\n"
              << "predictor coefficient std_error p_value\n";
    const LogisticModel& model = result.best_model;
    for (std::size_t j = 0; j < model.coef.size(); ++j)
        std::cout << (j == 0 ? "(intercept)" : model.predictor_names[j - 1]) << ' '
                  << fmt(model.coef[j]) << ' ' << fmt(model.std_error[j]) << ' '
                  << fmt(model.p_value[j]) << '\n';
    return 0;
}

int run_evaluate(const GlobalArgs& g, const std::string& features_path,
                 const std::string& scenario_arg, const std::string& subjects_arg,
                 double fa_bound_arg) {
    const PipelineConfig config = load(g);
    const FeatureTable table = read_feature_csv(features_path);
    const double fa_bound = fa_bound_arg >= 0 ? fa_bound_arg : config.fa_bound;

    std::vector<Scenario> scenarios;
    if (scenario_arg == "all")
        scenarios = {Scenario::toward, Scenario::away, Scenario::both};
    else
        scenarios = {scenario_from_name(scenario_arg)};

    std::vector<std::string> subjects;
    if (subjects_arg.empty()) {
        std::set<std::string> positive;
        for (const auto& row : table)
            if (row.label != 0) positive.insert(row.subject);
        subjects.assign(positive.begin(), positive.end());
        if (subjects.empty()) throw DataError("evaluate: no asymmetric-labelled rows");
    } else {
        std::size_t start = 0;
        while (start <= subjects_arg.size()) {
            const std::size_t pos = subjects_arg.find(',', start);
            const std::string id = subjects_arg.substr(
                start, pos == std::string::npos ? std::string::npos : pos - start);
            if (!id.empty()) subjects.push_back(id);
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        if (subjects.empty()) throw ValidationError("evaluate: --subjects given but empty");
    }

    const fs::path out(g.out);
    fs::create_directories(out);
    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.config_hash = config.config_hash;
    manifest.seed = g.seed;
    Stopwatch watch(manifest);

    std::string report = "subject,scenario,tau,pd_train,pd_test,fa_test,fa_train,mask,"
                         "predictors,n_train,n_test,flags\n";
    for (Scenario scenario : scenarios) {
        const std::string sc_name = scenario_name(scenario);

        // Full-data model of this scenario for the ROC curve.
        const ModelSelectionResult full = watch.stage(
            "select_" + sc_name, [&] { return select_model(table, scenario); });
        const FeatureTable rows = filter_rows(table, scenario);
        std::vector<double> probs(rows.size());
        std::vector<int> labels(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            std::vector<double> x;
            for (std::size_t j = 0; j < 8; ++j)
                if (full.best_mask & (1u << j)) x.push_back(rows[i].features[j]);
            probs[i] = predict(full.best_model, x);
            labels[i] = rows[i].label;
        }
        const RocCurve curve = roc(probs, labels);
        std::string roc_csv = "threshold,fa,detection\n";
        for (const auto& p : curve.points)
            roc_csv += fmt(p.threshold) + ',' + fmt(p.fa) + ',' + fmt(p.detection) + '\n';
        write_file_atomic(out / ("roc_" + sc_name + ".csv"), roc_csv);
        manifest.add_artifact(out, out / ("roc_" + sc_name + ".csv"));
        std::cout << "scenario " << sc_name << ": AUC " << fmt(curve.auc) << " (subset {"
                  << mask_names(full.best_mask) << "})\n";

        watch.stage("loso_" + sc_name, [&] {
            for (const std::string& subject : subjects) {
                const LosoFold fold = evaluate_loso(table, subject, scenario, fa_bound);
                report += subject + ',' + sc_name + ',' + fmt(fold.tau) + ',' +
                          fmt(fold.pd_train) + ',' + fmt(fold.pd_test) + ',' +
                          fmt(fold.fa_test) + ',' + fmt(fold.fa_train) + ',' +
                          std::to_string(fold.mask) + ',' + mask_names(fold.mask) + ',' +
                          std::to_string(fold.n_train) + ',' + std::to_string(fold.n_test) +
                          ',' + join_flags(fold.flags) + '\n';
                std::cout << "  " << subject << ": tau " << fmt(fold.tau) << ", pd_train "
                          << fmt(fold.pd_train) << ", pd_test " << fmt(fold.pd_test)
                          << ", fa_test " << fmt(fold.fa_test) << '\n';
            }
        });
    }
    write_file_atomic(out / "report.csv", report);
    manifest.add_artifact(out, out / "report.csv");
    write_run_manifest(out / "manifest.json", manifest);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"micro-Doppler gait asymmetry analysis"};
    app.require_subcommand(1);

    GlobalArgs g;
    app.add_option("--config", g.config_path, "configuration file (INI sections)")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed for data generation (default 0)");
    app.add_option("--out", g.out, "output directory (default .)");
    app.add_option("--jobs", g.jobs, "worker threads, 0 = all cores (default 1)");

    StftOverrides o;
    std::string measurement_path, dataset_path, features_path;
    std::string select_scenario, eval_scenario = "all";
    std::string subjects_arg;
    double fa_bound_arg = -1.0;
    bool infer = false;

    auto add_stft_flags = [&](CLI::App* cmd) {
        cmd->add_option("--window-length", o.window_length, "STFT window length in samples");
        cmd->add_option("--fft-size", o.fft_size, "FFT length (zero-padded)");
        cmd->add_option("--hop", o.hop, "STFT hop in samples");
        cmd->add_option("--margin-db", o.margin_db, "denoising margin over the noise mean");
    };

    CLI::App* sim_cmd =
        app.add_subcommand("simulate", "generate the configured cohort dataset");
    sim_cmd->fallthrough();

    CLI::App* analyze_cmd =
        app.add_subcommand("analyze", "run the full chain on one measurement");
    analyze_cmd->add_option("measurement", measurement_path, "input .mdg file")
        ->required()
        ->check(CLI::ExistingFile);
    analyze_cmd->add_flag("--infer-direction", infer,
                          "take the walking direction from the Doppler sign instead of the header");
    add_stft_flags(analyze_cmd);
    analyze_cmd->fallthrough();

    CLI::App* gait_cmd =
        app.add_subcommand("gaitstats", "print gait statistics of one measurement as JSON");
    gait_cmd->add_option("measurement", measurement_path, "input .mdg file")
        ->required()
        ->check(CLI::ExistingFile);
    gait_cmd->add_flag("--infer-direction", infer,
                       "take the walking direction from the Doppler sign instead of the header");
    add_stft_flags(gait_cmd);
    gait_cmd->fallthrough();

    CLI::App* steps_cmd =
        app.add_subcommand("steps", "export the averaged per-leg step signatures");
    steps_cmd->add_option("measurement", measurement_path, "input .mdg file")
        ->required()
        ->check(CLI::ExistingFile);
    steps_cmd->add_flag("--infer-direction", infer,
                        "take the walking direction from the Doppler sign instead of the header");
    add_stft_flags(steps_cmd);
    steps_cmd->fallthrough();

    CLI::App* features_cmd =
        app.add_subcommand("features", "compute the feature table for a dataset manifest");
    features_cmd->add_option("dataset", dataset_path, "dataset manifest CSV")
        ->required()
        ->check(CLI::ExistingFile);
    add_stft_flags(features_cmd);
    features_cmd->fallthrough();

    CLI::App* select_cmd =
        app.add_subcommand("select", "exhaustive BIC subset selection on a feature table");
    select_cmd->add_option("features", features_path, "feature table CSV")
        ->required()
        ->check(CLI::ExistingFile);
    select_cmd->add_option("--scenario", select_scenario, "toward, away, or both (default: config)");
    select_cmd->fallthrough();

    CLI::App* eval_cmd = app.add_subcommand(
        "evaluate", "leave-one-subject-out evaluation with ROC export");
    eval_cmd->add_option("features", features_path, "feature table CSV")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--scenario", eval_scenario,
                         "toward, away, both, or all (default all)");
    eval_cmd->add_option("--subjects", subjects_arg,
                         "comma-separated held-out subjects (default: all with positive rows)");
    eval_cmd->add_option("--fa-bound", fa_bound_arg,
                         "training false-alarm bound (default: config fa_bound)");
    eval_cmd->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(sim_cmd)) return run_simulate(g);
        if (app.got_subcommand(analyze_cmd)) return run_analyze(g, o, measurement_path, infer);
        if (app.got_subcommand(gait_cmd)) return run_gaitstats(g, o, measurement_path, infer);
        if (app.got_subcommand(steps_cmd)) return run_steps(g, o, measurement_path, infer);
        if (app.got_subcommand(features_cmd)) return run_features(g, o, dataset_path);
        if (app.got_subcommand(select_cmd)) return run_select(g, features_path, select_scenario);
        if (app.got_subcommand(eval_cmd))
            return run_evaluate(g, features_path, eval_scenario, subjects_arg, fa_bound_arg);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
