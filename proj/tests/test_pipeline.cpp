#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "mdgait/errors.hpp"
#include "mdgait/io.hpp"
#include "mdgait/pipeline.hpp"

using namespace mdgait;
namespace fs = std::filesystem;

namespace {

PipelineConfig test_config() {
    PipelineConfig config;
    config.stft.hop = 8; // full hop-1 resolution is unnecessary for these checks
    return config;
}

Measurement simulated(const WalkerConfig& walker, const RadarConfig& radar,
                      std::string subject, int label) {
    Measurement m;
    m.signal = synthesize_return(walker, radar);
    m.direction = walker.direction;
    m.label = label;
    m.subject = std::move(subject);
    return m;
}

} // namespace

TEST_CASE("join_flags concatenates with semicolons") {
    CHECK(join_flags({}) == "");
    CHECK(join_flags({"a"}) == "a");
    CHECK(join_flags({"a", "b", "c"}) == "a;b;c");
}

TEST_CASE("analyze_measurement runs the full chain on a clean walk") {
    const Measurement m =
        simulated(testutil::walker(0.5, 1.8, 1.0), testutil::radar(), "s1", 0);
    const PipelineConfig config = test_config();
    const AnalysisResult result = analyze_measurement(m, config);

    CHECK(result.denoised.denoised);
    CHECK(result.stats.f_step == doctest::Approx(1.8).epsilon(0.05));
    CHECK(result.n_x ==
          step_signature_width(m.signal.sample_rate, result.stats.f_step, config.stft.hop));
    CHECK(result.pair.a.rows() == result.window.gray.rows());
    CHECK(result.pair.a.cols() == result.n_x);
    CHECK(result.pair.b.rows() == result.pair.a.rows());

    CHECK(result.features.r > 0.95);
    CHECK(result.features.mssim_value > 0.8);
    CHECK(result.features.delta_fmax_value < 20.0);
    CHECK(result.features.flags.empty());
}

TEST_CASE("analyze_measurement propagates data errors") {
    const Measurement short_walk =
        simulated(testutil::walker(0.5, 1.8, 1.0), testutil::radar(
                      std::numeric_limits<double>::infinity(), 1, 1.0),
                  "s1", 0);
    CHECK_THROWS_AS(analyze_measurement(short_walk, test_config()), DataError);
}

TEST_CASE("feature_row reports success and failure uniformly") {
    const PipelineConfig config = test_config();

    const Measurement good =
        simulated(testutil::walker(0.5, 1.8, 1.0), testutil::radar(), "walker1", 0);
    const FeatureRow row = feature_row(good, config);
    CHECK(row.subject == "walker1");
    CHECK(row.direction == Direction::toward);
    CHECK(row.label == 0);
    CHECK(row.features[0] > 0.95);
    CHECK(row.flags.empty());

    const Measurement bad =
        simulated(testutil::walker(0.5, 1.8, 1.0),
                  testutil::radar(std::numeric_limits<double>::infinity(), 1, 1.0), "w2", 1);
    const FeatureRow err = feature_row(bad, config);
    CHECK(err.subject == "w2");
    CHECK(err.label == 1);
    CHECK(err.flags.rfind("error:", 0) == 0);
    CHECK(err.flags.find(',') == std::string::npos); // sanitized for the CSV
    for (double v : err.features) CHECK(v == 0.0);
}

TEST_CASE("spectrogram_image puts the highest frequency in the top row") {
    Spectrogram spec;
    spec.power = Matrix(2, 3); // 2 frames x 3 bins
    spec.power(0, 0) = 1e-5;
    spec.power(0, 1) = std::pow(10.0, -2.5);
    spec.power(0, 2) = 1.0;
    spec.power(1, 0) = 1.0;
    spec.power(1, 1) = 1e-5;
    spec.power(1, 2) = 1e-5;

    const Matrix image = spectrogram_image(spec, -50.0, 0.0);
    REQUIRE(image.rows() == 3); // bins
    REQUIRE(image.cols() == 2); // frames
    CHECK(image(0, 0) == doctest::Approx(1.0));
    CHECK(image(0, 1) == doctest::Approx(0.0));
    CHECK(image(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(image(1, 1) == doctest::Approx(0.0));
    CHECK(image(2, 0) == doctest::Approx(0.0));
    CHECK(image(2, 1) == doctest::Approx(1.0));
}

TEST_CASE("infer_direction reads the sign of the dominant Doppler") {
    CHECK(infer_direction(testutil::tone(160.0)) == Direction::toward);
    CHECK(infer_direction(testutil::tone(-160.0)) == Direction::away);
    CHECK(infer_direction(testutil::tone(160.0, 2560.0, 6.0, 10.0, 7)) == Direction::toward);

    IqSignal tiny;
    tiny.sample_rate = 2560.0;
    tiny.samples = {cplx(1.0, 0.0)};
    CHECK_THROWS_AS(infer_direction(tiny), DataError);
}

TEST_CASE("compute_features processes a manifest in order, in parallel, and past errors") {
    testutil::TempDir dir("pipeline_manifest");
    const PipelineConfig config = test_config();
    const RadarConfig radar = testutil::radar(std::numeric_limits<double>::infinity(), 1, 4.0);

    std::vector<DatasetRow> rows;
    std::vector<Measurement> measurements = {
        simulated(testutil::walker(0.5, 1.8, 1.0), radar, "s1", 0),
        simulated(testutil::walker(0.5, 1.8, 1.0, Direction::away), radar, "s1", 0),
        simulated(testutil::walker(0.5, 1.9, 0.6), radar, "s2", 1),
    };
    for (std::size_t i = 0; i < measurements.size(); ++i) {
        const std::string name = "m" + std::to_string(i) + ".mdg";
        write_measurement(dir / "data" / name, measurements[i]);
        DatasetRow row;
        row.path = "data/" + name;
        row.subject = measurements[i].subject;
        row.direction = measurements[i].direction;
        row.label = measurements[i].label;
        row.seed = i;
        rows.push_back(row);
    }
    // One row whose file is missing and one whose metadata contradicts the file.
    DatasetRow missing;
    missing.path = "data/absent.mdg";
    missing.subject = "s3";
    rows.push_back(missing);
    DatasetRow lying = rows[0];
    lying.label = 1;
    rows.push_back(lying);

    const fs::path manifest = dir / "dataset.csv";
    write_dataset_manifest(manifest, rows);

    const FeatureTable serial = compute_features(manifest, config, 1);
    REQUIRE(serial.size() == rows.size());
    CHECK(serial[0].subject == "s1");
    CHECK(serial[0].direction == Direction::toward);
    CHECK(serial[1].direction == Direction::away);
    CHECK(serial[2].subject == "s2");
    CHECK(serial[2].label == 1);
    for (std::size_t i = 0; i < 3; ++i) CHECK(serial[i].flags.find("error") == std::string::npos);
    CHECK(serial[0].features[0] > 0.9); // symmetric gait correlates
    CHECK(serial[2].features[0] < 0.8); // asymmetric gait does not

    CHECK(serial[3].flags.rfind("error:", 0) == 0);
    CHECK(serial[3].subject == "s3");
    CHECK(serial[4].flags.rfind("error:", 0) == 0);
    CHECK(serial[4].flags.find("disagrees") != std::string::npos);

    const FeatureTable parallel = compute_features(manifest, config, 3);
    REQUIRE(parallel.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(parallel[i].subject == serial[i].subject);
        CHECK(parallel[i].flags == serial[i].flags);
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(parallel[i].features[j] == serial[i].features[j]);
    }

    CHECK_THROWS_AS(compute_features(dir / "nope.csv", config, 1), DataError);
}
