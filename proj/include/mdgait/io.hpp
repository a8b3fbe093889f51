#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mdgait/features.hpp"
#include "mdgait/matrix.hpp"
#include "mdgait/sim.hpp"

namespace mdgait {

// One radar recording with the metadata needed downstream.
struct Measurement {
    IqSignal signal;
    Direction direction = Direction::toward;
    int label = 0; // 1 = asymmetric gait
    std::string subject;
};

// Binary measurement container (.mdg): little-endian, magic "MDGS",
// format version, sample rate, sample count, direction, label,
// length-prefixed subject id, then interleaved (re, im) doubles.
void write_measurement(const std::filesystem::path& path, const Measurement& m);
Measurement read_measurement(const std::filesystem::path& path);

// Row of a dataset manifest: where a measurement lives plus its metadata.
struct DatasetRow {
    std::string path; // relative to the manifest's directory
    std::string subject;
    Direction direction = Direction::toward;
    int label = 0;
    std::uint64_t seed = 0;
};

void write_dataset_manifest(const std::filesystem::path& path,
                            const std::vector<DatasetRow>& entries);
std::vector<DatasetRow> read_dataset_manifest(const std::filesystem::path& path);

// Feature table CSV:
// subject,direction,label,r,r_H,r_M,r_L,MSE,MAE,MSSIM,delta_fmax,flags
void write_feature_csv(const std::filesystem::path& path, const FeatureTable& table);
FeatureTable read_feature_csv(const std::filesystem::path& path);

// 8-bit binary PGM; values are clamped to [0, 1] and scaled to 0..255.
// Rows are written top to bottom exactly as stored.
void write_pgm(const std::filesystem::path& path, const Matrix& gray);

// Matrix CSV with one axis header row (columns) and one axis column (rows).
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::string& row_label, const std::vector<double>& row_axis,
                      const std::string& col_label, const std::vector<double>& col_axis);

// Whole-file helpers. Writes go to a temporary file in the same directory
// followed by an atomic rename, so readers never observe partial content.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file_bytes(const std::filesystem::path& path);

// Record of everything a command emitted, with content hashes so reruns
// can be compared artifact by artifact.
struct ManifestArtifact {
    std::string path;
    std::uint64_t bytes = 0;
    std::uint64_t fnv1a = 0;
};

struct RunManifest {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, double>> timings_ms;
    std::vector<ManifestArtifact> artifacts;

    // Hashes `file` (which must already exist) and records it relative to `root`.
    void add_artifact(const std::filesystem::path& root, const std::filesystem::path& file);
};

void write_run_manifest(const std::filesystem::path& path, const RunManifest& manifest);

} // namespace mdgait
