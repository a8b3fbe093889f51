#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mdgait/features.hpp"
#include "mdgait/gaitparams.hpp"
#include "mdgait/model.hpp"
#include "mdgait/sim.hpp"
#include "mdgait/tfa.hpp"

namespace mdgait {

// Everything the pipeline and CLI need, with working defaults throughout.
// Loaded from an INI-style text file: `[section]` headers, `key = value`
// lines, `#`/`;` comments. Unknown sections or keys are rejected.
struct PipelineConfig {
    RadarConfig radar; // [radar]
    StftParams stft; // [stft]
    double denoise_margin_db = 8.0; // [denoise] margin_db
    EnvelopeParams envelope; // [envelope]
    SsimParams ssim; // [features] ssim_*
    double gray_floor_db = -50.0; // [features]
    double gray_ceil_db = 0.0; // [features]
    Scenario scenario = Scenario::both; // [model]
    double fa_bound = 0.05; // [model]
    CohortSpec cohort; // [cohort] + [subject <id>] sections
    std::uint64_t config_hash = 0; // FNV-1a of the source text

    void validate() const;
};

PipelineConfig parse_config(const std::string& text, const std::string& origin = "<config>");
PipelineConfig load_config(const std::filesystem::path& path);

} // namespace mdgait
