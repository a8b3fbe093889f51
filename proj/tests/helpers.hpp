#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mdgait/config.hpp"
#include "mdgait/sim.hpp"
#include "mdgait/tfa.hpp"

namespace testutil {

// Complex exponential exp(j 2 pi f t), optionally with circular Gaussian
// noise at snr_db.
mdgait::IqSignal tone(double freq_hz, double fs = 2560.0, double seconds = 6.0,
                      double snr_db = std::numeric_limits<double>::infinity(),
                      std::uint64_t seed = 1);

// STFT parameters at hop 8: the full-resolution defaults are two orders of
// magnitude slower and add nothing to most assertions.
mdgait::StftParams fast_stft();

// Walker with knobs the gait tests care about; everything else defaulted.
mdgait::WalkerConfig walker(double torso_speed, double step_rate, double rho,
                            mdgait::Direction dir = mdgait::Direction::toward);

mdgait::RadarConfig radar(double snr_db = std::numeric_limits<double>::infinity(),
                          std::uint64_t seed = 1, double duration_s = 6.0);

// Self-deleting scratch directory.
class TempDir {
public:
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

} // namespace testutil
