#include "helpers.hpp"

#include <unistd.h>

#include <atomic>
#include <cmath>
#include <numbers>

#include "mdgait/rng.hpp"

namespace testutil {

using namespace mdgait;

IqSignal tone(double freq_hz, double fs, double seconds, double snr_db, std::uint64_t seed) {
    IqSignal sig;
    sig.sample_rate = fs;
    const auto n = static_cast<std::size_t>(std::llround(fs * seconds));
    sig.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs;
        const double phase = 2.0 * std::numbers::pi * freq_hz * t;
        sig.samples[i] = cplx(std::cos(phase), std::sin(phase));
    }
    if (std::isfinite(snr_db)) {
        const double noise_var = std::pow(10.0, -snr_db / 10.0); // tone power is 1
        const double scale = std::sqrt(noise_var / 2.0);
        Rng rng(seed);
        for (auto& s : sig.samples) s += cplx(scale * rng.normal(), scale * rng.normal());
    }
    return sig;
}

StftParams fast_stft() {
    StftParams p;
    p.hop = 8;
    return p;
}

WalkerConfig walker(double torso_speed, double step_rate, double rho, Direction dir) {
    WalkerConfig w;
    w.torso_speed = torso_speed;
    w.step_rate = step_rate;
    w.asymmetry = rho;
    w.direction = dir;
    return w;
}

RadarConfig radar(double snr_db, std::uint64_t seed, double duration_s) {
    RadarConfig r;
    r.snr_db = snr_db;
    r.rng_seed = seed;
    r.duration = duration_s;
    return r;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<unsigned> counter{0};
    const unsigned id = counter.fetch_add(1);
    path_ = std::filesystem::temp_directory_path() /
            ("mdgait_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(id));
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

} // namespace testutil
