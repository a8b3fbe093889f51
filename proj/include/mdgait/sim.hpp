#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mdgait/matrix.hpp"

namespace mdgait {

enum class Direction { toward, away };

const char* direction_name(Direction d);
Direction direction_from_name(const std::string& name);

struct RadarConfig {
    double carrier_frequency = 2.4e10; // Hz
    double sampling_frequency = 2560.0; // Hz
    double duration = 6.0; // s
    double snr_db = std::numeric_limits<double>::infinity(); // +inf = noiseless
    std::uint64_t rng_seed = 0;

    std::size_t sample_count() const;
    double wavelength() const;
    void validate() const;
};

struct ScattererAmplitudes {
    double torso = 1.0;
    double foot = 0.7;
    double knee = 0.5;
};

// Point-scatterer walker. The torso advances at constant radial speed; each
// foot alternates stance and a raised-cosine swing velocity pulse peaking at
// peak_ratio * torso_speed. The swing occupies a 2/peak_ratio fraction of the
// gait cycle so that over a full cycle each unaffected foot covers the same
// distance as the torso. One leg ("leg 0") carries the asymmetry: its peak
// swing speed is scaled by `asymmetry` and its swing fraction stretched by
// (1 + duty_asymmetry). With knee_mode, knee scatterers are added and the
// asymmetry moves to leg 0's knee while the feet stay symmetric.
struct WalkerConfig {
    double torso_speed = 1.0; // m/s
    double step_rate = 1.8; // steps per second
    Direction direction = Direction::toward;
    double start_range = 10.0; // m
    double asymmetry = 1.0; // rho in (0, 1]; 1 = symmetric
    double duty_asymmetry = 0.0; // >= 0
    bool knee_mode = false;
    double gait_phase = 0.0; // initial cycle phase in [0, 1)
    double peak_ratio = 3.0; // peak foot speed / torso speed
    ScattererAmplitudes amplitudes;

    void validate() const;
};

struct IqSignal {
    std::vector<cplx> samples;
    double sample_rate = 0.0;

    double duration() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

struct Scatterer {
    std::string part; // "torso", "foot0", "foot1", "knee0", "knee1"
    double amplitude = 0.0;
    double peak_speed = 0.0; // m/s, radial
    std::vector<double> range; // R(t) per time point, m
};

// Radial range histories on an arbitrary strictly increasing time grid.
std::vector<Scatterer> scatterer_trajectories(const WalkerConfig& walker,
                                              const std::vector<double>& times);

// Baseband return: sum_i a_i exp(-j 4 pi R_i(n/f_s) / lambda) plus circular
// complex Gaussian noise at the configured SNR. Deterministic given rng_seed.
IqSignal synthesize_return(const WalkerConfig& walker, const RadarConfig& radar);

struct CohortSubject {
    std::string id;
    double torso_speed = 0.5;
    double step_rate = 1.8;
    double sym_rho = 1.0; // asymmetry used for symmetric-labelled walks
    double asym_rho = 0.0; // asymmetry for asymmetric-labelled walks
    double asym_duty = 0.0;
    bool knee_mode = false;
    int walks_symmetric = 0; // per direction
    int walks_asymmetric = 0; // per direction
    double jitter = 0.04; // relative spread of speed/step-rate/rho per walk
};

struct CohortSpec {
    RadarConfig radar;
    std::vector<CohortSubject> subjects;
    double start_range = 10.0;
    double peak_ratio = 3.0;
};

struct DatasetEntry {
    std::string subject;
    Direction direction = Direction::toward;
    bool asymmetric = false; // label
    WalkerConfig walker; // fully resolved (jitter and phase applied)
    std::uint64_t seed = 0; // per-measurement noise seed
    std::string filename;
};

// Expands a cohort into concrete measurement plans, reproducibly from the
// master seed. Rejects duplicate subject ids. An empty cohort yields an
// empty plan.
std::vector<DatasetEntry> plan_cohort(const CohortSpec& spec, std::uint64_t master_seed);

} // namespace mdgait
