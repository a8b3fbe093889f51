#include "mdgait/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>

#include "mdgait/errors.hpp"
#include "mdgait/rng.hpp"

namespace mdgait {

namespace {

constexpr double kSpeedOfLight = 299792458.0;
constexpr double kKneeRatio = 2.2; // knee peak speed / torso speed
constexpr double kFootRangeOffset = 0.15; // m
constexpr double kKneeRangeOffset = 0.10; // m
constexpr double kMaxSwingFraction = 0.95;
constexpr double kMinRange = 0.05; // m

// One moving part: stance + raised-cosine swing pulse per gait cycle.
struct Part {
    std::string name;
    double amplitude;
    double peak_speed; // p
    double swing_fraction; // s, of the gait cycle
    double phase0; // swing start offset in cycles
    double range_offset; // initial range relative to start_range
};

// Distance covered within one cycle up to phase x in [0, 1).
double swing_distance(double x, double p, double s, double cycle) {
    if (x <= 0.0) return 0.0;
    if (x >= s) return 0.5 * p * s * cycle;
    return 0.5 * p * (x * cycle - (s * cycle / (2.0 * std::numbers::pi)) *
                                      std::sin(2.0 * std::numbers::pi * x / s));
}

// Cumulative distance after x cycles (x may be large and fractional).
double cumulative_distance(double x, double p, double s, double cycle) {
    double whole = std::floor(x);
    return whole * 0.5 * p * s * cycle + swing_distance(x - whole, p, s, cycle);
}

std::vector<Part> build_parts(const WalkerConfig& w) {
    const double v = w.torso_speed;
    const double foot_fraction = 2.0 / w.peak_ratio;
    const double knee_fraction = 2.0 / kKneeRatio;
    const double stretched_foot =
        std::min(foot_fraction * (1.0 + w.duty_asymmetry), kMaxSwingFraction);
    const double stretched_knee =
        std::min(knee_fraction * (1.0 + w.duty_asymmetry), kMaxSwingFraction);

    std::vector<Part> parts;
    parts.push_back({"torso", w.amplitudes.torso, v, 1.0, 0.0, 0.0});
    if (w.knee_mode) {
        // Asymmetry presents in the knees; feet swing symmetrically.
        parts.push_back({"foot0", w.amplitudes.foot, w.peak_ratio * v, foot_fraction, 0.0,
                         kFootRangeOffset});
        parts.push_back({"foot1", w.amplitudes.foot, w.peak_ratio * v, foot_fraction, 0.5,
                         -kFootRangeOffset});
        parts.push_back({"knee0", w.amplitudes.knee, kKneeRatio * v * w.asymmetry,
                         stretched_knee, 0.0, kKneeRangeOffset});
        parts.push_back({"knee1", w.amplitudes.knee, kKneeRatio * v, knee_fraction, 0.5,
                         -kKneeRangeOffset});
    } else {
        parts.push_back({"foot0", w.amplitudes.foot, w.peak_ratio * v * w.asymmetry,
                         stretched_foot, 0.0, kFootRangeOffset});
        parts.push_back({"foot1", w.amplitudes.foot, w.peak_ratio * v, foot_fraction, 0.5,
                         -kFootRangeOffset});
    }
    return parts;
}

double part_distance(const Part& part, double t, double cycle, double gait_phase) {
    if (part.name == "torso") return part.peak_speed * t;
    double phase0 = gait_phase + part.phase0;
    double x = t / cycle + phase0;
    return cumulative_distance(x, part.peak_speed, part.swing_fraction, cycle) -
           cumulative_distance(phase0, part.peak_speed, part.swing_fraction, cycle);
}

} // namespace

const char* direction_name(Direction d) {
    return d == Direction::toward ? "toward" : "away";
}

Direction direction_from_name(const std::string& name) {
    if (name == "toward") return Direction::toward;
    if (name == "away") return Direction::away;
    throw ValidationError("unknown direction '" + name + "' (expected toward or away)");
}

std::size_t RadarConfig::sample_count() const {
    return static_cast<std::size_t>(std::llround(sampling_frequency * duration));
}

double RadarConfig::wavelength() const { return kSpeedOfLight / carrier_frequency; }

void RadarConfig::validate() const {
    if (!(carrier_frequency > 0)) throw ValidationError("radar: carrier_frequency must be > 0");
    if (!(sampling_frequency > 0)) throw ValidationError("radar: sampling_frequency must be > 0");
    if (!(duration > 0)) throw ValidationError("radar: duration must be > 0");
    if (sample_count() < 2) throw ValidationError("radar: sample count must be >= 2");
}

void WalkerConfig::validate() const {
    if (!(torso_speed > 0)) throw ValidationError("walker: torso_speed must be > 0");
    if (!(step_rate > 0)) throw ValidationError("walker: step_rate must be > 0");
    if (!(start_range > 0)) throw ValidationError("walker: start_range must be > 0");
    if (!(asymmetry > 0 && asymmetry <= 1))
        throw ValidationError("walker: asymmetry must be in (0, 1]");
    if (!(duty_asymmetry >= 0)) throw ValidationError("walker: duty_asymmetry must be >= 0");
    if (!(gait_phase >= 0 && gait_phase < 1))
        throw ValidationError("walker: gait_phase must be in [0, 1)");
    if (!(peak_ratio > 2.1))
        throw ValidationError("walker: peak_ratio must exceed 2.1 so the swing fits the cycle");
    if (!(amplitudes.torso >= 0 && amplitudes.foot >= 0 && amplitudes.knee >= 0))
        throw ValidationError("walker: scatterer amplitudes must be >= 0");
}

std::vector<Scatterer> scatterer_trajectories(const WalkerConfig& walker,
                                              const std::vector<double>& times) {
    walker.validate();
    if (times.empty()) throw ValidationError("scatterer_trajectories: empty time grid");
    if (times.front() < 0) throw ValidationError("scatterer_trajectories: negative time");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw ValidationError("scatterer_trajectories: time grid must be strictly increasing");

    const double cycle = 2.0 / walker.step_rate;
    const double sign = walker.direction == Direction::toward ? -1.0 : 1.0;
    auto parts = build_parts(walker);

    std::vector<Scatterer> out;
    out.reserve(parts.size());
    for (const auto& part : parts) {
        Scatterer sc;
        sc.part = part.name;
        sc.amplitude = part.amplitude;
        sc.peak_speed = part.peak_speed;
        sc.range.resize(times.size());
        for (std::size_t i = 0; i < times.size(); ++i) {
            double d = part_distance(part, times[i], cycle, walker.gait_phase);
            double r = walker.start_range + part.range_offset + sign * d;
            if (r < kMinRange)
                throw ValidationError("scatterer range reaches zero; increase start_range");
            sc.range[i] = r;
        }
        out.push_back(std::move(sc));
    }
    return out;
}

IqSignal synthesize_return(const WalkerConfig& walker, const RadarConfig& radar) {
    radar.validate();
    walker.validate();

    const double lambda = radar.wavelength();
    for (const auto& part : build_parts(walker)) {
        double doppler = 2.0 * part.peak_speed / lambda;
        if (doppler >= radar.sampling_frequency / 2.0)
            throw ValidationError("peak Doppler of '" + part.name +
                                  "' reaches Nyquist; lower speeds or raise sampling_frequency");
    }

    const std::size_t n = radar.sample_count();
    std::vector<double> times(n);
    for (std::size_t i = 0; i < n; ++i)
        times[i] = static_cast<double>(i) / radar.sampling_frequency;

    auto scatterers = scatterer_trajectories(walker, times);

    IqSignal sig;
    sig.sample_rate = radar.sampling_frequency;
    sig.samples.assign(n, cplx(0.0, 0.0));
    const double phase_scale = -4.0 * std::numbers::pi / lambda;
    for (const auto& sc : scatterers) {
        if (sc.amplitude == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i)
            sig.samples[i] += std::polar(sc.amplitude, phase_scale * sc.range[i]);
    }

    if (std::isfinite(radar.snr_db)) {
        double power = 0.0;
        for (const auto& s : sig.samples) power += std::norm(s);
        power /= static_cast<double>(n);
        double noise_var = power / std::pow(10.0, radar.snr_db / 10.0);
        double scale = std::sqrt(noise_var / 2.0);
        Rng rng(radar.rng_seed);
        for (auto& s : sig.samples) {
            double re = rng.normal();
            double im = rng.normal();
            s += cplx(scale * re, scale * im);
        }
    }
    return sig;
}

std::vector<DatasetEntry> plan_cohort(const CohortSpec& spec, std::uint64_t master_seed) {
    spec.radar.validate();
    std::set<std::string> ids;
    for (const auto& subj : spec.subjects) {
        if (subj.id.empty()) throw ValidationError("cohort: subject id must not be empty");
        if (!ids.insert(subj.id).second)
            throw ValidationError("cohort: duplicate subject id '" + subj.id + "'");
        if (subj.walks_symmetric < 0 || subj.walks_asymmetric < 0)
            throw ValidationError("cohort: walk counts must be >= 0");
        if (subj.walks_asymmetric > 0 && !(subj.asym_rho > 0 && subj.asym_rho <= 1))
            throw ValidationError("cohort: asym_rho must be in (0, 1] for subject '" + subj.id +
                                  "'");
        if (!(subj.sym_rho > 0 && subj.sym_rho <= 1))
            throw ValidationError("cohort: sym_rho must be in (0, 1] for subject '" + subj.id +
                                  "'");
        if (!(subj.jitter >= 0 && subj.jitter < 0.5))
            throw ValidationError("cohort: jitter must be in [0, 0.5) for subject '" + subj.id +
                                  "'");
    }

    std::vector<DatasetEntry> entries;
    char name[128];
    for (const auto& subj : spec.subjects) {
        for (Direction dir : {Direction::toward, Direction::away}) {
            for (int block = 0; block < 2; ++block) {
                const bool asym = block == 1;
                const int count = asym ? subj.walks_asymmetric : subj.walks_symmetric;
                const double rho_base = asym ? subj.asym_rho : subj.sym_rho;
                for (int i = 0; i < count; ++i) {
                    std::string tag = subj.id + "/" + direction_name(dir) + "/" +
                                      (asym ? "asym" : "sym") + "/" + std::to_string(i);
                    Rng rng(derive_seed(master_seed, tag));

                    DatasetEntry e;
                    e.subject = subj.id;
                    e.direction = dir;
                    e.asymmetric = asym;
                    e.walker.direction = dir;
                    e.walker.start_range = spec.start_range;
                    e.walker.peak_ratio = spec.peak_ratio;
                    e.walker.knee_mode = subj.knee_mode;
                    double j = subj.jitter;
                    e.walker.torso_speed = subj.torso_speed * (1.0 + rng.uniform(-j, j));
                    e.walker.step_rate = subj.step_rate * (1.0 + rng.uniform(-j, j));
                    e.walker.asymmetry =
                        std::clamp(rho_base * (1.0 + rng.uniform(-j, j)), 0.05, 1.0);
                    e.walker.duty_asymmetry = asym ? subj.asym_duty : 0.0;
                    e.walker.gait_phase = rng.uniform();
                    e.seed = derive_seed(master_seed, tag + "/noise");
                    std::snprintf(name, sizeof(name), "%s_%s_%s%02d.mdg", subj.id.c_str(),
                                  direction_name(dir), asym ? "asym" : "sym", i);
                    e.filename = name;
                    entries.push_back(std::move(e));
                }
            }
        }
    }
    return entries;
}

} // namespace mdgait
