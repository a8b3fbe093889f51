#include "mdgait/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <vector>

#include "mdgait/errors.hpp"
#include "mdgait/io.hpp"
#include "mdgait/rng.hpp"

namespace mdgait {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

struct Parser {
    std::string origin;
    std::size_t line_no = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ValidationError(origin + ":" + std::to_string(line_no) + ": " + what);
    }

    double number(const std::string& key, const std::string& value) const {
        if (value == "inf") return std::numeric_limits<double>::infinity();
        char* end = nullptr;
        const double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str() || *end != '\0' || std::isnan(v))
            fail(key + ": expected a number, got '" + value + "'");
        return v;
    }

    std::uint64_t integer(const std::string& key, const std::string& value) const {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
        if (end == value.c_str() || *end != '\0')
            fail(key + ": expected a non-negative integer, got '" + value + "'");
        return v;
    }

    bool boolean(const std::string& key, const std::string& value) const {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        fail(key + ": expected true/false, got '" + value + "'");
    }
};

// Per-subject keys shared with the [cohort] defaults section.
bool apply_subject_key(CohortSubject& subject, const Parser& p, const std::string& key,
                       const std::string& value) {
    if (key == "torso_speed")
        subject.torso_speed = p.number(key, value);
    else if (key == "step_rate")
        subject.step_rate = p.number(key, value);
    else if (key == "sym_rho")
        subject.sym_rho = p.number(key, value);
    else if (key == "asym_rho")
        subject.asym_rho = p.number(key, value);
    else if (key == "asym_duty")
        subject.asym_duty = p.number(key, value);
    else if (key == "knee_mode")
        subject.knee_mode = p.boolean(key, value);
    else if (key == "walks_symmetric")
        subject.walks_symmetric = static_cast<int>(p.integer(key, value));
    else if (key == "walks_asymmetric")
        subject.walks_asymmetric = static_cast<int>(p.integer(key, value));
    else if (key == "jitter")
        subject.jitter = p.number(key, value);
    else
        return false;
    return true;
}

} // namespace

void PipelineConfig::validate() const {
    radar.validate();
    stft.validate();
    envelope.validate();
    ssim.validate();
    if (!(denoise_margin_db >= 0)) throw ValidationError("denoise margin_db must be >= 0");
    if (!(gray_ceil_db > gray_floor_db))
        throw ValidationError("gray_ceil_db must exceed gray_floor_db");
    if (!(fa_bound >= 0 && fa_bound <= 1)) throw ValidationError("fa_bound must be in [0, 1]");
    if (!(cohort.start_range > 0)) throw ValidationError("start_range_m must be positive");
    if (!(cohort.peak_ratio > 2.1)) throw ValidationError("peak_ratio must exceed 2.1");
    for (const auto& s : cohort.subjects) {
        if (s.id.empty()) throw ValidationError("subject id must not be empty");
        if (!(s.jitter >= 0 && s.jitter < 0.5))
            throw ValidationError("subject " + s.id + ": jitter must be in [0, 0.5)");
        if (s.walks_symmetric < 0 || s.walks_asymmetric < 0)
            throw ValidationError("subject " + s.id + ": walk counts must be >= 0");
        if (s.walks_asymmetric > 0 && !s.knee_mode && !(s.asym_rho > 0 && s.asym_rho <= 1))
            throw ValidationError("subject " + s.id +
                                  ": asym_rho must be in (0, 1] when asymmetric walks are planned");
    }
}

PipelineConfig parse_config(const std::string& text, const std::string& origin) {
    PipelineConfig config;
    config.config_hash = fnv1a64(text);

    CohortSubject subject_defaults;
    // (id, key=value pairs) per [subject] section, resolved after the
    // [cohort] defaults are fully known so section order does not matter.
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> subjects;

    Parser p{origin};
    std::string section;
    std::string current;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        current = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++p.line_no;

        std::string line = trim(current);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;

        if (line.front() == '[') {
            if (line.back() != ']') p.fail("unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.rfind("subject ", 0) == 0) {
                const std::string id = trim(section.substr(8));
                if (id.empty()) p.fail("subject section needs an id");
                subjects.push_back({id, {}});
                section = "subject";
            } else if (section != "radar" && section != "stft" && section != "denoise" &&
                       section != "envelope" && section != "features" && section != "model" &&
                       section != "cohort") {
                p.fail("unknown section [" + section + "]");
            }
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) p.fail("expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) p.fail("empty key");
        if (section.empty()) p.fail("key '" + key + "' outside any section");

        if (section == "radar") {
            if (key == "carrier_hz")
                config.radar.carrier_frequency = p.number(key, value);
            else if (key == "sample_rate_hz")
                config.radar.sampling_frequency = p.number(key, value);
            else if (key == "duration_s")
                config.radar.duration = p.number(key, value);
            else if (key == "snr_db")
                config.radar.snr_db = p.number(key, value);
            else if (key == "seed")
                config.radar.rng_seed = p.integer(key, value);
            else
                p.fail("unknown key '" + key + "' in [radar]");
        } else if (section == "stft") {
            if (key == "window_length")
                config.stft.window_length = p.integer(key, value);
            else if (key == "fft_size")
                config.stft.fft_size = p.integer(key, value);
            else if (key == "hop")
                config.stft.hop = p.integer(key, value);
            else
                p.fail("unknown key '" + key + "' in [stft]");
        } else if (section == "denoise") {
            if (key == "margin_db")
                config.denoise_margin_db = p.number(key, value);
            else
                p.fail("unknown key '" + key + "' in [denoise]");
        } else if (section == "envelope") {
            if (key == "margin_db")
                config.envelope.margin_db = p.number(key, value);
            else if (key == "dynamic_range_db")
                config.envelope.dynamic_range_db = p.number(key, value);
            else if (key == "median_frames")
                config.envelope.median_frames = p.integer(key, value);
            else
                p.fail("unknown key '" + key + "' in [envelope]");
        } else if (section == "features") {
            if (key == "ssim_window")
                config.ssim.window = p.integer(key, value);
            else if (key == "ssim_sigma")
                config.ssim.sigma = p.number(key, value);
            else if (key == "ssim_c1")
                config.ssim.c1 = p.number(key, value);
            else if (key == "ssim_c2")
                config.ssim.c2 = p.number(key, value);
            else if (key == "ssim_c3")
                config.ssim.c3 = p.number(key, value);
            else if (key == "gray_floor_db")
                config.gray_floor_db = p.number(key, value);
            else if (key == "gray_ceil_db")
                config.gray_ceil_db = p.number(key, value);
            else
                p.fail("unknown key '" + key + "' in [features]");
        } else if (section == "model") {
            if (key == "scenario") {
                try {
                    config.scenario = scenario_from_name(value);
                } catch (const ValidationError& err) {
                    p.fail(err.what());
                }
            } else if (key == "fa_bound") {
                config.fa_bound = p.number(key, value);
            } else {
                p.fail("unknown key '" + key + "' in [model]");
            }
        } else if (section == "cohort") {
            if (key == "start_range_m")
                config.cohort.start_range = p.number(key, value);
            else if (key == "peak_ratio")
                config.cohort.peak_ratio = p.number(key, value);
            else if (!apply_subject_key(subject_defaults, p, key, value))
                p.fail("unknown key '" + key + "' in [cohort]");
        } else { // subject
            if (subjects.empty()) p.fail("internal: subject key without a section");
            subjects.back().second.push_back({key, value});
        }
    }

    for (auto& [id, pairs] : subjects) {
        CohortSubject s = subject_defaults;
        s.id = id;
        for (const auto& [key, value] : pairs)
            if (!apply_subject_key(s, p, key, value))
                throw ValidationError(origin + ": unknown key '" + key + "' in [subject " + id +
                                      "]");
        config.cohort.subjects.push_back(std::move(s));
    }
    config.cohort.radar = config.radar;

    config.validate();
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_file_bytes(path), path.string());
}

} // namespace mdgait
