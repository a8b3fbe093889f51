#include "mdgait/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mdgait/errors.hpp"
#include "mdgait/rng.hpp"

#include "../vendor/json.hpp"

namespace fs = std::filesystem;

namespace mdgait {

namespace {

constexpr char kMagic[4] = {'M', 'D', 'G', 'S'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

class Reader {
public:
    Reader(const std::string& bytes, const fs::path& path) : bytes_(bytes), path_(path) {}

    std::uint32_t u32() { return static_cast<std::uint32_t>(raw(4)); }
    std::uint64_t u64() { return raw(8); }
    std::uint8_t u8() { return static_cast<std::uint8_t>(raw(1)); }

    double f64() {
        const std::uint64_t bits = raw(8);
        double v;
        std::memcpy(&v, &bits, sizeof v);
        return v;
    }

    std::string str(std::size_t n) {
        need(n);
        std::string s = bytes_.substr(pos_, n);
        pos_ += n;
        return s;
    }

    bool exhausted() const { return pos_ == bytes_.size(); }

private:
    std::uint64_t raw(std::size_t n) {
        need(n);
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
        pos_ += n;
        return v;
    }

    void need(std::size_t n) {
        if (bytes_.size() - pos_ < n)
            throw DataError(path_.string() + ": truncated measurement file");
    }

    const std::string& bytes_;
    fs::path path_;
    std::size_t pos_ = 0;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Field values are joined with commas, so the separator may not appear inside.
std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

double parse_double(const std::string& s, const fs::path& path, std::size_t line_no) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + s + "'");
    return v;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::string bytes = read_file_bytes(path);
    std::vector<std::string> lines;
    std::string current;
    for (char c : bytes) {
        if (c == '\n') {
            if (!current.empty() && current.back() == '\r') current.pop_back();
            lines.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) lines.push_back(std::move(current));
    return lines;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

void write_file_atomic(const fs::path& path, const std::string& bytes) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    if (!in && !in.eof()) throw DataError("read failed for " + path.string());
    return std::move(buf).str();
}

void write_measurement(const fs::path& path, const Measurement& m) {
    if (m.subject.empty()) throw ValidationError("measurement needs a subject id");
    if (m.label != 0 && m.label != 1) throw ValidationError("measurement label must be 0 or 1");
    if (!(m.signal.sample_rate > 0)) throw ValidationError("measurement needs a sample rate");

    std::string out;
    out.reserve(64 + m.subject.size() + 16 * m.signal.samples.size());
    out.append(kMagic, sizeof kMagic);
    put_u32(out, kFormatVersion);
    put_f64(out, m.signal.sample_rate);
    put_u64(out, m.signal.samples.size());
    out.push_back(m.direction == Direction::toward ? '\0' : '\1');
    out.push_back(static_cast<char>(m.label));
    put_u32(out, static_cast<std::uint32_t>(m.subject.size()));
    out.append(m.subject);
    for (const cplx& s : m.signal.samples) {
        put_f64(out, s.real());
        put_f64(out, s.imag());
    }
    write_file_atomic(path, out);
}

Measurement read_measurement(const fs::path& path) {
    const std::string bytes = read_file_bytes(path);
    Reader reader(bytes, path);

    if (reader.str(4) != std::string(kMagic, sizeof kMagic))
        throw DataError(path.string() + ": not a measurement file (bad magic)");
    const std::uint32_t version = reader.u32();
    if (version != kFormatVersion)
        throw DataError(path.string() + ": unsupported format version " + std::to_string(version));

    Measurement m;
    m.signal.sample_rate = reader.f64();
    if (!(m.signal.sample_rate > 0) || !std::isfinite(m.signal.sample_rate))
        throw DataError(path.string() + ": invalid sample rate");
    const std::uint64_t n = reader.u64();
    const std::uint8_t dir = reader.u8();
    if (dir > 1) throw DataError(path.string() + ": invalid direction byte");
    m.direction = dir == 0 ? Direction::toward : Direction::away;
    const std::uint8_t label = reader.u8();
    if (label > 1) throw DataError(path.string() + ": invalid label byte");
    m.label = label;
    const std::uint32_t id_len = reader.u32();
    m.subject = reader.str(id_len);
    if (m.subject.empty()) throw DataError(path.string() + ": empty subject id");

    m.signal.samples.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double re = reader.f64();
        const double im = reader.f64();
        m.signal.samples.emplace_back(re, im);
    }
    if (!reader.exhausted()) throw DataError(path.string() + ": trailing bytes after samples");
    return m;
}

void write_dataset_manifest(const fs::path& path, const std::vector<DatasetRow>& entries) {
    std::string out = "path,subject,direction,label,seed\n";
    for (const auto& e : entries) {
        out += csv_safe(e.path) + ',' + csv_safe(e.subject) + ',' + direction_name(e.direction) +
               ',' + std::to_string(e.label) + ',' + std::to_string(e.seed) + '\n';
    }
    write_file_atomic(path, out);
}

std::vector<DatasetRow> read_dataset_manifest(const fs::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty() || lines[0] != "path,subject,direction,label,seed")
        throw DataError(path.string() + ": not a dataset manifest (bad header)");
    std::vector<DatasetRow> entries;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 5)
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected 5 fields");
        DatasetRow e;
        e.path = fields[0];
        e.subject = fields[1];
        try {
            e.direction = direction_from_name(fields[2]);
        } catch (const ValidationError& err) {
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": " + err.what());
        }
        if (fields[3] != "0" && fields[3] != "1")
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": label must be 0 or 1");
        e.label = fields[3] == "1" ? 1 : 0;
        char* end = nullptr;
        e.seed = std::strtoull(fields[4].c_str(), &end, 10);
        if (end == fields[4].c_str() || *end != '\0')
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": bad seed");
        entries.push_back(std::move(e));
    }
    return entries;
}

namespace {

const std::string kFeatureHeader =
    "subject,direction,label,r,r_H,r_M,r_L,MSE,MAE,MSSIM,delta_fmax,flags";

} // namespace

void write_feature_csv(const fs::path& path, const FeatureTable& table) {
    std::string out = kFeatureHeader + '\n';
    for (const auto& row : table) {
        out += csv_safe(row.subject);
        out += ',';
        out += direction_name(row.direction);
        out += ',';
        out += std::to_string(row.label);
        for (double v : row.features) {
            out += ',';
            out += format_double(v);
        }
        out += ',';
        out += csv_safe(row.flags);
        out += '\n';
    }
    write_file_atomic(path, out);
}

FeatureTable read_feature_csv(const fs::path& path) {
    const std::vector<std::string> lines = read_lines(path);
    if (lines.empty() || lines[0] != kFeatureHeader)
        throw DataError(path.string() + ": not a feature table (bad header)");
    FeatureTable table;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 12)
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected 12 fields");
        FeatureRow row;
        row.subject = fields[0];
        try {
            row.direction = direction_from_name(fields[1]);
        } catch (const ValidationError& err) {
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": " + err.what());
        }
        if (fields[2] != "0" && fields[2] != "1")
            throw DataError(path.string() + ":" + std::to_string(i + 1) + ": label must be 0 or 1");
        row.label = fields[2] == "1" ? 1 : 0;
        for (std::size_t j = 0; j < 8; ++j)
            row.features[j] = parse_double(fields[3 + j], path, i + 1);
        row.flags = fields[11];
        table.push_back(std::move(row));
    }
    return table;
}

void write_pgm(const fs::path& path, const Matrix& gray) {
    if (gray.rows() == 0 || gray.cols() == 0) throw ValidationError("empty image");
    std::string out = "P5\n" + std::to_string(gray.cols()) + ' ' + std::to_string(gray.rows()) +
                      "\n255\n";
    out.reserve(out.size() + gray.rows() * gray.cols());
    for (std::size_t r = 0; r < gray.rows(); ++r)
        for (std::size_t c = 0; c < gray.cols(); ++c) {
            const double v = std::clamp(gray(r, c), 0.0, 1.0);
            out.push_back(static_cast<char>(std::lround(v * 255.0)));
        }
    write_file_atomic(path, out);
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const std::string& row_label,
                      const std::vector<double>& row_axis, const std::string& col_label,
                      const std::vector<double>& col_axis) {
    if (row_axis.size() != m.rows() || col_axis.size() != m.cols())
        throw ValidationError("matrix axes do not match its shape");
    std::string out = csv_safe(row_label) + '\\' + csv_safe(col_label);
    for (double t : col_axis) {
        out += ',';
        out += format_double(t);
    }
    out += '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out += format_double(row_axis[r]);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out += ',';
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    write_file_atomic(path, out);
}

void RunManifest::add_artifact(const fs::path& root, const fs::path& file) {
    const std::string bytes = read_file_bytes(file);
    ManifestArtifact artifact;
    artifact.path = fs::relative(file, root).generic_string();
    artifact.bytes = bytes.size();
    artifact.fnv1a = fnv1a64(bytes.data(), bytes.size());
    artifacts.push_back(std::move(artifact));
}

void write_run_manifest(const fs::path& path, const RunManifest& manifest) {
    nlohmann::ordered_json doc;
    doc["command"] = manifest.command;
    doc["config_hash"] = hex64(manifest.config_hash);
    doc["seed"] = manifest.seed;
    nlohmann::ordered_json timings = nlohmann::ordered_json::object();
    for (const auto& [stage, ms] : manifest.timings_ms) timings[stage] = ms;
    doc["timings_ms"] = timings;
    doc["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& a : manifest.artifacts) {
        doc["artifacts"].push_back(
            {{"path", a.path}, {"bytes", a.bytes}, {"fnv1a64", hex64(a.fnv1a)}});
    }
    write_file_atomic(path, doc.dump(2) + '\n');
}

} // namespace mdgait
