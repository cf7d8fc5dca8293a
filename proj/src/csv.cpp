#include "harvest/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace harvest::io {

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

// Buffered writer targeting a temporary file, renamed into place on finish().
class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path)
        : path_(path), tmp_(path.string() + ".tmp"), out_(tmp_, std::ios::binary) {
        if (!out_) throw IoError("cannot open for writing: " + tmp_.string());
        buffer_.reserve(1 << 20);
    }

    void raw(std::string_view text) {
        buffer_.append(text);
        if (buffer_.size() > (1 << 20) - 64) flush();
    }
    void number(double v) {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof(buf), v);
        raw(std::string_view(buf, static_cast<size_t>(res.ptr - buf)));
    }
    void integer(long long v) { raw(std::to_string(v)); }

    void finish() {
        flush();
        out_.close();
        if (!out_) throw IoError("write failed: " + tmp_.string());
        std::filesystem::rename(tmp_, path_);
    }

private:
    void flush() {
        out_.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
        buffer_.clear();
    }

    std::filesystem::path path_;
    std::filesystem::path tmp_;
    std::ofstream out_;
    std::string buffer_;
};

}  // namespace

void atomic_write_text(const std::filesystem::path& path, std::string_view content) {
    CsvWriter writer(path);
    writer.raw(content);
    writer.finish();
}

void write_value_field_csv(const std::filesystem::path& path, const solver::ValueField& field) {
    CsvWriter out(path);
    out.raw("i,j,t,n,phi\n");
    for (int i = 0; i <= field.grid.time_steps; ++i) {
        double t = field.time_at(i);
        for (int j = 0; j <= field.grid.pop_steps; ++j) {
            out.integer(i);
            out.raw(",");
            out.integer(j);
            out.raw(",");
            out.number(t);
            out.raw(",");
            out.number(field.pop_at(j));
            out.raw(",");
            out.number(field.at(i, j));
            out.raw("\n");
        }
    }
    out.finish();
}

void write_policy_field_csv(const std::filesystem::path& path, const solver::ValueField& field) {
    CsvWriter out(path);
    out.raw("i,j,t,n,z,c_star\n");
    policy::for_each_policy_level(
        field, [&](int i, double t, std::span<const double> z, std::span<const double> c) {
            for (int j = 0; j <= field.grid.pop_steps; ++j) {
                out.integer(i);
                out.raw(",");
                out.integer(j);
                out.raw(",");
                out.number(t);
                out.raw(",");
                out.number(field.pop_at(j));
                out.raw(",");
                out.number(z[static_cast<size_t>(j)]);
                out.raw(",");
                out.number(c[static_cast<size_t>(j)]);
                out.raw("\n");
            }
        });
    out.finish();
}

void write_trajectory_csv(const std::filesystem::path& path, const policy::Trajectory& traj) {
    CsvWriter out(path);
    out.raw("t,n,c,z,xbar_distorted\n");
    for (size_t k = 0; k < traj.size(); ++k) {
        out.number(traj.t[k]);
        out.raw(",");
        out.number(traj.n[k]);
        out.raw(",");
        out.number(traj.c[k]);
        out.raw(",");
        out.number(traj.z[k]);
        out.raw(",");
        out.number(traj.xbar[k]);
        out.raw("\n");
    }
    out.finish();
}

void write_density_csv(const std::filesystem::path& path, const DensityTable& table) {
    CsvWriter out(path);
    out.raw("u,p");
    for (const auto& [label, _] : table.distorted) {
        out.raw(",");
        out.raw(label);
    }
    out.raw("\n");
    for (size_t m = 0; m < table.u.size(); ++m) {
        out.number(table.u[m]);
        out.raw(",");
        out.number(table.p[m]);
        for (const auto& [_, column] : table.distorted) {
            out.raw(",");
            out.number(column[m]);
        }
        out.raw("\n");
    }
    out.finish();
}

void write_fit_report(const std::filesystem::path& path, const calibrate::FitResult& result) {
    std::string text;
    text += "r: " + format_double(result.best.r) + "\n";
    text += "x: " + format_double(result.best.x) + "\n";
    text += "K_lo: " + format_double(result.best.k_lo) + "\n";
    text += "K_hi: " + format_double(result.best.k_hi) + "\n";
    text += "loss: " + format_double(result.loss) + "\n";
    text += "ties: " + std::to_string(result.ties) + "\n";
    text += "candidates_evaluated: " + std::to_string(result.evaluated) + "\n";
    atomic_write_text(path, text);
}

namespace {

double parse_field(const std::string& text, const std::filesystem::path& path, size_t line) {
    const char* begin = text.data();
    const char* end = begin + text.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    double value = 0;
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc())
        throw ConfigError("bad number at " + path.string() + ":" + std::to_string(line));
    return value;
}

}  // namespace

calibrate::ObservationSet read_observations_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open observations file: " + path.string());
    calibrate::ObservationSet obs;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "t,w")
                throw ConfigError("observations file must start with a \"t,w\" header: " +
                                  path.string());
            continue;
        }
        size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("missing comma at " + path.string() + ":" +
                              std::to_string(line_no));
        obs.records.push_back({parse_field(line.substr(0, comma), path, line_no),
                               parse_field(line.substr(comma + 1), path, line_no)});
    }
    obs.validate();
    return obs;
}

}  // namespace harvest::io
