#include "longmem/io.hpp"

#include "longmem/errors.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace longmem {

namespace {

constexpr char bin_magic[4] = {'L', 'M', 'S', 'Q'};
constexpr std::uint32_t bin_version = 1;

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, const std::filesystem::path& file) {
    // Trim ASCII whitespace so files with padded cells still load.
    while (!token.empty() && (token.front() == ' ' || token.front() == '\t')) {
        token.remove_prefix(1);
    }
    while (!token.empty() && (token.back() == ' ' || token.back() == '\t' ||
                              token.back() == '\r')) {
        token.remove_suffix(1);
    }
    double v = 0.0;
    bool negative = false;
    std::string_view body = token;
    if (!body.empty() && (body.front() == '+' || body.front() == '-')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    const auto res = std::from_chars(body.data(), body.data() + body.size(), v);
    if (res.ec != std::errc{} || res.ptr != body.data() + body.size()) {
        throw IoError("bad numeric cell '" + std::string(token) + "' in " + file.string());
    }
    return negative ? -v : v;
}

std::ofstream open_out(const std::filesystem::path& file, std::ios::openmode extra = {}) {
    std::ofstream out(file, std::ios::out | std::ios::trunc | extra);
    if (!out) throw IoError("cannot open " + file.string() + " for writing");
    return out;
}

std::ifstream open_in(const std::filesystem::path& file, std::ios::openmode extra = {}) {
    std::ifstream in(file, std::ios::in | extra);
    if (!in) throw IoError("cannot open " + file.string());
    return in;
}

void finish(std::ofstream& out, const std::filesystem::path& file) {
    out.flush();
    if (!out) throw IoError("write failed for " + file.string());
}

}

void write_series_csv(const std::filesystem::path& file,
                      const std::vector<std::vector<double>>& series) {
    auto out = open_out(file);
    std::string line;
    for (const auto& s : series) {
        line.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (i > 0) line.push_back(',');
            line += format_double(s[i]);
        }
        line.push_back('\n');
        out << line;
    }
    finish(out, file);
}

std::vector<std::vector<double>> read_series_csv(const std::filesystem::path& file) {
    auto in = open_in(file);
    std::vector<std::vector<double>> series;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view rest(line);
        if (!rest.empty() && rest.back() == '\r') rest.remove_suffix(1);
        if (rest.empty() || rest.front() == '#') continue;
        std::vector<double> row;
        for (;;) {
            const std::size_t comma = rest.find(',');
            row.push_back(parse_double(rest.substr(0, comma), file));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        series.push_back(std::move(row));
    }
    return series;
}

void write_series_bin(const std::filesystem::path& file,
                      const std::vector<std::vector<double>>& series) {
    const std::uint32_t count = static_cast<std::uint32_t>(series.size());
    const std::uint32_t len =
        count > 0 ? static_cast<std::uint32_t>(series[0].size()) : 0;
    if (series.size() != count || (count > 0 && series[0].size() != len)) {
        throw IoError("sequence file dimensions exceed the 32-bit header fields");
    }
    for (const auto& s : series) {
        if (s.size() != len) {
            throw IoError("binary sequence files need a common length");
        }
    }
    auto out = open_out(file, std::ios::binary);
    out.write(bin_magic, 4);
    auto put = [&](const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    put(&bin_version, sizeof(bin_version));
    put(&count, sizeof(count));
    put(&len, sizeof(len));
    for (const auto& s : series) put(s.data(), s.size() * sizeof(double));
    finish(out, file);
}

std::vector<std::vector<double>> read_series_bin(const std::filesystem::path& file) {
    auto in = open_in(file, std::ios::binary);
    char magic[4] = {};
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, bin_magic, 4) != 0) {
        throw IoError("not a sequence file: " + file.string());
    }
    std::uint32_t version = 0;
    std::uint32_t count = 0, len = 0;
    auto get = [&](void* p, std::size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in.gcount() != static_cast<std::streamsize>(n)) {
            throw IoError("truncated sequence file: " + file.string());
        }
    };
    get(&version, sizeof(version));
    if (version != bin_version) {
        throw IoError("unsupported sequence file version in " + file.string());
    }
    get(&count, sizeof(count));
    get(&len, sizeof(len));
    std::vector<std::vector<double>> series(count, std::vector<double>(len));
    for (auto& s : series) get(s.data(), len * sizeof(double));
    if (in.peek() != std::char_traits<char>::eof()) {
        throw IoError("trailing bytes in sequence file: " + file.string());
    }
    return series;
}

void write_series(const std::filesystem::path& file,
                  const std::vector<std::vector<double>>& series) {
    if (file.extension() == ".bin") {
        write_series_bin(file, series);
    } else {
        write_series_csv(file, series);
    }
}

std::vector<std::vector<double>> read_series(const std::filesystem::path& file) {
    return file.extension() == ".bin" ? read_series_bin(file) : read_series_csv(file);
}

void write_truth_csv(const std::filesystem::path& file, const std::vector<Path>& paths) {
    auto out = open_out(file);
    out << "series_index,param,value\n";
    for (std::size_t i = 0; i < paths.size(); ++i) {
        for (const auto& [param, value] : paths[i].truth) {
            out << i << ',' << param << ',' << format_double(value) << '\n';
        }
    }
    finish(out, file);
}

void write_scatter_csv(const std::filesystem::path& file, const std::vector<StressRow>& rows) {
    auto out = open_out(file);
    out << "knob,estimate\n";
    for (const StressRow& r : rows) {
        out << format_double(r.knob) << ',' << format_double(r.estimate) << '\n';
    }
    finish(out, file);
}

void write_trace_csv(const std::filesystem::path& file, const std::vector<EpochRecord>& trace) {
    auto out = open_out(file);
    out << "epoch,n,mean_mse\n";
    for (const EpochRecord& r : trace) {
        out << r.epoch << ',' << r.seq_len << ',' << format_double(r.mean_mse) << '\n';
    }
    finish(out, file);
}

void write_estimates_csv(const std::filesystem::path& file,
                         const std::vector<WindowEstimate>& rows) {
    auto out = open_out(file);
    out << "series,window_start,estimate\n";
    for (const WindowEstimate& r : rows) {
        out << r.series << ',' << r.window_start << ',' << format_double(r.estimate) << '\n';
    }
    finish(out, file);
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t h = 14695981039346656037ull;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const std::filesystem::path& file, const std::string& command,
                    std::uint64_t seed, const std::string& config_digest) {
    nlohmann::json j;
    j["command"] = command;
    j["seed"] = seed;
    j["config_digest"] = config_digest;
    auto out = open_out(file);
    out << j.dump(2) << '\n';
    finish(out, file);
}

namespace {

Dist dist_from_json(const nlohmann::json& j) {
    if (j.is_number()) return Dist::point(j.get<double>());
    if (!j.is_object() || j.size() != 1) {
        throw ConfigError("a prior entry must be a number or a one-key object");
    }
    const auto& [key, v] = *j.items().begin();
    if (key == "uniform") {
        if (!v.is_array() || v.size() != 2) {
            throw ConfigError("uniform prior wants [lo, hi]");
        }
        return Dist::uniform(v[0].get<double>(), v[1].get<double>());
    }
    if (key == "exponential") {
        if (!v.is_object() || !v.contains("mean")) {
            throw ConfigError("exponential prior wants {\"mean\": m}");
        }
        return Dist::exponential(v["mean"].get<double>());
    }
    if (key == "normal") {
        if (!v.is_object() || !v.contains("mean") || !v.contains("sd")) {
            throw ConfigError("normal prior wants {\"mean\": m, \"sd\": s}");
        }
        return Dist::normal(v["mean"].get<double>(), v["sd"].get<double>());
    }
    if (key == "point") {
        if (!v.is_number()) throw ConfigError("point prior wants a number");
        return Dist::point(v.get<double>());
    }
    throw ConfigError("unknown prior distribution '" + key + "'");
}

nlohmann::json dist_to_json(const Dist& d) {
    switch (d.kind) {
        case Dist::Kind::uniform: return {{"uniform", {d.a, d.b}}};
        case Dist::Kind::exponential: return {{"exponential", {{"mean", d.a}}}};
        case Dist::Kind::normal: return {{"normal", {{"mean", d.a}, {"sd", d.b}}}};
        case Dist::Kind::point: return {{"point", d.a}};
    }
    throw ConfigError("unknown distribution kind");
}

}

PriorSpec prior_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("prior is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("process")) {
        throw ConfigError("prior JSON needs a \"process\" field");
    }
    PriorSpec spec;
    try {
        spec.process = process_kind_from_string(j["process"].get<std::string>());
        if (j.contains("params")) {
            const auto& params = j["params"];
            if (!params.is_object()) throw ConfigError("\"params\" must be an object");
            for (const auto& [name, v] : params.items()) {
                spec.params[name] = dist_from_json(v);
            }
        }
        for (const auto& [key, v] : j.items()) {
            (void)v;
            if (key != "process" && key != "params") {
                throw ConfigError("unexpected prior field '" + key + "'");
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed prior JSON: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string prior_to_json(const PriorSpec& spec) {
    nlohmann::json j;
    j["process"] = to_string(spec.process);
    j["params"] = nlohmann::json::object();
    for (const auto& [name, dist] : spec.params) {
        j["params"][name] = dist_to_json(dist);
    }
    return j.dump();
}

PriorSpec load_prior_file(const std::filesystem::path& file) {
    auto in = open_in(file);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + file.string());
    return prior_from_json(buf.str());
}

}
