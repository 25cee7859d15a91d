#include "longmem/path.hpp"

#include "longmem/errors.hpp"

#include <cmath>

namespace longmem {

const char* to_string(ProcessKind k) {
    switch (k) {
        case ProcessKind::fgn: return "fgn";
        case ProcessKind::fbm: return "fbm";
        case ProcessKind::arfima: return "arfima";
        case ProcessKind::fou: return "fou";
        case ProcessKind::ar1: return "ar1";
        case ProcessKind::levy: return "levy";
        case ProcessKind::composite: return "composite";
    }
    return "unknown";
}

ProcessKind process_kind_from_string(std::string_view s) {
    if (s == "fgn") return ProcessKind::fgn;
    if (s == "fbm") return ProcessKind::fbm;
    if (s == "arfima") return ProcessKind::arfima;
    if (s == "fou") return ProcessKind::fou;
    if (s == "ar1") return ProcessKind::ar1;
    if (s == "levy") return ProcessKind::levy;
    if (s == "composite") return ProcessKind::composite;
    throw DomainError("unknown process kind: " + std::string(s));
}

void Path::validate() const {
    if (values.size() < 2) throw DomainError("path must hold at least two values");
    for (double v : values) {
        if (!std::isfinite(v)) throw DomainError("path contains a non-finite value");
    }
}

std::vector<double> diff(std::span<const double> x) {
    if (x.empty()) return {};
    std::vector<double> out(x.size() - 1);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) out[i] = x[i + 1] - x[i];
    return out;
}

std::vector<double> cumsum_from_zero(std::span<const double> x) {
    std::vector<double> out(x.size() + 1);
    out[0] = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) out[i + 1] = out[i] + x[i];
    return out;
}

}
