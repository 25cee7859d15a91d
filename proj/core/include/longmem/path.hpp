#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace longmem {

enum class ProcessKind { fgn, fbm, arfima, fou, ar1, levy, composite };

const char* to_string(ProcessKind k);
ProcessKind process_kind_from_string(std::string_view s);

// A sampled trajectory plus the ground truth needed to score estimators
// against it.  `truth` maps parameter names ("hurst", "d", "alpha", ...) to
// the values the path was generated with; transforms append their own record.
struct Path {
    std::vector<double> values;
    double dt = 1.0;
    ProcessKind process = ProcessKind::fgn;
    std::map<std::string, double> truth;

    std::size_t size() const { return values.size(); }

    // Throws DomainError unless every value is finite and there are >= 2 of them.
    void validate() const;
};

// First differences: out[i] = x[i+1] - x[i].
std::vector<double> diff(std::span<const double> x);

// Running sum anchored at zero: out[0] = 0, out[i] = x[0] + ... + x[i-1].
std::vector<double> cumsum_from_zero(std::span<const double> x);

}
