#pragma once

#include "longmem/experiment.hpp"
#include "longmem/path.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace longmem {

// Sequence containers.  CSV holds one series per line, comma-separated, may
// be ragged, and skips blank lines and '#' comment rows.  The binary layout
// is the magic "LMSQ", then u32 format version, u32 count, u32 length, then
// count*len doubles, all little-endian; it requires a common length.
// Failures throw IoError.
void write_series_csv(const std::filesystem::path& file,
                      const std::vector<std::vector<double>>& series);
std::vector<std::vector<double>> read_series_csv(const std::filesystem::path& file);

void write_series_bin(const std::filesystem::path& file,
                      const std::vector<std::vector<double>>& series);
std::vector<std::vector<double>> read_series_bin(const std::filesystem::path& file);

// Dispatch on extension: ".bin" is binary, anything else CSV.
void write_series(const std::filesystem::path& file,
                  const std::vector<std::vector<double>>& series);
std::vector<std::vector<double>> read_series(const std::filesystem::path& file);

// Sidecar with the parameters each series was generated from, one row per
// (series, parameter): series_index,param,value.
void write_truth_csv(const std::filesystem::path& file, const std::vector<Path>& paths);

// Stress results: knob,estimate.
void write_scatter_csv(const std::filesystem::path& file, const std::vector<StressRow>& rows);

// Training trace: epoch,n,mean_mse.
void write_trace_csv(const std::filesystem::path& file, const std::vector<EpochRecord>& trace);

// Sliding-window estimates: series,window_start,estimate.
struct WindowEstimate {
    std::size_t series = 0;
    std::size_t window_start = 0;
    double estimate = 0.0;
};

void write_estimates_csv(const std::filesystem::path& file,
                         const std::vector<WindowEstimate>& rows);

// 64-bit FNV-1a digest as 16 hex characters, used to fingerprint run
// configuration in manifests.
std::string fnv1a_hex(std::string_view text);

// Small JSON record describing a run: the command line, the seed, and a
// digest of the effective configuration.
void write_manifest(const std::filesystem::path& file, const std::string& command,
                    std::uint64_t seed, const std::string& config_digest);

// Prior (de)serialization.  Shape:
//   {"process": "fbm", "params": {"hurst": {"uniform": [0, 1]},
//                                 "alpha": {"exponential": {"mean": 100}},
//                                 "eta": {"normal": {"mean": 0, "sd": 1}},
//                                 "sigma": {"point": 1}}}
// A bare number is shorthand for a point mass.  Structural problems throw
// ConfigError.
PriorSpec prior_from_json(const std::string& text);
std::string prior_to_json(const PriorSpec& spec);

// Reads and parses a prior file; unreadable files throw IoError.
PriorSpec load_prior_file(const std::filesystem::path& file);

}
