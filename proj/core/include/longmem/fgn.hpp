#pragma once

#include "longmem/path.hpp"
#include "longmem/rng.hpp"

#include <cstdint>
#include <memory>
#include <utility>

namespace longmem {

// Autocovariance of unit-variance fractional Gaussian noise at integer lag:
// rho(k) = (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}) / 2.
double fgn_autocov(std::size_t lag, double hurst);

// Eigenvalues of the circulant matrix that embeds the n-point fGn covariance.
// n is padded to the next power of two m; the circulant has order 2m.
struct FgnSpectrum {
    std::size_t n = 0;
    std::size_t m = 0;
    double hurst = 0.0;
    std::vector<double> eigenvalues;  // 2m entries, all >= 0
};

// Cached.  Eigenvalues barely below zero (within 1e-8 of the largest, in
// magnitude) are clamped to zero; anything more negative throws
// EmbeddingFailure because the embedding is then not a usable covariance.
std::shared_ptr<const FgnSpectrum> circulant_spectrum(std::size_t n, double hurst);

// One spectral synthesis yields two independent fGn paths of length n.
std::pair<Path, Path> sample_fgn_pair(std::size_t n, double hurst, RngStream& rng);

// Exact dense sampler: factor the covariance once per (n, hurst), then one
// triangular multiply per draw.  Refuses n above max_cholesky_n().
Path sample_fgn_cholesky(std::size_t n, double hurst, RngStream& rng);

// Partial sums scaled by dt^H; output has one more value than the input and
// starts at zero.
Path fgn_to_fbm(const Path& increments, double hurst, double dt);

// Fractional Brownian motion with scale and drift: sigma * B_H(t) + mu * t on
// the grid t_k = k * dt, k = 0..n.  The returned path has n increments.
Path sample_fbm(std::size_t n, double hurst, double sigma, double mu, double dt, RngStream& rng);

// Hands out one fGn path per call, keeping the spare half of each spectral
// draw for the next request with the same (n, hurst).  When the embedding is
// unusable it falls back to the dense factorization if n permits, otherwise
// the failure propagates.
class FgnSampler {
public:
    explicit FgnSampler(RngStream rng) : rng_(std::move(rng)) {}

    Path next(std::size_t n, double hurst);

    RngStream& rng() { return rng_; }

private:
    RngStream rng_;
    std::vector<double> spare_;
    std::size_t spare_n_ = 0;
    double spare_hurst_ = 0.0;
    bool has_spare_ = false;
};

// Largest n the dense sampler accepts (the factor is n*n doubles).
std::size_t max_cholesky_n();
void set_max_cholesky_n(std::size_t n);

// Instrumentation for cache behavior, for tests and benchmarks.
std::uint64_t spectrum_requests();
std::uint64_t spectrum_computations();
std::uint64_t cholesky_requests();
std::uint64_t cholesky_factorizations();

// Drops cached spectra and factors and zeroes the counters above.
void clear_fgn_caches();

}
