#include "longmem/fgn.hpp"

#include "longmem/errors.hpp"
#include "cache.hpp"
#include "fft.hpp"

#include <lapacke.h>
#include <cblas.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <complex>

namespace longmem {

namespace {

struct GridKey {
    std::size_t n;
    std::int64_t h_fixed;  // hurst rounded to 1e-12 so near-identical H share entries

    auto operator<=>(const GridKey&) const = default;
};

GridKey make_key(std::size_t n, double hurst) {
    return GridKey{n, static_cast<std::int64_t>(std::llround(hurst * 1e12))};
}

struct CholeskyFactor {
    std::size_t n = 0;
    std::vector<double> lower;  // row major n*n, lower triangle filled
};

detail::LruCache<GridKey, FgnSpectrum>& spectrum_cache() {
    static detail::LruCache<GridKey, FgnSpectrum> cache(64);
    return cache;
}

detail::LruCache<GridKey, CholeskyFactor>& factor_cache() {
    static detail::LruCache<GridKey, CholeskyFactor> cache(4);
    return cache;
}

std::atomic<std::uint64_t> g_spectrum_requests{0};
std::atomic<std::uint64_t> g_spectrum_computations{0};
std::atomic<std::uint64_t> g_cholesky_requests{0};
std::atomic<std::uint64_t> g_cholesky_factorizations{0};
std::atomic<std::size_t> g_max_cholesky_n{8192};

void check_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        throw DomainError("hurst must lie strictly between 0 and 1");
    }
}

std::shared_ptr<const FgnSpectrum> compute_spectrum(std::size_t n, double hurst) {
    g_spectrum_computations.fetch_add(1, std::memory_order_relaxed);
    const std::size_t m = std::bit_ceil(std::max<std::size_t>(n, 2));
    const std::size_t order = 2 * m;

    std::vector<std::complex<double>> row(order);
    for (std::size_t j = 0; j <= m; ++j) row[j] = fgn_autocov(j, hurst);
    for (std::size_t j = m + 1; j < order; ++j) row[j] = row[order - j];

    detail::fft(row.data(), order, /*backward=*/false);

    auto spec = std::make_shared<FgnSpectrum>();
    spec->n = n;
    spec->m = m;
    spec->hurst = hurst;
    spec->eigenvalues.resize(order);
    double max_eig = 0.0;
    for (std::size_t k = 0; k < order; ++k) {
        spec->eigenvalues[k] = row[k].real();
        max_eig = std::max(max_eig, spec->eigenvalues[k]);
    }
    const double floor = -1e-8 * max_eig;
    for (double& ev : spec->eigenvalues) {
        if (ev < 0.0) {
            if (ev < floor) {
                throw EmbeddingFailure("circulant embedding has a significantly negative eigenvalue");
            }
            ev = 0.0;
        }
    }
    return spec;
}

std::shared_ptr<const CholeskyFactor> compute_factor(std::size_t n, double hurst) {
    g_cholesky_factorizations.fetch_add(1, std::memory_order_relaxed);
    auto fac = std::make_shared<CholeskyFactor>();
    fac->n = n;
    fac->lower.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            fac->lower[i * n + j] = fgn_autocov(i - j, hurst);
        }
    }
    const lapack_int info = LAPACKE_dpotrf(LAPACK_ROW_MAJOR, 'L', static_cast<lapack_int>(n),
                                           fac->lower.data(), static_cast<lapack_int>(n));
    if (info > 0) throw FactorizationFailure("fGn covariance is not numerically positive definite");
    if (info < 0) throw Error("dpotrf rejected argument " + std::to_string(-info));
    return fac;
}

}

double fgn_autocov(std::size_t lag, double hurst) {
    check_hurst(hurst);
    if (lag == 0) return 1.0;
    const double k = static_cast<double>(lag);
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(k - 1.0, h2));
}

std::shared_ptr<const FgnSpectrum> circulant_spectrum(std::size_t n, double hurst) {
    check_hurst(hurst);
    if (n < 2) throw DomainError("need at least two samples for the embedding");
    g_spectrum_requests.fetch_add(1, std::memory_order_relaxed);
    return spectrum_cache().get(make_key(n, hurst), [&] { return compute_spectrum(n, hurst); });
}

std::pair<Path, Path> sample_fgn_pair(std::size_t n, double hurst, RngStream& rng) {
    auto spec = circulant_spectrum(n, hurst);
    const std::size_t order = spec->eigenvalues.size();

    std::vector<std::complex<double>> a(order);
    for (std::size_t k = 0; k < order; ++k) {
        const double s = std::sqrt(spec->eigenvalues[k] / static_cast<double>(order));
        const double u = rng.normal();
        const double v = rng.normal();
        a[k] = {s * u, s * v};
    }
    detail::fft(a.data(), order, /*backward=*/true);

    // Real and imaginary parts carry the target covariance and are independent.
    Path first, second;
    first.values.resize(n);
    second.values.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        first.values[k] = a[k].real();
        second.values[k] = a[k].imag();
    }
    for (Path* p : {&first, &second}) {
        p->dt = 1.0;
        p->process = ProcessKind::fgn;
        p->truth["hurst"] = hurst;
    }
    return {std::move(first), std::move(second)};
}

Path sample_fgn_cholesky(std::size_t n, double hurst, RngStream& rng) {
    check_hurst(hurst);
    if (n < 2) throw DomainError("need at least two samples");
    if (n > max_cholesky_n()) {
        throw DomainError("n exceeds the dense sampler cap; raise it with set_max_cholesky_n");
    }
    g_cholesky_requests.fetch_add(1, std::memory_order_relaxed);
    auto fac = factor_cache().get(make_key(n, hurst), [&] { return compute_factor(n, hurst); });

    Path out;
    out.values.resize(n);
    for (double& v : out.values) v = rng.normal();
    cblas_dtrmv(CblasRowMajor, CblasLower, CblasNoTrans, CblasNonUnit, static_cast<blasint>(n),
                fac->lower.data(), static_cast<blasint>(n), out.values.data(), 1);
    out.dt = 1.0;
    out.process = ProcessKind::fgn;
    out.truth["hurst"] = hurst;
    return out;
}

Path fgn_to_fbm(const Path& increments, double hurst, double dt) {
    check_hurst(hurst);
    if (increments.process != ProcessKind::fgn) {
        throw DomainError("fgn_to_fbm expects fGn increments");
    }
    if (!(dt > 0.0)) throw DomainError("dt must be positive");
    const double scale = std::pow(dt, hurst);
    Path out;
    out.values = cumsum_from_zero(increments.values);
    for (double& v : out.values) v *= scale;
    out.dt = dt;
    out.process = ProcessKind::fbm;
    out.truth = increments.truth;
    out.truth["hurst"] = hurst;
    return out;
}

Path sample_fbm(std::size_t n, double hurst, double sigma, double mu, double dt, RngStream& rng) {
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    Path noise;
    try {
        noise = sample_fgn_pair(n, hurst, rng).first;
    } catch (const EmbeddingFailure&) {
        if (n > max_cholesky_n()) throw;
        noise = sample_fgn_cholesky(n, hurst, rng);
    }
    Path out = fgn_to_fbm(noise, hurst, dt);
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        out.values[k] = sigma * out.values[k] + mu * (static_cast<double>(k) * dt);
    }
    out.truth["sigma"] = sigma;
    out.truth["mu"] = mu;
    return out;
}

Path FgnSampler::next(std::size_t n, double hurst) {
    if (has_spare_ && spare_n_ == n && spare_hurst_ == hurst) {
        has_spare_ = false;
        Path out;
        out.values = std::move(spare_);
        out.dt = 1.0;
        out.process = ProcessKind::fgn;
        out.truth["hurst"] = hurst;
        return out;
    }
    has_spare_ = false;
    try {
        auto [first, second] = sample_fgn_pair(n, hurst, rng_);
        spare_ = std::move(second.values);
        spare_n_ = n;
        spare_hurst_ = hurst;
        has_spare_ = true;
        return std::move(first);
    } catch (const EmbeddingFailure&) {
        if (n > max_cholesky_n()) throw;
        return sample_fgn_cholesky(n, hurst, rng_);
    }
}

std::size_t max_cholesky_n() { return g_max_cholesky_n.load(std::memory_order_relaxed); }

void set_max_cholesky_n(std::size_t n) { g_max_cholesky_n.store(n, std::memory_order_relaxed); }

std::uint64_t spectrum_requests() { return g_spectrum_requests.load(std::memory_order_relaxed); }
std::uint64_t spectrum_computations() { return g_spectrum_computations.load(std::memory_order_relaxed); }
std::uint64_t cholesky_requests() { return g_cholesky_requests.load(std::memory_order_relaxed); }
std::uint64_t cholesky_factorizations() { return g_cholesky_factorizations.load(std::memory_order_relaxed); }

void clear_fgn_caches() {
    spectrum_cache().clear();
    factor_cache().clear();
    g_spectrum_requests.store(0);
    g_spectrum_computations.store(0);
    g_cholesky_requests.store(0);
    g_cholesky_factorizations.store(0);
}

}
