#include "longmem/processes.hpp"

#include "longmem/errors.hpp"
#include "fft.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>

namespace longmem {

namespace {

void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) throw DomainError(std::string(name) + " must be finite");
}

Path draw_fgn(std::size_t n, double hurst, RngStream& rng) {
    try {
        return sample_fgn_pair(n, hurst, rng).first;
    } catch (const EmbeddingFailure&) {
        if (n > max_cholesky_n()) throw;
        return sample_fgn_cholesky(n, hurst, rng);
    }
}

}

ArfimaCoeffs arfima_ma_coeffs(double d, std::size_t truncation) {
    if (!(d > -0.5 && d < 0.5)) throw DomainError("d must lie strictly between -0.5 and 0.5");
    ArfimaCoeffs out;
    out.d = d;
    out.psi.resize(truncation + 1);
    out.psi[0] = 1.0;
    for (std::size_t k = 1; k <= truncation; ++k) {
        out.psi[k] = out.psi[k - 1] * (static_cast<double>(k) - 1.0 + d) / static_cast<double>(k);
    }
    return out;
}

Path sample_arfima(std::size_t n, double d, RngStream& rng) {
    return sample_arfima(n, d, rng, n);
}

Path sample_arfima(std::size_t n, double d, RngStream& rng, std::size_t burn_in) {
    if (n < 2) throw DomainError("need at least two samples");
    const std::size_t total = n + burn_in;
    const std::size_t trunc = std::max(total, 10 * n);
    ArfimaCoeffs coeffs = arfima_ma_coeffs(d, trunc);

    // X_j = sum_k psi_k e_{j-k}; with noise indexed so every output uses a
    // full truncated history, the slice [trunc, trunc+total) of the linear
    // convolution is stationary.  A circular transform of size >= total+trunc
    // never wraps on that slice.
    std::vector<double> noise(total + trunc);
    for (double& v : noise) v = rng.normal();

    const std::size_t p = std::bit_ceil(total + trunc);
    std::vector<std::complex<double>> fa(p), fb(p);
    std::copy(coeffs.psi.begin(), coeffs.psi.end(), fa.begin());
    std::copy(noise.begin(), noise.end(), fb.begin());
    detail::fft(fa.data(), p, false);
    detail::fft(fb.data(), p, false);
    for (std::size_t k = 0; k < p; ++k) fa[k] *= fb[k];
    detail::fft(fa.data(), p, true);

    Path out;
    out.values.resize(n);
    const double inv_p = 1.0 / static_cast<double>(p);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = fa[trunc + burn_in + j].real() * inv_p;
    }
    out.dt = 1.0;
    out.process = ProcessKind::arfima;
    out.truth["d"] = d;
    return out;
}

void FouParams::validate() const {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hurst must lie strictly between 0 and 1");
    if (!(sigma > 0.0)) throw DomainError("sigma must be positive");
    if (!(alpha >= 0.0)) throw DomainError("alpha must be non-negative");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive and finite");
    check_finite(alpha, "alpha");
    check_finite(eta, "eta");
    check_finite(mu, "mu");
}

Path sample_fou(const FouParams& params, std::size_t n, RngStream& rng) {
    params.validate();
    if (n < 2) throw DomainError("need at least two steps");
    const double dt = params.dt;
    if (!(params.alpha * dt < 1.0)) {
        throw StabilityError("alpha * dt must stay below 1 for the Euler scheme");
    }
    Path noise = draw_fgn(n, params.hurst, rng);
    const double vol = params.sigma * std::pow(dt, params.hurst);

    Path out;
    out.values.resize(n + 1);
    out.values[0] = params.eta;
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k + 1] = out.values[k] - params.alpha * (out.values[k] - params.mu) * dt +
                            vol * noise.values[k];
    }
    out.dt = dt;
    out.process = ProcessKind::fou;
    out.truth["hurst"] = params.hurst;
    out.truth["alpha"] = params.alpha;
    out.truth["mu"] = params.mu;
    out.truth["sigma"] = params.sigma;
    out.truth["eta"] = params.eta;
    return out;
}

Path ar1_from_noise(std::span<const double> innovations, double a) {
    check_finite(a, "a");
    if (innovations.size() < 2) throw DomainError("need at least two innovations");
    Path out;
    out.values.resize(innovations.size());
    out.values[0] = innovations[0];
    for (std::size_t t = 1; t < innovations.size(); ++t) {
        out.values[t] = a * out.values[t - 1] + innovations[t];
    }
    out.dt = 1.0;
    out.process = ProcessKind::ar1;
    out.truth["a"] = a;
    return out;
}

Path sample_ar1(std::size_t n, double a, RngStream& rng) {
    std::vector<double> w(n);
    for (double& v : w) v = rng.normal();
    return ar1_from_noise(w, a);
}

double sample_stable_increment(double alpha, RngStream& rng) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("alpha must lie in (0, 2]");
    const double u = rng.uniform(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    const double w = rng.exponential(1.0);
    double x;
    if (alpha == 1.0) {
        x = std::tan(u);
    } else {
        x = std::sin(alpha * u) / std::pow(std::cos(u), 1.0 / alpha) *
            std::pow(std::cos(u - alpha * u) / w, (1.0 - alpha) / alpha);
    }
    // Unit scale gives N(0, 2) at the Gaussian endpoint; normalize that case
    // to unit-variance steps.
    if (alpha == 2.0) x *= std::numbers::sqrt2 / 2.0;
    return x;
}

Path sample_stable_levy(std::size_t n, double alpha, RngStream& rng) {
    if (n < 2) throw DomainError("need at least two increments");
    std::vector<double> inc(n);
    for (double& v : inc) v = sample_stable_increment(alpha, rng);
    Path out;
    out.values = cumsum_from_zero(inc);
    out.dt = 1.0;
    out.process = ProcessKind::levy;
    out.truth["alpha"] = alpha;
    return out;
}

Path add_noise(const Path& p, double sigma_w, RngStream& rng) {
    if (!(sigma_w >= 0.0)) throw DomainError("noise scale must be non-negative");
    Path out = p;
    for (double& v : out.values) v += sigma_w * rng.normal();
    out.truth["noise_sigma"] = sigma_w;
    return out;
}

Path smooth_overlapping(const Path& p, std::size_t window) {
    if (window < 1) throw DomainError("window must be at least 1");
    if (p.size() < window + 1) throw InsufficientData("path too short for the smoothing window");
    Path out = p;
    out.values.assign(p.size() - window + 1, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < window; ++i) acc += p.values[i];
    const double inv_w = 1.0 / static_cast<double>(window);
    out.values[0] = acc * inv_w;
    for (std::size_t i = window; i < p.size(); ++i) {
        acc += p.values[i] - p.values[i - window];
        out.values[i - window + 1] = acc * inv_w;
    }
    out.truth["smooth_window"] = static_cast<double>(window);
    return out;
}

Path smooth_block(const Path& p, std::size_t block) {
    if (block < 1) throw DomainError("block must be at least 1");
    const std::size_t count = p.size() / block;
    if (count < 2) throw InsufficientData("path too short for the block size");
    Path out = p;
    out.values.assign(count, 0.0);
    const double inv_b = 1.0 / static_cast<double>(block);
    for (std::size_t j = 0; j < count; ++j) {
        double acc = 0.0;
        for (std::size_t i = 0; i < block; ++i) acc += p.values[j * block + i];
        out.values[j] = acc * inv_b;
    }
    out.dt = p.dt * static_cast<double>(block);
    out.truth["smooth_block"] = static_cast<double>(block);
    return out;
}

Path sum_with(const Path& p, const Path& other) {
    if (p.size() != other.size()) throw ShapeError("summands must have equal length");
    Path out = p;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += other.values[i];
    out.process = ProcessKind::composite;
    for (const auto& [key, value] : other.truth) out.truth.emplace("rhs_" + key, value);
    return out;
}

Path scale_path(const Path& p, double lambda) {
    check_finite(lambda, "lambda");
    Path out = p;
    for (double& v : out.values) v *= lambda;
    auto it = out.truth.find("transform_scale");
    out.truth["transform_scale"] = (it == out.truth.end() ? lambda : it->second * lambda);
    return out;
}

Path shift_path(const Path& p, double c) {
    check_finite(c, "shift");
    Path out = p;
    for (double& v : out.values) v += c;
    auto it = out.truth.find("transform_shift");
    out.truth["transform_shift"] = (it == out.truth.end() ? c : it->second + c);
    return out;
}

Path add_drift(const Path& p, double mu) {
    check_finite(mu, "drift");
    Path out = p;
    for (std::size_t k = 0; k < out.values.size(); ++k) {
        out.values[k] += mu * static_cast<double>(k) * p.dt;
    }
    auto it = out.truth.find("transform_drift");
    out.truth["transform_drift"] = (it == out.truth.end() ? mu : it->second + mu);
    return out;
}

}
