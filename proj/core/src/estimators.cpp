#include "longmem/estimators.hpp"

#include "longmem/errors.hpp"
#include "cache.hpp"
#include "fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>

namespace longmem {

namespace {

constexpr double pi = std::numbers::pi;
constexpr int alias_terms = 200;  // one-sided truncation of the fGn aliasing sum

double ols_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw EstimationFailure("regression abscissae are all equal");
    return sxy / sxx;
}

double clip(double v, double lo, double hi) { return std::min(hi, std::max(lo, v)); }

// Small-sample expectation of the rescaled range (Anis-Lloyd with the
// (s - 1/2)/s correction); the Gamma ratio is replaced by its asymptote
// beyond s = 340 where lgamma differences lose precision.
double expected_rs(std::size_t s) {
    double sum = 0.0;
    for (std::size_t i = 1; i < s; ++i) {
        sum += std::sqrt(static_cast<double>(s - i) / static_cast<double>(i));
    }
    const double sd = static_cast<double>(s);
    double front;
    if (s <= 340) {
        front = std::exp(std::lgamma((sd - 1.0) / 2.0) - std::lgamma(sd / 2.0)) / std::sqrt(pi);
    } else {
        front = 1.0 / std::sqrt(sd * pi / 2.0);
    }
    return (sd - 0.5) / sd * front * sum;
}

std::vector<std::size_t> higuchi_strides(std::size_t n) {
    // Fixed short ladder: past b ~ 10 the log-log points add more noise than
    // signal, and the n/10 rule inflates large-n MSE well beyond the
    // calibration targets.
    std::vector<std::size_t> out;
    const std::size_t bmax = std::min<std::size_t>(10, n / 10);
    for (std::size_t b = 1; b <= bmax; ++b) out.push_back(b);
    return out;
}

}

double higuchi_curve_length(std::span<const double> x, std::size_t b, bool classical) {
    const std::size_t n = x.size();
    if (b == 0) throw DomainError("stride must be positive");
    if (n < b + 1) throw InsufficientData("stride larger than the series");
    double total = 0.0;
    std::size_t phases = 0;
    for (std::size_t m = 0; m < b; ++m) {
        const std::size_t terms = (n - 1 - m) / b;
        if (terms == 0) continue;
        double acc = 0.0;
        for (std::size_t i = 1; i <= terms; ++i) {
            acc += std::abs(x[m + i * b] - x[m + (i - 1) * b]);
        }
        if (classical) {
            acc *= static_cast<double>(n - 1) / (static_cast<double>(terms) * static_cast<double>(b));
        }
        total += acc;
        ++phases;
    }
    if (phases == 0) throw InsufficientData("stride larger than the series");
    return total / (static_cast<double>(b) * static_cast<double>(b));
}

const char* to_string(EstimatorMethod m) {
    switch (m) {
        case EstimatorMethod::rs: return "rs";
        case EstimatorMethod::variogram: return "variogram";
        case EstimatorMethod::higuchi: return "higuchi";
        case EstimatorMethod::whittle_fgn: return "whittle-fgn";
        case EstimatorMethod::whittle_arfima: return "whittle-arfima";
        case EstimatorMethod::qgv: return "qgv";
        case EstimatorMethod::cnn: return "cnn";
    }
    return "unknown";
}

EstimatorMethod estimator_method_from_string(std::string_view s) {
    if (s == "rs") return EstimatorMethod::rs;
    if (s == "variogram" || s == "madogram") return EstimatorMethod::variogram;
    if (s == "higuchi") return EstimatorMethod::higuchi;
    if (s == "whittle-fgn") return EstimatorMethod::whittle_fgn;
    if (s == "whittle-arfima") return EstimatorMethod::whittle_arfima;
    if (s == "qgv") return EstimatorMethod::qgv;
    if (s == "cnn") return EstimatorMethod::cnn;
    throw DomainError("unknown estimator method: " + std::string(s));
}

SeriesForm method_input_form(EstimatorMethod m) {
    switch (m) {
        case EstimatorMethod::rs:
        case EstimatorMethod::variogram:
        case EstimatorMethod::whittle_fgn:
        case EstimatorMethod::whittle_arfima:
            return SeriesForm::increments;
        case EstimatorMethod::higuchi:
        case EstimatorMethod::qgv:
        case EstimatorMethod::cnn:
            return SeriesForm::levels;
    }
    return SeriesForm::increments;
}

double rs_statistic(std::span<const double> increments) {
    const std::size_t n = increments.size();
    if (n < 2) throw InsufficientData("rescaled range needs at least two values");
    double mean = 0.0;
    for (double v : increments) mean += v;
    mean /= static_cast<double>(n);

    double run = 0.0, lo = 0.0, hi = 0.0, ss = 0.0;
    for (double v : increments) {
        const double dev = v - mean;
        run += dev;
        lo = std::min(lo, run);
        hi = std::max(hi, run);
        ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    if (sd == 0.0) throw DegenerateWindow("window has zero variance");
    return (hi - lo) / sd;
}

Estimate rs_estimate(std::span<const double> increments, RsOptions opt) {
    const std::size_t n = increments.size();
    std::vector<double> log_size, log_stat;
    std::size_t windows_used = 0;
    for (std::size_t size = n; size >= 8; size /= 2) {
        const std::size_t count = n / size;
        double acc = 0.0;
        std::size_t used = 0;
        for (std::size_t w = 0; w < count; ++w) {
            try {
                acc += rs_statistic(increments.subspan(w * size, size));
                ++used;
            } catch (const DegenerateWindow&) {
                // flat stretch: drop this window, keep the rest of the size
            }
        }
        if (used == 0) continue;
        windows_used += used;
        double stat = std::log(acc / static_cast<double>(used));
        if (opt.anis_lloyd) stat -= std::log(expected_rs(size));
        log_size.push_back(std::log(static_cast<double>(size)));
        log_stat.push_back(stat);
    }
    if (log_size.size() < 3) {
        throw InsufficientData("rescaled range needs at least three window sizes");
    }
    const double slope = ols_slope(log_size, log_stat);

    Estimate est;
    est.method = EstimatorMethod::rs;
    est.value = clip(opt.anis_lloyd ? 0.5 + slope : slope, 0.0, 1.0);
    est.diagnostics["sizes"] = static_cast<double>(log_size.size());
    est.diagnostics["windows"] = static_cast<double>(windows_used);
    est.diagnostics["anis_lloyd"] = opt.anis_lloyd ? 1.0 : 0.0;
    return est;
}

Estimate variogram_estimate(std::span<const double> increments, int p) {
    if (p < 1) throw DomainError("variogram power must be a positive integer");
    if (increments.size() < 8) throw InsufficientData("variogram needs at least eight increments");
    const std::vector<double> path = cumsum_from_zero(increments);

    std::vector<double> log_lag, log_gamma;
    for (std::size_t lag = 1; lag <= 2; ++lag) {
        double acc = 0.0;
        const std::size_t pairs = path.size() - lag;
        for (std::size_t i = 0; i < pairs; ++i) {
            acc += std::pow(std::abs(path[i + lag] - path[i]), p);
        }
        const double gamma = 0.5 * acc / static_cast<double>(pairs);
        if (gamma == 0.0) throw DegenerateWindow("variogram vanished at some lag");
        if (!std::isfinite(gamma)) throw EstimationFailure("variogram overflowed");
        log_lag.push_back(std::log(static_cast<double>(lag)));
        log_gamma.push_back(std::log(gamma));
    }
    Estimate est;
    est.method = EstimatorMethod::variogram;
    est.value = clip(ols_slope(log_lag, log_gamma) / static_cast<double>(p), 0.0, 1.0);
    est.diagnostics["p"] = static_cast<double>(p);
    return est;
}

Estimate higuchi_estimate(std::span<const double> path, HiguchiOptions opt) {
    const std::vector<std::size_t> strides = higuchi_strides(path.size());
    if (strides.size() < 2) {
        throw InsufficientData("series too short for at least two curve-length strides");
    }
    std::vector<double> log_b, log_len;
    for (std::size_t b : strides) {
        const double len = higuchi_curve_length(path, b, opt.classical_normalization);
        if (len <= 0.0) throw InsufficientData("zero curve length; series has no variation");
        log_b.push_back(std::log(static_cast<double>(b)));
        log_len.push_back(std::log(len));
    }
    const double slope = ols_slope(log_b, log_len);

    Estimate est;
    est.method = EstimatorMethod::higuchi;
    est.value = clip(slope + 2.0, 0.0, 1.0);
    est.diagnostics["strides"] = static_cast<double>(strides.size());
    est.diagnostics["classical"] = opt.classical_normalization ? 1.0 : 0.0;
    return est;
}

Periodogram periodogram(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw InsufficientData("periodogram needs at least two samples");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    std::vector<std::complex<double>> buf(n);
    for (std::size_t t = 0; t < n; ++t) buf[t] = x[t] - mean;
    detail::fft(buf.data(), n, false);

    Periodogram out;
    const std::size_t m = n / 2;
    out.freqs.resize(m);
    out.power.resize(m);
    for (std::size_t k = 1; k <= m; ++k) {
        out.freqs[k - 1] = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
        out.power[k - 1] = std::norm(buf[k]) / static_cast<double>(n);
    }
    return out;
}

double fgn_spectral_density(double lambda, double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("hurst must lie strictly between 0 and 1");
    if (!(lambda > 0.0 && lambda <= pi)) throw DomainError("lambda must lie in (0, pi]");
    const double s = 2.0 * hurst + 1.0;
    double acc = std::pow(lambda, -s);
    for (int j = 1; j <= alias_terms; ++j) {
        acc += std::pow(2.0 * pi * j + lambda, -s) + std::pow(2.0 * pi * j - lambda, -s);
    }
    return (1.0 - std::cos(lambda)) * acc;
}

double arfima_spectral_density(double lambda, double d) {
    if (!(d > -0.5 && d < 0.5)) throw DomainError("d must lie strictly between -0.5 and 0.5");
    if (!(lambda > 0.0 && lambda <= pi)) throw DomainError("lambda must lie in (0, pi]");
    return std::pow(2.0 * std::sin(lambda / 2.0), -2.0 * d);
}

std::vector<double> spectral_density_grid(WhittleFamily family, double theta,
                                          std::span<const double> freqs) {
    if (freqs.empty()) throw InsufficientData("empty frequency grid");
    std::vector<double> f(freqs.size());
    for (std::size_t k = 0; k < freqs.size(); ++k) {
        f[k] = family == WhittleFamily::fgn ? fgn_spectral_density(freqs[k], theta)
                                            : arfima_spectral_density(freqs[k], theta);
    }
    const double step = freqs[0];
    const double mass = std::accumulate(f.begin(), f.end(), 0.0) * step;
    for (double& v : f) v /= mass;
    return f;
}

namespace {

// Per-length scaffolding for the Whittle fit: frequency grid, log tables for
// fast density evaluation, and the inverse normalized densities on the coarse
// parameter grid (path independent, so shared across fits).
struct WhittleTables {
    std::vector<double> freqs;
    std::vector<double> one_minus_cos;  // fgn only
    std::vector<double> logs;           // fgn: per freq, 2*alias_terms+1 logs
    std::vector<double> log_gain;       // arfima: log(2 sin(lambda/2)) per freq
    std::vector<double> coarse_theta;
    std::vector<double> coarse_inv_f;   // coarse_theta.size() x freqs  (1 / normalized f)
};

struct TablesKey {
    std::size_t n;
    int family;

    auto operator<=>(const TablesKey&) const = default;
};

detail::LruCache<TablesKey, WhittleTables>& whittle_cache() {
    static detail::LruCache<TablesKey, WhittleTables> cache(8);
    return cache;
}

constexpr std::size_t fgn_row_len = 2 * alias_terms + 1;

// Unnormalized density over all frequencies for one parameter value, using
// the precomputed logs; also returns the Riemann normalizer.
void raw_density(const WhittleTables& t, WhittleFamily family, double theta,
                 std::vector<double>& out, double& mass) {
    const std::size_t m = t.freqs.size();
    out.resize(m);
    double acc_mass = 0.0;
    if (family == WhittleFamily::fgn) {
        const double s = 2.0 * theta + 1.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double* row = t.logs.data() + k * fgn_row_len;
            double acc = 0.0;
            for (std::size_t j = 0; j < fgn_row_len; ++j) acc += std::exp(-s * row[j]);
            out[k] = t.one_minus_cos[k] * acc;
            acc_mass += out[k];
        }
    } else {
        const double e = -2.0 * theta;
        for (std::size_t k = 0; k < m; ++k) {
            out[k] = std::exp(e * t.log_gain[k]);
            acc_mass += out[k];
        }
    }
    mass = acc_mass * t.freqs[0];
}

std::shared_ptr<const WhittleTables> build_tables(std::size_t n, WhittleFamily family) {
    auto t = std::make_shared<WhittleTables>();
    const std::size_t m = n / 2;
    t->freqs.resize(m);
    for (std::size_t k = 1; k <= m; ++k) {
        t->freqs[k - 1] = 2.0 * pi * static_cast<double>(k) / static_cast<double>(n);
    }
    if (family == WhittleFamily::fgn) {
        t->one_minus_cos.resize(m);
        t->logs.resize(m * fgn_row_len);
        for (std::size_t k = 0; k < m; ++k) {
            const double lam = t->freqs[k];
            t->one_minus_cos[k] = 1.0 - std::cos(lam);
            double* row = t->logs.data() + k * fgn_row_len;
            row[0] = std::log(lam);
            for (int j = 1; j <= alias_terms; ++j) {
                row[2 * j - 1] = std::log(2.0 * pi * j + lam);
                row[2 * j] = std::log(2.0 * pi * j - lam);
            }
        }
        for (int i = 1; i <= 99; ++i) t->coarse_theta.push_back(0.01 * i);
    } else {
        t->log_gain.resize(m);
        for (std::size_t k = 0; k < m; ++k) {
            t->log_gain[k] = std::log(2.0 * std::sin(t->freqs[k] / 2.0));
        }
        for (int i = -49; i <= 49; ++i) t->coarse_theta.push_back(0.01 * i);
    }
    t->coarse_inv_f.resize(t->coarse_theta.size() * m);
    std::vector<double> raw;
    for (std::size_t i = 0; i < t->coarse_theta.size(); ++i) {
        double mass = 0.0;
        raw_density(*t, family, t->coarse_theta[i], raw, mass);
        // Normalize to unit geometric mean: log(mean I/f) is then the exact
        // profile objective with the innovation variance concentrated out.
        double log_norm = 0.0;
        for (std::size_t k = 0; k < m; ++k) log_norm += std::log(raw[k]);
        const double norm = std::exp(log_norm / static_cast<double>(m));
        for (std::size_t k = 0; k < m; ++k) t->coarse_inv_f[i * m + k] = norm / raw[k];
    }
    return t;
}

std::shared_ptr<const WhittleTables> tables_for(std::size_t n, WhittleFamily family) {
    if (n > 2 * 8192) return build_tables(n, family);  // too big to keep around
    const TablesKey key{n, static_cast<int>(family)};
    return whittle_cache().get(key, [&] { return build_tables(n, family); });
}

}

Estimate whittle_estimate(std::span<const double> x, WhittleFamily family) {
    if (x.size() < 16) throw InsufficientData("whittle fit needs at least sixteen samples");
    const Periodogram pg = periodogram(x);
    double total_power = 0.0;
    for (double v : pg.power) total_power += v;
    if (total_power == 0.0) throw DegenerateWindow("flat series has an empty spectrum");

    auto tables = tables_for(x.size(), family);
    const std::size_t m = pg.power.size();

    const auto objective_exact = [&](double theta) {
        std::vector<double> raw;
        double mass = 0.0;
        raw_density(*tables, family, theta, raw, mass);
        double ratio = 0.0;
        double log_norm = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            ratio += pg.power[k] / raw[k];
            log_norm += std::log(raw[k]);
        }
        // log mean(I/f) with f scaled to unit geometric mean; equals the
        // profile Whittle objective log mean(I/g) + mean log g.
        return std::log(ratio / static_cast<double>(m)) + log_norm / static_cast<double>(m);
    };

    // Coarse pass over the precomputed grid.
    const std::size_t grid_n = tables->coarse_theta.size();
    std::size_t best = 0;
    double best_q = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_n; ++i) {
        const double* inv = tables->coarse_inv_f.data() + i * m;
        double ratio = 0.0;
        for (std::size_t k = 0; k < m; ++k) ratio += pg.power[k] * inv[k];
        const double q = std::log(ratio / static_cast<double>(m));
        if (q < best_q) {
            best_q = q;
            best = i;
        }
    }
    const bool boundary = best == 0 || best + 1 == grid_n;
    double a = tables->coarse_theta[best == 0 ? 0 : best - 1];
    double b = tables->coarse_theta[best + 1 >= grid_n ? grid_n - 1 : best + 1];

    // Golden-section refinement of the bracket down to 1e-5.
    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = objective_exact(c);
    double fd = objective_exact(d);
    std::size_t iterations = 2;
    while (b - a > 1e-5) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective_exact(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective_exact(d);
        }
        ++iterations;
    }
    const double theta_hat = 0.5 * (a + b);

    Estimate est;
    est.method = family == WhittleFamily::fgn ? EstimatorMethod::whittle_fgn
                                              : EstimatorMethod::whittle_arfima;
    est.value = family == WhittleFamily::fgn ? clip(theta_hat, 0.0, 1.0)
                                             : clip(theta_hat, -0.5, 0.5);
    est.diagnostics["objective"] = objective_exact(theta_hat);
    est.diagnostics["iterations"] = static_cast<double>(iterations);
    est.diagnostics["boundary"] = boundary ? 1.0 : 0.0;
    return est;
}

Estimate qgv_estimate(std::span<const double> path) {
    const std::size_t n = path.size();
    if (n < 6) throw InsufficientData("generalized variations need at least six values");
    double v1 = 0.0, v2 = 0.0;
    for (std::size_t t = 0; t + 2 < n; ++t) {
        const double f = path[t] - 2.0 * path[t + 1] + path[t + 2];
        v1 += f * f;
    }
    v1 /= static_cast<double>(n - 2);
    for (std::size_t t = 0; t + 4 < n; ++t) {
        const double f = path[t] - 2.0 * path[t + 2] + path[t + 4];
        v2 += f * f;
    }
    v2 /= static_cast<double>(n - 4);
    if (v1 == 0.0 || v2 == 0.0) {
        throw DegenerateWindow("second-difference variation vanished");
    }
    Estimate est;
    est.method = EstimatorMethod::qgv;
    est.value = clip(0.5 * std::log2(v2 / v1), 0.0, 1.0);
    est.diagnostics["v1"] = v1;
    est.diagnostics["v2"] = v2;
    return est;
}

bool values_are_levels(ProcessKind k) {
    switch (k) {
        case ProcessKind::fbm:
        case ProcessKind::fou:
        case ProcessKind::levy:
        case ProcessKind::composite:
            return true;
        case ProcessKind::fgn:
        case ProcessKind::arfima:
        case ProcessKind::ar1:
            return false;
    }
    return false;
}

std::vector<double> series_as(SeriesForm form, const Path& p) {
    const bool levels = values_are_levels(p.process);
    if (form == SeriesForm::increments) {
        return levels ? diff(p.values) : p.values;
    }
    return levels ? p.values : cumsum_from_zero(p.values);
}

void clear_estimator_caches() { whittle_cache().clear(); }

}
