#include "longmem/errors.hpp"
#include "longmem/fgn.hpp"
#include "longmem/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

using namespace longmem;
using Catch::Approx;

namespace {

double lag_corr(const std::vector<double>& x, std::size_t lag) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + lag < x.size(); ++i) {
        num += (x[i] - mean) * (x[i + lag] - mean);
    }
    for (double v : x) den += (v - mean) * (v - mean);
    return num / den;
}

}

TEST_CASE("fGn autocovariance closed form") {
    CHECK(fgn_autocov(0, 0.3) == 1.0);
    CHECK(fgn_autocov(0, 0.9) == 1.0);

    // White noise: all lags vanish.
    CHECK(fgn_autocov(1, 0.5) == Approx(0.0).margin(1e-15));
    CHECK(fgn_autocov(7, 0.5) == Approx(0.0).margin(1e-15));

    // rho(1) = 2^{2H-1} - 1.
    CHECK(fgn_autocov(1, 0.75) == Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
    CHECK(fgn_autocov(1, 0.7) == Approx(0.3195079107728942).epsilon(1e-14));
    CHECK(fgn_autocov(1, 0.25) == Approx(-0.2928932188134524).epsilon(1e-14));
    CHECK(fgn_autocov(3, 0.8) == Approx(0.3109638517032496).epsilon(1e-13));

    // Persistent for H > 1/2, anti-persistent below.
    CHECK(fgn_autocov(2, 0.8) > 0.0);
    CHECK(fgn_autocov(2, 0.2) < 0.0);
}

TEST_CASE("fGn autocovariance sums telescope to the motion variance") {
    // Var(B_k) = k^{2H} equals the double sum of increment covariances.
    const double H = 0.65;
    const std::size_t k = 7;
    double sum = static_cast<double>(k);
    for (std::size_t l = 1; l < k; ++l) {
        sum += 2.0 * static_cast<double>(k - l) * fgn_autocov(l, H);
    }
    CHECK(sum == Approx(std::pow(7.0, 2.0 * H)).epsilon(1e-12));
}

TEST_CASE("fGn autocovariance rejects hurst outside (0,1)") {
    CHECK_THROWS_AS(fgn_autocov(1, 0.0), DomainError);
    CHECK_THROWS_AS(fgn_autocov(1, 1.0), DomainError);
    CHECK_THROWS_AS(fgn_autocov(1, -0.2), DomainError);
    CHECK_THROWS_AS(fgn_autocov(1, std::nan("")), DomainError);
}

TEST_CASE("circulant spectrum of white noise is flat") {
    auto spec = circulant_spectrum(4, 0.5);
    CHECK(spec->n == 4);
    CHECK(spec->m == 4);
    REQUIRE(spec->eigenvalues.size() == 8);
    for (double ev : spec->eigenvalues) CHECK(ev == Approx(1.0).margin(1e-12));
}

TEST_CASE("circulant spectrum mean equals the lag-zero autocovariance") {
    for (auto [n, h] : {std::pair<std::size_t, double>{100, 0.82}, {37, 0.3}}) {
        auto spec = circulant_spectrum(n, h);
        double mean = 0.0;
        for (double ev : spec->eigenvalues) mean += ev;
        mean /= static_cast<double>(spec->eigenvalues.size());
        CHECK(mean == Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("circulant spectrum matches a naive DFT of the embedded row") {
    const std::size_t n = 8;
    const double H = 0.7;
    auto spec = circulant_spectrum(n, H);
    const std::size_t m = spec->m;
    const std::size_t order = 2 * m;
    REQUIRE(spec->eigenvalues.size() == order);

    std::vector<double> row(order);
    for (std::size_t j = 0; j <= m; ++j) row[j] = fgn_autocov(j, H);
    for (std::size_t j = m + 1; j < order; ++j) row[j] = row[order - j];
    for (std::size_t k = 0; k < order; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < order; ++j) {
            acc += row[j] * std::cos(2.0 * std::numbers::pi * static_cast<double>(j * k) /
                                     static_cast<double>(order));
        }
        CHECK(spec->eigenvalues[k] == Approx(std::max(acc, 0.0)).margin(1e-9));
    }
}

TEST_CASE("circulant spectrum eigenvalues stay non-negative after clamping") {
    for (double h : {0.05, 0.55, 0.95}) {
        auto spec = circulant_spectrum(64, h);
        for (double ev : spec->eigenvalues) CHECK(ev >= 0.0);
    }
}

TEST_CASE("circulant spectrum validates input and caches results") {
    CHECK_THROWS_AS(circulant_spectrum(1, 0.5), DomainError);
    CHECK_THROWS_AS(circulant_spectrum(64, 1.2), DomainError);

    clear_fgn_caches();
    CHECK(spectrum_requests() == 0);
    auto a = circulant_spectrum(64, 0.7);
    auto b = circulant_spectrum(64, 0.7);
    CHECK(a.get() == b.get());  // shared cache entry, not a recomputation
    CHECK(spectrum_requests() == 2);
    CHECK(spectrum_computations() == 1);
    circulant_spectrum(128, 0.7);
    CHECK(spectrum_computations() == 2);
}

TEST_CASE("fGn sampling is deterministic in the stream") {
    RngStream a(11, 4), b(11, 4), c(11, 5);
    auto pa = sample_fgn_pair(256, 0.7, a);
    auto pb = sample_fgn_pair(256, 0.7, b);
    auto pc = sample_fgn_pair(256, 0.7, c);
    CHECK(pa.first.values == pb.first.values);
    CHECK(pa.second.values == pb.second.values);
    CHECK(pa.first.values != pc.first.values);
    CHECK(pa.first.values != pa.second.values);

    CHECK(pa.first.size() == 256);
    CHECK(pa.first.process == ProcessKind::fgn);
    CHECK(pa.first.dt == 1.0);
    CHECK(pa.first.truth.at("hurst") == 0.7);
}

TEST_CASE("fGn sample moments match the theory") {
    RngStream rng(2024, 1);
    auto p = sample_fgn_pair(20000, 0.7, rng).first;
    double mean = 0.0, var = 0.0;
    for (double v : p.values) mean += v;
    mean /= 20000.0;
    for (double v : p.values) var += (v - mean) * (v - mean);
    var /= 20000.0;
    CHECK(mean == Approx(0.0).margin(0.1));
    CHECK(var == Approx(1.0).margin(0.15));
    CHECK(lag_corr(p.values, 1) == Approx(0.3195).margin(0.03));

    RngStream rng2(2024, 2);
    auto w = sample_fgn_pair(20000, 0.5, rng2).first;
    CHECK(lag_corr(w.values, 1) == Approx(0.0).margin(0.025));
}

TEST_CASE("dense sampler reproduces the two-point Cholesky factor") {
    RngStream draws(5, 3);
    const double z0 = draws.normal();
    const double z1 = draws.normal();
    const double rho = fgn_autocov(1, 0.7);

    RngStream rng(5, 3);
    Path p = sample_fgn_cholesky(2, 0.7, rng);
    REQUIRE(p.size() == 2);
    CHECK(p.values[0] == Approx(z0).margin(1e-12));
    CHECK(p.values[1] == Approx(rho * z0 + std::sqrt(1.0 - rho * rho) * z1).margin(1e-12));
}

TEST_CASE("dense sampler caps, caches, and validates") {
    const std::size_t saved = max_cholesky_n();
    set_max_cholesky_n(32);
    RngStream rng(1, 1);
    CHECK_THROWS_AS(sample_fgn_cholesky(33, 0.7, rng), DomainError);
    set_max_cholesky_n(saved);

    CHECK_THROWS_AS(sample_fgn_cholesky(1, 0.7, rng), DomainError);
    CHECK_THROWS_AS(sample_fgn_cholesky(16, 1.5, rng), DomainError);

    clear_fgn_caches();
    sample_fgn_cholesky(16, 0.7, rng);
    sample_fgn_cholesky(16, 0.7, rng);
    CHECK(cholesky_requests() == 2);
    CHECK(cholesky_factorizations() == 1);
}

TEST_CASE("dense sampler matches the target covariance empirically") {
    RngStream rng(77, 1);
    const std::size_t reps = 4000;
    double acc01 = 0.0, acc00 = 0.0;
    for (std::size_t r = 0; r < reps; ++r) {
        Path p = sample_fgn_cholesky(2, 0.8, rng);
        acc01 += p.values[0] * p.values[1];
        acc00 += p.values[0] * p.values[0];
    }
    CHECK(acc00 / reps == Approx(1.0).margin(0.07));
    CHECK(acc01 / reps == Approx(fgn_autocov(1, 0.8)).margin(0.07));
}

TEST_CASE("fgn_to_fbm cumulates and applies the dt^H scale") {
    Path inc;
    inc.values = {1.0, -1.0, 3.0};
    inc.process = ProcessKind::fgn;
    Path out = fgn_to_fbm(inc, 0.5, 4.0);  // scale 4^0.5 = 2
    CHECK(out.values == std::vector<double>{0.0, 2.0, 0.0, 6.0});
    CHECK(out.dt == 4.0);
    CHECK(out.process == ProcessKind::fbm);
    CHECK(out.truth.at("hurst") == 0.5);

    Path wrong = out;
    CHECK_THROWS_AS(fgn_to_fbm(wrong, 0.5, 1.0), DomainError);
    CHECK_THROWS_AS(fgn_to_fbm(inc, 0.5, 0.0), DomainError);
}

TEST_CASE("sample_fbm anchors at zero and scales exactly") {
    RngStream a(9, 2), b(9, 2), c(9, 2);
    Path base = sample_fbm(64, 0.7, 1.0, 0.0, 0.01, a);
    Path scaled = sample_fbm(64, 0.7, 3.0, 0.0, 0.01, b);
    Path drifted = sample_fbm(64, 0.7, 1.0, 2.0, 0.5, c);

    REQUIRE(base.size() == 65);
    CHECK(base.values[0] == 0.0);
    for (std::size_t k = 0; k < base.size(); ++k) {
        CHECK(scaled.values[k] == Approx(3.0 * base.values[k]).margin(1e-12));
    }
    CHECK(base.truth.at("sigma") == 1.0);
    CHECK(base.truth.at("mu") == 0.0);
    CHECK(drifted.truth.at("mu") == 2.0);
    // same noise, different dt: the drift term is mu * k * dt on top of the
    // rescaled motion
    for (std::size_t k = 0; k < drifted.size(); ++k) {
        const double motion = base.values[k] * std::pow(0.5 / 0.01, 0.7);
        CHECK(drifted.values[k] == Approx(motion + 2.0 * static_cast<double>(k) * 0.5)
                                       .margin(1e-9 * (1.0 + std::abs(motion))));
    }

    RngStream r(1, 1);
    CHECK_THROWS_AS(sample_fbm(64, 0.7, 0.0, 0.0, 1.0, r), DomainError);
}

TEST_CASE("FgnSampler replays the underlying pair stream") {
    RngStream direct(42, 7);
    auto pr = sample_fgn_pair(64, 0.7, direct);

    FgnSampler s{RngStream(42, 7)};
    Path a = s.next(64, 0.7);
    Path b = s.next(64, 0.7);
    CHECK(a.values == pr.first.values);   // first draw of the pair
    CHECK(b.values == pr.second.values);  // buffered spare, no new randomness

    // A different request discards the spare and draws a fresh pair.
    Path c = s.next(64, 0.5);
    CHECK(c.values != pr.second.values);
    CHECK(c.truth.at("hurst") == 0.5);
    Path d = s.next(32, 0.5);
    CHECK(d.size() == 32);
}

TEST_CASE("embedding spectra stay usable covariances across the working grid") {
    clear_fgn_caches();
    for (int hi = 1; hi <= 19; ++hi) {
        const double hurst = 0.05 * hi;
        for (std::size_t n : {std::size_t{64}, std::size_t{256}, std::size_t{1024}}) {
            const auto spec = circulant_spectrum(n, hurst);
            double mean = 0.0;
            double min_ev = spec->eigenvalues.front();
            for (double ev : spec->eigenvalues) {
                mean += ev;
                min_ev = std::min(min_ev, ev);
            }
            mean /= static_cast<double>(spec->eigenvalues.size());
            CHECK(min_ev >= 0.0);                       // negatives within policy were clamped
            CHECK(mean == Approx(1.0).margin(1e-9));    // trace identity survives the clamp
        }
    }
    clear_fgn_caches();
}

TEST_CASE("circulant and dense samplers agree in distribution") {
    // Two-sample Kolmogorov-Smirnov on lag-1 sample autocorrelations; the
    // 0.1% critical value for 2000-vs-2000 samples is 1.9495 * sqrt(2/2000).
    constexpr std::size_t n = 256;
    constexpr std::size_t reps = 2000;
    constexpr double hurst = 0.7;
    constexpr double ks_limit = 1.9495 * 0.0316227766016838;

    std::vector<double> a, b;
    a.reserve(reps);
    b.reserve(reps);
    FgnSampler sampler{RngStream(808, 1)};
    RngStream dense(808, 2);
    for (std::size_t r = 0; r < reps; ++r) {
        a.push_back(lag_corr(sampler.next(n, hurst).values, 1));
        b.push_back(lag_corr(sample_fgn_cholesky(n, hurst, dense).values, 1));
    }
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d_stat = 0.0;
    std::size_t i = 0, j = 0;
    while (i < reps && j < reps) {
        if (a[i] <= b[j]) {
            ++i;
        } else {
            ++j;
        }
        d_stat = std::max(d_stat, std::abs(static_cast<double>(i) - static_cast<double>(j)) /
                                      static_cast<double>(reps));
    }
    CHECK(d_stat < ks_limit);
}
