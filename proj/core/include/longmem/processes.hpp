#pragma once

#include "longmem/fgn.hpp"
#include "longmem/path.hpp"
#include "longmem/rng.hpp"

#include <cstddef>
#include <vector>

namespace longmem {

// Moving-average weights of ARFIMA(0,d,0): psi_0 = 1,
// psi_k = psi_{k-1} * (k - 1 + d) / k, equal to Gamma(k+d)/(Gamma(k+1)Gamma(d)).
struct ArfimaCoeffs {
    double d = 0.0;
    std::vector<double> psi;  // psi[0..K]

    std::size_t truncation() const { return psi.size() - 1; }
};

ArfimaCoeffs arfima_ma_coeffs(double d, std::size_t truncation);

// Stationary ARFIMA(0,d,0) series of length n with unit-variance Gaussian
// innovations, built from the truncated moving average with
// K = max(n + burn_in, 10 n) and the first burn_in samples discarded.
Path sample_arfima(std::size_t n, double d, RngStream& rng);
Path sample_arfima(std::size_t n, double d, RngStream& rng, std::size_t burn_in);

// Fractional Ornstein-Uhlenbeck observed on an equidistant grid.
struct FouParams {
    double eta = 0.0;    // starting value
    double hurst = 0.5;
    double alpha = 0.0;  // mean-reversion speed
    double mu = 0.0;     // long-run level
    double sigma = 1.0;  // volatility scale
    double dt = 0.01;    // grid step

    void validate() const;
};

// Euler scheme with n steps on t_k = k * dt:
//   Y_{k+1} = Y_k - alpha (Y_k - mu) dt + sigma dt^H G_k,  Y_0 = eta,
// where G is an fGn draw.  Output has n+1 values.  Requires alpha * dt < 1,
// otherwise StabilityError.
Path sample_fou(const FouParams& params, std::size_t n, RngStream& rng);

// AR(1) driven by the given innovations: X_0 = w_0, X_t = a X_{t-1} + w_t.
Path ar1_from_noise(std::span<const double> innovations, double a);

// AR(1) of length n with unit-variance Gaussian innovations.  |a| may exceed
// one; callers probing the explosive regime own the consequences.
Path sample_ar1(std::size_t n, double a, RngStream& rng);

// One draw from the symmetric alpha-stable law (Chambers-Mallows-Stuck),
// unit scale; the Gaussian endpoint alpha = 2 is normalized to unit variance.
double sample_stable_increment(double alpha, RngStream& rng);

// Symmetric alpha-stable Levy motion: running sum of n iid stable increments,
// anchored at zero (n+1 values).  alpha in (0, 2].
Path sample_stable_levy(std::size_t n, double alpha, RngStream& rng);

// Transforms.  Each returns a new path; the input's truth record is carried
// over and a field describing the transform is appended.
Path add_noise(const Path& p, double sigma_w, RngStream& rng);
Path smooth_overlapping(const Path& p, std::size_t window);  // stride-1 moving average
Path smooth_block(const Path& p, std::size_t block);         // disjoint block means
Path sum_with(const Path& p, const Path& other);
Path scale_path(const Path& p, double lambda);
Path shift_path(const Path& p, double c);
Path add_drift(const Path& p, double mu);                    // += mu * k * dt

}
