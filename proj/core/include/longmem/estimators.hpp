#pragma once

#include "longmem/path.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace longmem {

enum class EstimatorMethod { rs, variogram, higuchi, whittle_fgn, whittle_arfima, qgv, cnn };

const char* to_string(EstimatorMethod m);
EstimatorMethod estimator_method_from_string(std::string_view s);

// What a method consumes: stationary increments (fGn-like) or the level path.
enum class SeriesForm { increments, levels };
SeriesForm method_input_form(EstimatorMethod m);

struct Estimate {
    double value = 0.0;  // H in [0,1], or d in [-0.5,0.5] for the ARFIMA fit
    EstimatorMethod method = EstimatorMethod::rs;
    std::map<std::string, double> diagnostics;
};

// Rescaled range of one window: cumulative deviations from the window mean,
// range divided by the uncorrected standard deviation.  A window with zero
// variance throws DegenerateWindow.
double rs_statistic(std::span<const double> increments);

struct RsOptions {
    bool anis_lloyd = false;  // subtract the small-sample expectation before fitting
};

// Pooled R/S over dyadic window sizes floor(n / 2^j), smallest size 8;
// slope of log mean R/S against log size.  Needs at least three usable sizes.
Estimate rs_estimate(std::span<const double> increments, RsOptions opt = {});

// Power variogram of the cumulated path at lags 1 and 2:
// gamma_p(t) = mean |X_{i+t} - X_i|^p / 2; H = slope of log gamma against
// log t divided by p.  p = 1 is the madogram default.
Estimate variogram_estimate(std::span<const double> increments, int p = 1);

struct HiguchiOptions {
    // Apply the per-phase segment-count correction when pooling curve
    // lengths; changes the small-sample bias, not the scaling law.
    bool classical_normalization = false;
};

// Curve length at one stride: absolute b-step differences summed over all
// phase offsets, divided by b^2. The classical flag rescales each phase by
// (n-1)/(segments*b), removing the end-remainder loss; without it the raw
// form matches the widespread implementation this suite is calibrated to.
double higuchi_curve_length(std::span<const double> path, std::size_t stride,
                            bool classical_normalization = false);

// Higuchi curve-length slope over strides b = 1..min(10, n/10);
// H = slope + 2 under either normalization.
Estimate higuchi_estimate(std::span<const double> path, HiguchiOptions opt = {});

// Periodogram I(lambda_k) = |sum_t (x_t - mean) e^{-i lambda_k t}|^2 / n at
// the Fourier frequencies lambda_k = 2 pi k / n, k = 1..floor(n/2).
struct Periodogram {
    std::vector<double> freqs;
    std::vector<double> power;
};

Periodogram periodogram(std::span<const double> x);

// Spectral density of unit-variance fGn via the aliasing sum
//   f(lambda) ∝ (1 - cos lambda) * sum_{|j| <= 200} |lambda + 2 pi j|^{-2H-1}.
// The sum is truncated hard at 200 terms; the small truncation bias is part
// of the calibrated behaviour of the Whittle fit.  Unnormalized.
double fgn_spectral_density(double lambda, double hurst);

// Spectral density of ARFIMA(0,d,0): f(lambda) ∝ (2 sin(lambda/2))^{-2d}.
double arfima_spectral_density(double lambda, double d);

enum class WhittleFamily { fgn, arfima };

// Density values on the given frequency grid, scaled so the Riemann sum
// over (0, pi] equals one.
std::vector<double> spectral_density_grid(WhittleFamily family, double theta,
                                          std::span<const double> freqs);

// Whittle fit: minimize log(mean_k I_k / f_theta(lambda_k)) over the family
// parameter by coarse grid search plus golden-section refinement to 1e-5.
// Diagnostics carry the attained objective and a boundary flag.
Estimate whittle_estimate(std::span<const double> x, WhittleFamily family);

// Quadratic generalized variations with the (1, -2, 1) filter at strides 1
// and 2: H = log2(V_2 / V_1) / 2, clipped to [0, 1].
Estimate qgv_estimate(std::span<const double> path);

// Whether Path.values are levels of a motion (fbm, fou, levy, composite) as
// opposed to an already-stationary series (fgn, arfima, ar1).
bool values_are_levels(ProcessKind k);

// The path's data in the representation an estimator consumes, differencing
// or cumulating as needed.
std::vector<double> series_as(SeriesForm form, const Path& p);

// Drops the cached Whittle density tables (kept per series length).
void clear_estimator_caches();

}
