#pragma once

#include <cstddef>

#include "ionheat/params.hpp"
#include "ionheat/quadrature.hpp"

// Reservoir characterization for a damped trap mode: Lorentzian coupling
// spectrum, thermal kernels, and the time-local master-equation coefficients
// (a diffusion-like rate delta_bar and a damping rate gamma) they induce.
namespace ionheat::reservoir {

// delta_bar and gamma at one time, both in 1/s.
struct CoefficientPair {
    double t{0.0};
    double delta_bar{0.0};
    double gamma{0.0};
};

// Long-time limit expressed as a flat-spectrum damping model:
//   d<n>/dt = -Gamma * <n> + Gamma * N.
// Gamma is the relaxation rate of the mean occupation and N its stationary
// value. n_omega0 is the exact Bose occupation at the trap frequency and
// relative_gap = |N - n_omega0| / n_omega0 (order (hbar beta omega0)^2 / 12
// in the high-temperature regime).
struct MarkovRates {
    double Gamma{0.0};  // 1/s
    double N{0.0};
    double n_omega0{0.0};
    double relative_gap{0.0};
};

struct ValidityReport {
    bool valid{true};
    double eps_tol{kRateSlack};        // 1/s
    double min_sum{0.0};               // min over the grid of delta_bar + gamma
    double t_min_sum{0.0};
    double min_diff{0.0};              // min over the grid of delta_bar - gamma
    double t_min_diff{0.0};
    bool has_violation{false};
    double first_violation_time{0.0};
    std::size_t n_points{0};
};

// Controls for the oscillatory correlation-kernel quadrature.
struct KernelConfig {
    double rel_tol{1e-6};
    int panel_points{15};           // Gauss-Legendre points per half-oscillation
    double omega_max_factor{50.0};  // adaptive head covers factor * the sharpest
                                    // feature scale the half-period panels miss
};

// Normalized coupling weight |g(omega)|^2 = omega_c^2 / (pi (omega^2 + omega_c^2)).
double spectral_density(double omega, const PhysicalParams& p);

// Bose-Einstein occupation 1 / (exp(beta hbar omega) - 1); omega must be > 0.
double thermal_occupation(double omega, const PhysicalParams& p);

// Symmetrized reservoir correlation
//   kappa(tau) = alpha Int_0^inf omega |g|^2 (2 n(omega) + 1) cos(omega tau) domega
// in 1/s^2. Spectral features narrower than a cosine half-period are covered
// by adaptive quadrature; beyond them the integral proceeds panel-by-panel
// between the zeros of the cosine until the alternating-series tail certifies
// rel_tol. Throws DivergentAtZero for tau <= 0 and ToleranceNotMet when the
// tolerance cannot be certified (e.g. omega_c tau >> 1, where the result is an
// exponentially small cancellation).
quad::Result correlation_kernel(double tau, const PhysicalParams& p,
                                const KernelConfig& cfg = {});

// Response kernel mu(tau) = alpha Int omega |g|^2 sin(omega tau) domega,
// which closes to (alpha omega_c^2 / 2) exp(-omega_c tau). tau must be > 0.
double susceptibility_kernel(double tau, const PhysicalParams& p);

// Time-local coefficients
//   delta_bar(t) = alpha/(hbar beta omega0) * r/(r^2+1) *
//                  [E sin(omega0 t) + r (1 - E cos(omega0 t))]
//   gamma(t)     = alpha/2 * r^2/(r^2+1) *
//                  [1 - E cos(omega0 t) - r E sin(omega0 t)]
// with E = exp(-omega_c t). Exact zeros at t = 0.
CoefficientPair tcl_coefficients(double t, const PhysicalParams& p);

// Long-time limits of the pair above.
double delta_bar_asymptote(const PhysicalParams& p);
double gamma_asymptote(const PhysicalParams& p);

// Scans delta_bar +- gamma on a uniform grid over [0, t_max] and reports the
// minima and the first crossing below -eps_tol, if any.
ValidityReport lindblad_validity(const PhysicalParams& p, double t_max,
                                 std::size_t n_points, double eps_tol = kRateSlack);

// Coefficient matching of the long-time generator against the flat-spectrum
// damping model; see MarkovRates.
MarkovRates markovian_limit(const PhysicalParams& p);

}  // namespace ionheat::reservoir
