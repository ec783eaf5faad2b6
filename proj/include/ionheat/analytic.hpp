#pragma once

#include <vector>

#include "ionheat/params.hpp"
#include "ionheat/reservoir.hpp"

// Closed-form dynamics of the damped mode. The normally ordered
// characteristic function of an initial Fock state |k> evolves as
//   chi_t(|l|^2) = exp(-(D(t) + G(t)/2) |l|^2) * L_k(G(t) |l|^2)
// where G(t) = exp(-2 Int_0^t gamma) is the coherence decay factor and D(t)
// solves D' = delta_bar(t) - 2 gamma(t) D, D(0) = 0. Everything observable
// here derives from those two scalars.
namespace ionheat::analytic {

struct EvolutionFunctions {
    double t{0.0};
    double t_gamma{1.0};    // decay factor G(t), dimensionless, in (0, 1]
    double big_delta{0.0};  // accumulated diffusion D(t), dimensionless
};

struct HeatingSample {
    double t{0.0};
    double mean_n{0.0};  // mean occupation <n>(t), dimensionless
};

struct SolveOptions {
    double rel_tol{1e-10};     // ODE tolerance for big_delta
    long max_steps{4000000};
};

struct FockPopulations {
    std::vector<double> p;        // p[m], m = 0 .. m_max
    double clamped{0.0};          // largest negative magnitude clamped to zero
    double quadrature_error{0.0}; // summed absolute error estimate
};

// Closed-form Int_0^t gamma(u) du (elementary exponential-trig integrals).
double gamma_integral(double t, const PhysicalParams& p);

// G(t) = exp(-2 Int_0^t gamma). Monotone non-increasing, G(0) = 1.
double t_gamma_factor(double t, const PhysicalParams& p);

// D(t) by adaptive integration of D' = delta_bar - 2 gamma D. Throws
// StepFailure if the stepper cannot reach t within its budget.
double big_delta(double t, const PhysicalParams& p, const SolveOptions& opt = {});

EvolutionFunctions evolution_functions(double t, const PhysicalParams& p,
                                       const SolveOptions& opt = {});

// One ODE sweep over an ascending grid (grid[0] >= 0).
std::vector<EvolutionFunctions> evolution_grid(const std::vector<double>& t_grid,
                                               const PhysicalParams& p,
                                               const SolveOptions& opt = {});

// Laguerre polynomial L_n(x) by the upward three-term recurrence.
// Guarded to n <= 10000; callers needing more are using the wrong expansion.
double laguerre(long n, double x);

// chi_t at |lambda|^2 = lambda_abs2 for initial state |k>.
double characteristic_function(double lambda_abs2, double t, const InitialCondition& init,
                               const PhysicalParams& p, const SolveOptions& opt = {});

// Same, from precomputed evolution functions (no ODE solve).
double characteristic_function_value(const EvolutionFunctions& ev, double lambda_abs2,
                                     long k);

// Mean occupation <n>(t) = D(t) + (G(t) - 1)/2 + k G(t).
HeatingSample heating_function(double t, const InitialCondition& init,
                               const PhysicalParams& p, const SolveOptions& opt = {});

// Mean occupation on a grid in one sweep.
std::vector<HeatingSample> heating_curve(const std::vector<double>& t_grid,
                                         const InitialCondition& init,
                                         const PhysicalParams& p,
                                         const SolveOptions& opt = {});

// Flat-spectrum damping reference: n(t) = n(omega0)(1 - e^{-Gamma t}) + k e^{-Gamma t}
// with (Gamma, n) from reservoir::markovian_limit.
HeatingSample markovian_heating(double t, long k, const PhysicalParams& p);

// Fock populations p_m(t) = Int_0^inf chi_t(u) e^{-u/2} L_m(u) du, m <= m_max
// (u = rho^2 radial substitution). One panel-marching quadrature pass is shared
// across all m; tol is the absolute tolerance per entry. Throws ToleranceNotMet
// when the pass cannot certify tol, IllConditioned when D + G/2 < 1/4 (the
// integrand then lacks the damping that beats Laguerre growth).
FockPopulations fock_populations(double t, const InitialCondition& init, int m_max,
                                 const PhysicalParams& p, double tol = 1e-9,
                                 const SolveOptions& opt = {});

FockPopulations fock_populations_from(const EvolutionFunctions& ev, long k, int m_max,
                                      double tol = 1e-9);

}  // namespace ionheat::analytic
