#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "ionheat/params.hpp"

// Monte Carlo wave-function (quantum jump) engine for the damped mode.
// Two dissipation channels act on the truncated Fock space: lowering at rate
// rate_down(t) and raising at rate_up(t). There is no coherent term, so the
// no-jump evolution is diagonal in the Fock basis; a trajectory that starts
// in a Fock state stays in one, and the integer fast path exploits that.
// The vector path runs the textbook amplitude algorithm and exists to verify
// the fast path against it.
namespace ionheat::mcwf {

struct RatePair {
    double rate_down{0.0};  // channel a, 1/s
    double rate_up{0.0};    // channel a-dagger, 1/s
};

struct FockStateVector {
    std::vector<std::complex<double>> amp;  // amplitudes over levels 0..dim-1

    int dim() const { return static_cast<int>(amp.size()); }
    double norm2() const;
    double mean_n() const;

    static FockStateVector basis(int dim, long k);
};

enum class Channel { none, down, up };

// Which trajectory representation to use. `automatic` picks the integer fast
// path (valid because the generator never creates superpositions here).
enum class StatePath { automatic, fock, vector };

// `accelerated` samples exact exponential holding times wherever the rates
// are constant (frozen, or past the coefficient transient) and falls back to
// the per-step lattice only while the rates vary. `per_step` runs the
// Bernoulli-lattice algorithm everywhere; it is the reference scheme the
// accelerated path is tested against.
enum class Stepping { accelerated, per_step };

struct SimConfig {
    int dim{0};                  // Fock truncation; 0 = derive from the horizon
    long n_traj{10000};
    std::uint64_t seed{1};
    std::vector<double> t_grid;  // sample times, starting at 0, strictly increasing
    double dp_max{1e-2};         // max jump probability per lattice step, in (0, 0.1]
    double dt_max{0.0};          // max lattice step; 0 = t_grid span / 50
    double leak_tol{1e-6};       // max tolerated top-level population
    int workers{0};              // 0 = hardware concurrency
    bool freeze_rates{false};    // hold both rates at their long-time values from t = 0
    StatePath path{StatePath::automatic};
    Stepping stepping{Stepping::accelerated};

    void validate() const;
};

struct TrajectoryResult {
    std::vector<int> level;      // Fock level at each grid time
    long long jumps_down{0};
    long long jumps_up{0};
};

struct EnsembleStats {
    std::vector<double> t;
    std::vector<double> mean_n;
    std::vector<double> sem;              // sample std dev / sqrt(completed)
    std::vector<std::vector<double>> p;      // [grid][level] occupation histogram
    std::vector<std::vector<double>> p_sem;  // binomial per-bin standard error
    long n_traj{0};
    long completed{0};
    long aborted{0};     // trajectories lost to truncation overflow
    std::uint64_t seed{0};
    int dim{0};
    long long jumps_down{0};
    long long jumps_up{0};
};

// Instantaneous channel rates (delta_bar + gamma, delta_bar - gamma). Values
// in [-rate slack, 0) are rounding noise and clamp to zero; anything lower
// throws NonLindbladRates.
RatePair jump_rates(double t, const PhysicalParams& p);

// Long-time limit of jump_rates; also the frozen-rate override. Equal to
// (Gamma(N+1), Gamma N) from the flat-spectrum limit.
RatePair asymptotic_rates(const PhysicalParams& p);

// One no-jump lattice step: multiplies amplitude c_n by
// exp(-dt/2 (rate_down n + rate_up (n+1))), rates supplied by the caller at
// the step midpoint. Returns the total jump probability 1 - |state|^2 without
// renormalizing. Throws StepTooLarge if that exceeds 2 * dp_max; t only
// labels the error message.
double deterministic_step(FockStateVector& state, double t, double dt,
                          const RatePair& rates, double dp_max);

// Applies one jump: channel a with probability rate_down <n> / w, else
// a-dagger, selected by the uniform draw u; renormalizes. Throws
// TruncationOverflow if a-dagger is selected while the top level holds more
// than leak_tol population.
Channel jump_step(FockStateVector& state, const RatePair& rates, double u,
                  double leak_tol);

// Truncation dimension that keeps the thermal tail of every state reached
// within [0, t_max] below leak_tol, with margin for the top-two-level check.
int default_dim(const PhysicalParams& p, const InitialCondition& init, double t_max,
                double leak_tol);

// One trajectory, fully determined by (config.seed, traj_index). The grid
// record is the Fock level at each sample time.
TrajectoryResult run_trajectory(const InitialCondition& init, const SimConfig& config,
                                const PhysicalParams& p, long traj_index);

// Averages n_traj trajectories; the reduction is integer-based, so the result
// is identical for any worker count. Fails if more than 0.1% of trajectories
// abort on truncation overflow.
EnsembleStats ensemble_average(const InitialCondition& init, const SimConfig& config,
                               const PhysicalParams& p);

}  // namespace ionheat::mcwf
