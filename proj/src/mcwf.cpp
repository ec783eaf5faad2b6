#include "ionheat/mcwf.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "ionheat/errors.hpp"
#include "ionheat/reservoir.hpp"
#include "ionheat/rng.hpp"

namespace ionheat::mcwf {

namespace {

// The coefficient transient lives on the 1/omega_c scale. Steps are capped
// while it is being resolved; past kAsymptoteTime/omega_c the oscillatory
// parts are e^{-50} ~ 2e-22 of the asymptotes, below double rounding, and the
// rates are treated as exactly constant.
constexpr double kTransientWindow = 10.0;
constexpr double kTransientCap = 0.05;
constexpr double kAsymptoteTime = 50.0;

double clamped(double rate, const char* channel) {
    if (rate >= 0.0) return rate;
    if (rate >= -kRateSlack) return 0.0;
    throw NonLindbladRates(std::string(channel) + " rate " + std::to_string(rate) +
                           " 1/s is negative beyond slack; the jump unraveling "
                           "is undefined for non-Lindblad generators");
}

}  // namespace

double FockStateVector::norm2() const {
    double acc = 0.0;
    for (const auto& c : amp) acc += std::norm(c);
    return acc;
}

double FockStateVector::mean_n() const {
    double acc = 0.0, num = 0.0;
    for (std::size_t n = 0; n < amp.size(); ++n) {
        const double pn = std::norm(amp[n]);
        acc += pn;
        num += double(n) * pn;
    }
    return acc > 0.0 ? num / acc : 0.0;
}

FockStateVector FockStateVector::basis(int dim, long k) {
    if (dim < 2) throw ValidationError("dim", "need at least two Fock levels");
    if (k < 0 || k >= dim)
        throw ValidationError("k", "basis index must lie inside the truncation");
    FockStateVector s;
    s.amp.assign(dim, {0.0, 0.0});
    s.amp[k] = {1.0, 0.0};
    return s;
}

void SimConfig::validate() const {
    if (n_traj < 1) throw ValidationError("n_traj", "need at least one trajectory");
    if (!(dp_max > 0.0) || dp_max > 0.1)
        throw ValidationError("dp_max", "per-step jump probability bound must lie in (0, 0.1]");
    if (!(leak_tol > 0.0) || !(leak_tol < 1.0))
        throw ValidationError("leak_tol", "top-level population bound must lie in (0, 1)");
    if (dim < 0) throw ValidationError("dim", "dimension must be >= 0 (0 = automatic)");
    if (dim != 0 && dim < 2) throw ValidationError("dim", "need at least two Fock levels");
    if (dt_max < 0.0) throw ValidationError("dt_max", "max step must be >= 0 (0 = automatic)");
    if (workers < 0) throw ValidationError("workers", "worker count must be >= 0 (0 = automatic)");
    if (t_grid.empty()) throw ValidationError("t_grid", "need at least one sample time");
    if (t_grid.front() != 0.0) throw ValidationError("t_grid", "grid must start at t = 0");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (!std::isfinite(t_grid[i]))
            throw ValidationError("t_grid", "grid times must be finite");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw ValidationError("t_grid", "grid times must be strictly increasing");
    }
}

RatePair jump_rates(double t, const PhysicalParams& p) {
    auto c = reservoir::tcl_coefficients(t, p);
    return {clamped(c.delta_bar + c.gamma, "lowering"),
            clamped(c.delta_bar - c.gamma, "raising")};
}

RatePair asymptotic_rates(const PhysicalParams& p) {
    const double d = reservoir::delta_bar_asymptote(p);
    const double g = reservoir::gamma_asymptote(p);
    return {clamped(d + g, "lowering"), clamped(d - g, "raising")};
}

double deterministic_step(FockStateVector& state, double t, double dt,
                          const RatePair& rates, double dp_max) {
    if (!(dt >= 0.0)) throw ValidationError("dt", "step must be >= 0");
    if (rates.rate_down < 0.0 || rates.rate_up < 0.0)
        throw NonLindbladRates("no-jump step requires non-negative rates");
    double n2 = 0.0;
    for (int n = 0; n < state.dim(); ++n) {
        const double w = rates.rate_down * n + rates.rate_up * (n + 1);
        state.amp[n] *= std::exp(-0.5 * dt * w);
        n2 += std::norm(state.amp[n]);
    }
    const double dp = 1.0 - n2;
    if (dp > 2.0 * dp_max)
        throw StepTooLarge("no-jump step at t = " + std::to_string(t) +
                           " realized jump probability " + std::to_string(dp) +
                           ", more than twice the policy bound " + std::to_string(dp_max));
    return dp;
}

Channel jump_step(FockStateVector& state, const RatePair& rates, double u,
                  double leak_tol) {
    const int dim = state.dim();
    double n2 = 0.0, num = 0.0;
    for (int n = 0; n < dim; ++n) {
        const double pn = std::norm(state.amp[n]);
        n2 += pn;
        num += double(n) * pn;
    }
    const double wd = rates.rate_down * num;         // proportional to <a'a>
    const double wu = rates.rate_up * (num + n2);    // proportional to <aa'>
    const double w = wd + wu;
    if (!(w > 0.0))
        throw ValidationError("state", "jump requested with zero total jump weight");

    Channel ch = (u * w < wd) ? Channel::down : Channel::up;
    if (ch == Channel::up) {
        const double top = std::norm(state.amp[dim - 1]);
        if (top > leak_tol * n2)
            throw TruncationOverflow("raising jump with top-level population " +
                                     std::to_string(top / n2) +
                                     " above leak tolerance; enlarge dim");
        for (int n = dim - 1; n >= 1; --n)
            state.amp[n] = std::sqrt(double(n)) * state.amp[n - 1];
        state.amp[0] = {0.0, 0.0};
    } else {
        for (int n = 0; n + 1 < dim; ++n)
            state.amp[n] = std::sqrt(double(n + 1)) * state.amp[n + 1];
        state.amp[dim - 1] = {0.0, 0.0};
    }
    const double nn = state.norm2();
    if (!(nn > 0.0))
        throw ValidationError("state", "jump annihilated the state");
    const double inv = 1.0 / std::sqrt(nn);
    for (auto& c : state.amp) c *= inv;
    return ch;
}

int default_dim(const PhysicalParams& p, const InitialCondition& init, double t_max,
                double leak_tol) {
    p.validate();
    init.validate();
    if (!(t_max >= 0.0) || !std::isfinite(t_max))
        throw ValidationError("t_max", "horizon must be finite and >= 0");
    if (!(leak_tol > 0.0) || !(leak_tol < 1.0))
        throw ValidationError("leak_tol", "leak tolerance must lie in (0, 1)");

    // Highest mean occupation reachable within the horizon: relaxation toward
    // the equilibrium value, bounded by the short-time quadratic growth while
    // the window is shorter than the coefficient transient.
    const double x = p.hbar_beta_omega0();
    const double n_eq = 1.0 / x;
    const double Gamma = p.alpha * p.r * p.r / (p.r * p.r + 1.0);
    const double c0 = 0.5 * p.alpha * p.omega_c() / x;
    const double t_early = std::min(t_max, 40.0 / p.omega_c());
    const double growth = double(init.k) + n_eq * (-std::expm1(-Gamma * t_max)) +
                          c0 * t_early * t_early;
    const double n_hor = std::min(n_eq + double(init.k), growth);
    const double n_peak = std::max(double(init.k), n_hor);

    // Geometric-tail bound: beyond level (n+1) ln(1/eps) the occupation
    // probability is below eps; the +6 covers the non-equilibrium shape and
    // keeps the top two levels clean, not just the top one.
    const double margin = std::log(1.0 / leak_tol) + 6.0;
    double d = std::ceil((n_peak + 1.0) * margin + 10.0);
    d = std::max(d, double(init.k) + 8.0);
    if (d > 200000.0)
        throw ValidationError("dim", "derived truncation dimension " +
                                         std::to_string((long)d) +
                                         " is impractical for this horizon; set dim "
                                         "and leak_tol explicitly");
    return std::max(2, int(d));
}

namespace {

struct Resolved {
    SimConfig cfg;       // dim, dt_max, workers filled in
    RatePair frozen;     // long-time channel rates
    double t_const{0.0}; // rates are exactly constant from here on
    double cap_t{0.0};   // transient cap applies below this time
    double cap_dt{0.0};
    bool fock{true};
    bool accel{true};
};

Resolved resolve(const InitialCondition& init, const SimConfig& config,
                 const PhysicalParams& p) {
    p.validate();
    init.validate();
    config.validate();
    Resolved R;
    R.cfg = config;
    if (R.cfg.dim == 0)
        R.cfg.dim = default_dim(p, init, config.t_grid.back(), config.leak_tol);
    if (init.k > R.cfg.dim - 4)
        throw ValidationError("dim", "truncation must exceed the initial Fock index "
                                     "with room for upward jumps");
    if (R.cfg.dt_max == 0.0) R.cfg.dt_max = config.t_grid.back() / 50.0;
    if (R.cfg.workers == 0) {
        unsigned hw = std::thread::hardware_concurrency();
        R.cfg.workers = hw == 0 ? 1 : int(hw);
    }
    R.frozen = asymptotic_rates(p);
    R.t_const = config.freeze_rates ? 0.0 : kAsymptoteTime / p.omega_c();
    R.cap_t = kTransientWindow / p.omega_c();
    R.cap_dt = kTransientCap / p.omega_c();
    R.fock = R.cfg.path != StatePath::vector;
    // The vector path is the reference implementation; it always walks the
    // per-step lattice.
    R.accel = R.cfg.stepping == Stepping::accelerated && R.fock;
    return R;
}

// Rates governing a lattice step over [t, t + dt): frozen value in the
// constant regime, midpoint evaluation while the coefficients still move.
RatePair step_rates(const Resolved& R, const PhysicalParams& p, double t, double dt) {
    if (t >= R.t_const) return R.frozen;
    return jump_rates(t + 0.5 * dt, p);
}

// Step-size policy: bounded by the per-step jump probability at the current
// rates, by the transient cap, by dt_max, and by the segment end.
double policy_dt(const Resolved& R, const PhysicalParams& p, double t, double n_est,
                 double seg_end) {
    double dt = R.cfg.dt_max;
    if (t < R.cap_t) dt = std::min(dt, R.cap_dt);
    const RatePair now = t >= R.t_const ? R.frozen : jump_rates(t, p);
    const double w = now.rate_down * n_est + now.rate_up * (n_est + 1.0);
    if (w > 0.0) dt = std::min(dt, R.cfg.dp_max / w);
    return std::min(dt, seg_end - t);
}

struct TrajCounters {
    long long jd{0}, ju{0};
};

// Fock-level jump with the same channel weights the vector path computes.
void fock_jump(int& n, int top, const RatePair& r, double u, TrajCounters& jc) {
    const double wd = r.rate_down * double(n);
    const double wu = r.rate_up * double(n + 1);
    if (u * (wd + wu) < wd) {
        --n;
        ++jc.jd;
    } else {
        if (n >= top)
            throw TruncationOverflow(
                "raising jump at the truncation edge; enlarge dim");
        ++n;
        ++jc.ju;
    }
}

// Exact event-driven advance through a constant-rate stretch: holding times
// are exponential in the total jump rate, so no lattice is needed and the
// result is independent of the step-size policy.
void advance_constant(const Resolved& R, rng::Stream& rs, double& t, int& n,
                      double target, TrajCounters& jc) {
    const RatePair& r = R.frozen;
    const int top = R.cfg.dim - 1;
    while (t < target) {
        const double w = r.rate_down * double(n) + r.rate_up * double(n + 1);
        if (!(w > 0.0)) {
            t = target;
            return;
        }
        const double hold = -std::log(rs.uniform_pos()) / w;
        if (hold >= target - t) {
            t = target;
            return;
        }
        t += hold;
        fock_jump(n, top, r, rs.uniform(), jc);
    }
}

// One lattice step toward seg_end from time t at level n (or state `sv` on the
// vector path). Returns the updated time. The jump probability is computed as
// 1 - (prod of amplitude factors)^2 in both representations so the two paths
// make bitwise-identical decisions from the same draws.
template <bool kFock>
double lattice_step(const Resolved& R, const PhysicalParams& p, rng::Stream& rs,
                    double t, double seg_end, int& n, FockStateVector* sv,
                    TrajCounters& jc) {
    const double n_est = kFock ? double(n) : sv->mean_n();
    const double dt_want = policy_dt(R, p, t, n_est, seg_end);
    const bool last = (seg_end - t) <= dt_want;
    const double dt = last ? seg_end - t : dt_want;
    const RatePair r = step_rates(R, p, t, dt);

    double dp;
    if (kFock) {
        const double w = r.rate_down * double(n) + r.rate_up * double(n + 1);
        const double f = std::exp(-0.5 * dt * w);
        dp = 1.0 - f * f;
        if (dp > 2.0 * R.cfg.dp_max)
            throw StepTooLarge("no-jump step at t = " + std::to_string(t) +
                               " realized jump probability " + std::to_string(dp) +
                               ", more than twice the policy bound " +
                               std::to_string(R.cfg.dp_max));
    } else {
        dp = deterministic_step(*sv, t, dt, r, R.cfg.dp_max);
    }

    const double u = rs.uniform();
    if (u < dp) {
        // Jump time within the step, conditioned on the jump having fired:
        // inverse CDF of the truncated exponential at the step's implied rate.
        const double v = rs.uniform();
        const double w_imp = dt > 0.0 ? -std::log1p(-dp) / dt : 0.0;
        double tau = w_imp > 0.0 ? -std::log1p(-v * dp) / w_imp : dt;
        if (tau > dt) tau = dt;
        const double u_ch = rs.uniform();
        if (kFock) {
            fock_jump(n, R.cfg.dim - 1, r, u_ch, jc);
        } else {
            Channel ch = jump_step(*sv, r, u_ch, R.cfg.leak_tol);
            (ch == Channel::down ? jc.jd : jc.ju)++;
        }
        return t + tau;
    }
    if (!kFock && dp < 1.0) {
        const double inv = 1.0 / std::sqrt(1.0 - dp);
        for (auto& c : sv->amp) c *= inv;
    }
    return last ? seg_end : t + dt;
}

int vector_level(const FockStateVector& sv) {
    double best = -1.0, total = 0.0;
    int arg = 0;
    for (int m = 0; m < sv.dim(); ++m) {
        const double pm = std::norm(sv.amp[m]);
        total += pm;
        if (pm > best) {
            best = pm;
            arg = m;
        }
    }
    if (!(best > (1.0 - 1e-9) * total))
        throw ValidationError("state", "trajectory state is no longer a Fock level");
    return arg;
}

TrajectoryResult run_one(const Resolved& R, const PhysicalParams& p,
                         const InitialCondition& init, long traj_index) {
    const auto& grid = R.cfg.t_grid;
    TrajectoryResult out;
    out.level.resize(grid.size());
    rng::Stream rs(R.cfg.seed, std::uint64_t(traj_index));
    TrajCounters jc;

    int n = int(init.k);
    FockStateVector sv;
    if (!R.fock) sv = FockStateVector::basis(R.cfg.dim, init.k);

    double t = 0.0;
    out.level[0] = n;  // grid starts at 0 by contract
    for (std::size_t gi = 1; gi < grid.size(); ++gi) {
        const double target = grid[gi];
        while (t < target) {
            if (R.accel && t >= R.t_const) {
                advance_constant(R, rs, t, n, target, jc);
                break;
            }
            const double seg_end = R.accel ? std::min(target, R.t_const) : target;
            if (R.fock)
                t = lattice_step<true>(R, p, rs, t, seg_end, n, nullptr, jc);
            else
                t = lattice_step<false>(R, p, rs, t, seg_end, n, &sv, jc);
        }
        out.level[gi] = R.fock ? n : vector_level(sv);
    }
    out.jumps_down = jc.jd;
    out.jumps_up = jc.ju;
    return out;
}

}  // namespace

TrajectoryResult run_trajectory(const InitialCondition& init, const SimConfig& config,
                                const PhysicalParams& p, long traj_index) {
    if (traj_index < 0) throw ValidationError("traj_index", "trajectory index must be >= 0");
    return run_one(resolve(init, config, p), p, init, traj_index);
}

EnsembleStats ensemble_average(const InitialCondition& init, const SimConfig& config,
                               const PhysicalParams& p) {
    const Resolved R = resolve(init, config, p);
    const auto& grid = R.cfg.t_grid;
    const std::size_t ng = grid.size();
    const int dim = R.cfg.dim;
    const long n_traj = R.cfg.n_traj;
    const int workers = static_cast<int>(std::max<long>(1, std::min<long>(R.cfg.workers, n_traj)));

    struct Partial {
        std::vector<long long> sum_n, sum_n2;
        std::vector<std::uint32_t> hist;  // [grid][level], flattened
        TrajCounters jc;
        long completed{0};
        long aborted{0};
        std::exception_ptr failure;
    };
    std::vector<Partial> parts(workers);
    std::atomic<long> next{0};

    auto work = [&](int wi) {
        Partial& P = parts[wi];
        P.sum_n.assign(ng, 0);
        P.sum_n2.assign(ng, 0);
        P.hist.assign(ng * std::size_t(dim), 0);
        for (;;) {
            const long idx = next.fetch_add(1, std::memory_order_relaxed);
            if (idx >= n_traj) break;
            try {
                TrajectoryResult tr = run_one(R, p, init, idx);
                for (std::size_t g = 0; g < ng; ++g) {
                    const int lv = tr.level[g];
                    P.sum_n[g] += lv;
                    P.sum_n2[g] += (long long)lv * lv;
                    ++P.hist[g * std::size_t(dim) + std::size_t(lv)];
                }
                P.jc.jd += tr.jumps_down;
                P.jc.ju += tr.jumps_up;
                ++P.completed;
            } catch (const TruncationOverflow&) {
                ++P.aborted;
            } catch (...) {
                P.failure = std::current_exception();
                break;
            }
        }
    };

    std::vector<std::thread> pool;
    for (int wi = 1; wi < workers; ++wi) pool.emplace_back(work, wi);
    work(0);
    for (auto& th : pool) th.join();
    for (const auto& P : parts)
        if (P.failure) std::rethrow_exception(P.failure);

    EnsembleStats st;
    st.t = grid;
    st.n_traj = n_traj;
    st.seed = R.cfg.seed;
    st.dim = dim;
    std::vector<long long> sum_n(ng, 0), sum_n2(ng, 0);
    std::vector<std::uint64_t> hist(ng * std::size_t(dim), 0);
    for (const auto& P : parts) {
        st.completed += P.completed;
        st.aborted += P.aborted;
        st.jumps_down += P.jc.jd;
        st.jumps_up += P.jc.ju;
        for (std::size_t g = 0; g < ng; ++g) {
            sum_n[g] += P.sum_n[g];
            sum_n2[g] += P.sum_n2[g];
        }
        for (std::size_t i = 0; i < hist.size(); ++i) hist[i] += P.hist[i];
    }

    if (st.aborted * 1000 > n_traj)
        throw TruncationOverflow(std::to_string(st.aborted) + " of " +
                                 std::to_string(n_traj) +
                                 " trajectories aborted at the truncation edge "
                                 "(> 0.1%); enlarge dim or leak_tol");
    if (st.completed == 0)
        throw TruncationOverflow("no trajectory completed; truncation is inadequate");

    const double M = double(st.completed);
    st.mean_n.resize(ng);
    st.sem.resize(ng);
    st.p.assign(ng, std::vector<double>(dim, 0.0));
    st.p_sem.assign(ng, std::vector<double>(dim, 0.0));
    for (std::size_t g = 0; g < ng; ++g) {
        const double mean = double(sum_n[g]) / M;
        st.mean_n[g] = mean;
        if (st.completed > 1) {
            double var = (double(sum_n2[g]) - double(sum_n[g]) * mean) / (M - 1.0);
            var = std::max(var, 0.0);
            st.sem[g] = std::sqrt(var / M);
        } else {
            st.sem[g] = std::numeric_limits<double>::quiet_NaN();
        }
        for (int m = 0; m < dim; ++m) {
            const double pm = double(hist[g * std::size_t(dim) + std::size_t(m)]) / M;
            st.p[g][m] = pm;
            st.p_sem[g][m] =
                st.completed > 1 ? std::sqrt(pm * (1.0 - pm) / M)
                                 : std::numeric_limits<double>::quiet_NaN();
        }
    }
    return st;
}

}  // namespace ionheat::mcwf
