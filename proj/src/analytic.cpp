#include "ionheat/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ionheat/errors.hpp"
#include "ionheat/ode.hpp"
#include "ionheat/quadrature.hpp"
#include "ionheat/reservoir.hpp"

namespace ionheat::analytic {

namespace {

// Damped Laguerre value e^{-x/2} L_j(x), bounded by 1 for x >= 0. The
// exponential prefactor passes through the three-term recurrence unchanged,
// so this never overflows where the bare polynomial would.
double damped_laguerre(long n, double x) {
    double m0 = std::exp(-0.5 * x);
    if (n == 0) return m0;
    double m1 = (1.0 - x) * m0;
    for (long j = 1; j < n; ++j) {
        double m2 = ((2.0 * j + 1.0 - x) * m1 - double(j) * m0) / double(j + 1);
        m0 = m1;
        m1 = m2;
    }
    return m1;
}

double mean_occupation(const EvolutionFunctions& ev, long k) {
    return ev.big_delta + 0.5 * (ev.t_gamma - 1.0) + double(k) * ev.t_gamma;
}

ode::Options ode_options(const SolveOptions& opt, double span, double omega_c) {
    ode::Options o;
    o.rel_tol = opt.rel_tol;
    o.max_steps = opt.max_steps;
    // Start inside the coefficient transient so the first accepted step sees
    // the oscillation; the stepper grows out of it geometrically.
    if (span > 0.0) o.h_init = std::min(span, 0.02 / omega_c);
    return o;
}

void check_time(double t) {
    if (!(t >= 0.0) || !std::isfinite(t))
        throw ValidationError("t", "time must be finite and >= 0");
}

}  // namespace

double gamma_integral(double t, const PhysicalParams& p) {
    check_time(t);
    if (t == 0.0) return 0.0;
    const double w0 = p.omega0;
    const double wc = p.omega_c();
    const double denom = wc * wc + w0 * w0;
    const double E = std::exp(-wc * t);
    const double s = std::sin(w0 * t);
    const double c = std::cos(w0 * t);
    // Antiderivatives of e^{-wc u} cos(w0 u) and e^{-wc u} sin(w0 u) over [0, t].
    const double A = (wc + E * (w0 * s - wc * c)) / denom;
    const double B = (w0 - E * (wc * s + w0 * c)) / denom;
    return reservoir::gamma_asymptote(p) * (t - A - p.r * B);
}

double t_gamma_factor(double t, const PhysicalParams& p) {
    return std::exp(-2.0 * gamma_integral(t, p));
}

double big_delta(double t, const PhysicalParams& p, const SolveOptions& opt) {
    p.validate();
    check_time(t);
    if (t == 0.0) return 0.0;
    auto rhs = [&p](double u, double y) {
        auto c = reservoir::tcl_coefficients(u, p);
        return c.delta_bar - 2.0 * c.gamma * y;
    };
    return ode::integrate(rhs, 0.0, 0.0, t, ode_options(opt, t, p.omega_c()));
}

EvolutionFunctions evolution_functions(double t, const PhysicalParams& p,
                                       const SolveOptions& opt) {
    return {t, t_gamma_factor(t, p), big_delta(t, p, opt)};
}

std::vector<EvolutionFunctions> evolution_grid(const std::vector<double>& t_grid,
                                               const PhysicalParams& p,
                                               const SolveOptions& opt) {
    p.validate();
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        check_time(t_grid[i]);
        if (i > 0 && t_grid[i] < t_grid[i - 1])
            throw ValidationError("t_grid", "grid must be non-decreasing");
    }
    auto rhs = [&p](double u, double y) {
        auto c = reservoir::tcl_coefficients(u, p);
        return c.delta_bar - 2.0 * c.gamma * y;
    };
    const double span = t_grid.empty() ? 0.0 : t_grid.back();
    std::vector<double> deltas =
        ode::integrate_grid(rhs, 0.0, 0.0, t_grid, ode_options(opt, span, p.omega_c()));
    std::vector<EvolutionFunctions> out(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i)
        out[i] = {t_grid[i], t_gamma_factor(t_grid[i], p), deltas[i]};
    return out;
}

double laguerre(long n, double x) {
    if (n < 0) throw ValidationError("n", "Laguerre order must be >= 0");
    if (n > 10000)
        throw ValidationError("n", "Laguerre order capped at 10000; higher orders "
                                   "lose accuracy in the recurrence");
    if (n == 0) return 1.0;
    double p0 = 1.0;
    double p1 = 1.0 - x;
    for (long j = 1; j < n; ++j) {
        double p2 = ((2.0 * j + 1.0 - x) * p1 - double(j) * p0) / double(j + 1);
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double characteristic_function_value(const EvolutionFunctions& ev, double lambda_abs2,
                                     long k) {
    if (!(lambda_abs2 >= 0.0))
        throw ValidationError("lambda_abs2", "|lambda|^2 must be >= 0");
    if (k < 0) throw ValidationError("k", "Fock index must be >= 0");
    if (k > 10000) throw ValidationError("k", "Fock index capped at 10000");
    // exp(-(D + G/2) u) L_k(G u) regrouped as exp(-D u) * [e^{-Gu/2} L_k(Gu)]
    // so neither factor can overflow.
    return std::exp(-ev.big_delta * lambda_abs2) *
           damped_laguerre(k, ev.t_gamma * lambda_abs2);
}

double characteristic_function(double lambda_abs2, double t, const InitialCondition& init,
                               const PhysicalParams& p, const SolveOptions& opt) {
    init.validate();
    return characteristic_function_value(evolution_functions(t, p, opt), lambda_abs2,
                                         init.k);
}

HeatingSample heating_function(double t, const InitialCondition& init,
                               const PhysicalParams& p, const SolveOptions& opt) {
    init.validate();
    return {t, mean_occupation(evolution_functions(t, p, opt), init.k)};
}

std::vector<HeatingSample> heating_curve(const std::vector<double>& t_grid,
                                         const InitialCondition& init,
                                         const PhysicalParams& p,
                                         const SolveOptions& opt) {
    init.validate();
    auto evs = evolution_grid(t_grid, p, opt);
    std::vector<HeatingSample> out(evs.size());
    for (std::size_t i = 0; i < evs.size(); ++i)
        out[i] = {evs[i].t, mean_occupation(evs[i], init.k)};
    return out;
}

HeatingSample markovian_heating(double t, long k, const PhysicalParams& p) {
    check_time(t);
    if (k < 0) throw ValidationError("k", "Fock index must be >= 0");
    auto rates = reservoir::markovian_limit(p);
    const double decay = std::exp(-rates.Gamma * t);
    return {t, rates.n_omega0 * (-std::expm1(-rates.Gamma * t)) + double(k) * decay};
}

FockPopulations fock_populations_from(const EvolutionFunctions& ev, long k, int m_max,
                                      double tol) {
    if (k < 0) throw ValidationError("k", "Fock index must be >= 0");
    if (m_max < k)
        throw ValidationError("m_max", "population cutoff must cover the initial index");
    if (m_max > 10000) throw ValidationError("m_max", "population cutoff capped at 10000");
    if (!(tol > 0.0)) throw ValidationError("tol", "tolerance must be positive");
    const double G = ev.t_gamma;
    const double D = ev.big_delta;
    if (!(G > 0.0) || !(D >= 0.0))
        throw ValidationError("evolution", "need t_gamma > 0 and big_delta >= 0");
    if (D + 0.5 * G < 0.25)
        throw IllConditioned("fock populations: exponential damping " +
                             std::to_string(D + 0.5 * G) +
                             " is below 1/4; the radial integral would not converge "
                             "against the Laguerre envelope");

    // All integrands share the form e^{-D u} * [e^{-Gu/2} L_k(Gu)] * [e^{-u/2} L_m(u)],
    // every bracket bounded by 1. The slowest oscillation scale is set by the
    // largest Laguerre degree in play.
    const double K_eff = std::max(4.0 * double(m_max) + 2.0, G * (4.0 * double(k) + 2.0));
    const quad::Rule& fine = quad::gauss_legendre(16);
    const quad::Rule& coarse = quad::gauss_legendre(8);

    const int n = m_max + 1;
    std::vector<double> value(n), errsum(n), pf(n), pc(n);

    // Adds w * f(u) to every component of acc, where f_m(u) is the integrand
    // above; one recurrence sweep serves all m.
    auto accumulate = [&](double u, double w, std::vector<double>& acc) {
        const double f = std::exp(-D * u) * damped_laguerre(k, G * u);
        if (f == 0.0) return;
        double m0 = std::exp(-0.5 * u);
        acc[0] += w * f * m0;
        if (m_max < 1) return;
        double m1 = (1.0 - u) * m0;
        acc[1] += w * f * m1;
        for (int j = 1; j < m_max; ++j) {
            double m2 = ((2.0 * j + 1.0 - u) * m1 - double(j) * m0) / double(j + 1);
            m0 = m1;
            m1 = m2;
            acc[j + 1] += w * f * m2;
        }
    };

    double tail_at_stop = 0.0;
    double width_scale = 1.0;
    const int max_attempts = 6;
    for (int attempt = 0;; ++attempt) {
        std::fill(value.begin(), value.end(), 0.0);
        std::fill(errsum.begin(), errsum.end(), 0.0);
        tail_at_stop = 0.0;

        const double u_cap = 10.0 * K_eff + 400.0;
        double u = 0.0;
        int calm = 0;
        bool finished = false;
        while (!finished) {
            if (D > 0.0 && u > 0.0) {
                // |remainder| <= Int_u^inf e^{-Dv} dv since both brackets are <= 1.
                const double tail = std::exp(-D * u) / D;
                if (tail < 0.01 * tol) {
                    tail_at_stop = tail;
                    break;
                }
            }
            double w = width_scale * 2.0 * M_PI * std::sqrt((u + 6.0 / K_eff) / K_eff);
            if (D > 0.0) w = std::min(w, 4.0 / D);
            const double a = u;
            const double b = u + w;
            std::fill(pf.begin(), pf.end(), 0.0);
            std::fill(pc.begin(), pc.end(), 0.0);
            const double mid = 0.5 * (a + b);
            const double half = 0.5 * (b - a);
            for (std::size_t i = 0; i < fine.node.size(); ++i)
                accumulate(mid + half * fine.node[i], half * fine.weight[i], pf);
            for (std::size_t i = 0; i < coarse.node.size(); ++i)
                accumulate(mid + half * coarse.node[i], half * coarse.weight[i], pc);
            double panel_max = 0.0;
            for (int m = 0; m < n; ++m) {
                value[m] += pf[m];
                errsum[m] += std::abs(pf[m] - pc[m]);
                panel_max = std::max(panel_max, std::abs(pf[m]));
            }
            u = b;
            if (u > K_eff) {
                // Past every turning point the integrand decays faster than
                // exponentially; two negligible panels in a row end the march.
                if (panel_max < 1e-3 * tol) {
                    if (++calm >= 2) finished = true;
                } else {
                    calm = 0;
                }
            }
            if (!finished && u >= u_cap)
                throw ToleranceNotMet(
                    "fock populations: integration window exhausted before the "
                    "integrand decayed below tolerance");
        }

        const double max_err =
            *std::max_element(errsum.begin(), errsum.end()) + tail_at_stop;
        if (max_err <= tol) break;
        if (attempt + 1 >= max_attempts)
            throw ToleranceNotMet("fock populations: error estimate " +
                                  std::to_string(max_err) + " above tolerance " +
                                  std::to_string(tol) + " after panel refinement");
        width_scale *= 0.5;
    }

    FockPopulations out;
    out.p.assign(value.begin(), value.end());
    out.quadrature_error = *std::max_element(errsum.begin(), errsum.end()) + tail_at_stop;
    for (double& pm : out.p) {
        if (pm < 0.0) {
            out.clamped = std::max(out.clamped, -pm);
            pm = 0.0;
        }
    }
    return out;
}

FockPopulations fock_populations(double t, const InitialCondition& init, int m_max,
                                 const PhysicalParams& p, double tol,
                                 const SolveOptions& opt) {
    init.validate();
    return fock_populations_from(evolution_functions(t, p, opt), init.k, m_max, tol);
}

}  // namespace ionheat::analytic
