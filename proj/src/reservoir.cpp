#include "ionheat/reservoir.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace ionheat::reservoir {

double spectral_density(double omega, const PhysicalParams& p) {
    const double wc = p.omega_c();
    return wc * wc / (M_PI * (omega * omega + wc * wc));
}

double thermal_occupation(double omega, const PhysicalParams& p) {
    if (!(omega > 0.0))
        throw ValidationError("omega", "thermal occupation needs omega > 0");
    // expm1 keeps full precision in the high-temperature limit where
    // beta hbar omega is far below 1.
    return 1.0 / std::expm1(p.beta() * kHbar * omega);
}

quad::Result correlation_kernel(double tau, const PhysicalParams& p,
                                const KernelConfig& cfg) {
    if (!(tau > 0.0))
        throw DivergentAtZero("correlation kernel diverges logarithmically as tau -> 0; tau = " +
                              std::to_string(tau));
    const double beta_hbar = p.beta() * kHbar;
    const double wc = p.omega_c();

    // alpha * omega |g|^2 (2 n + 1) cos(omega tau); finite at omega = 0 where
    // omega (2n+1) -> 2/(beta hbar).
    auto integrand = [&](double w) {
        double weight;
        if (w * beta_hbar < 1e-8) {
            weight = 2.0 / beta_hbar;  // leading behaviour of omega coth(beta hbar omega / 2)
        } else {
            weight = w * (2.0 / std::expm1(beta_hbar * w) + 1.0);
        }
        return p.alpha * weight * spectral_density(w, p) * std::cos(w * tau);
    };

    // Panel edges sit at the zeros of cos(omega tau): z_j = (j + 1/2) pi / tau.
    // Fixed-order panels only resolve structure wider than a few half-periods,
    // so any spectral scale (the Lorentzian width omega_c, the thermal scale
    // 1/(beta hbar)) narrower than that is integrated adaptively first, up to
    // a zero at omega_max_factor times the sharpest such scale.
    const double half_period = M_PI / tau;
    auto zero_at_or_above = [&](double target) {
        double j = std::ceil(target / half_period - 0.5);
        if (j < 0.0) j = 0.0;
        return (j + 0.5) * half_period;
    };
    double resolve_scale = 0.0;
    for (double s : {wc, 1.0 / beta_hbar})
        if (5.0 * half_period > s) resolve_scale = std::max(resolve_scale, s);

    double value = 0.0;
    double head_err = 0.0;
    double edge = 0.0;
    if (resolve_scale > 0.0) {
        edge = zero_at_or_above(cfg.omega_max_factor * resolve_scale);
        quad::Result head = quad::adaptive(integrand, 0.0, edge, 0.05 * cfg.rel_tol, 0.0);
        value = head.value;
        head_err = head.error;
    }

    // Past the envelope peak the panel integrals alternate in sign with
    // shrinking magnitude (the envelope falls monotonically for omega >
    // omega_c at any temperature), so truncating after half a panel leaves at
    // most half that panel as error. Sweep until that bound certifies the
    // requested tolerance.
    const double monotone_edge = zero_at_or_above(3.0 * wc);
    const quad::Rule& rule = quad::gauss_legendre(cfg.panel_points);
    constexpr long kMaxPanels = 2000000;
    double next = (edge == 0.0) ? 0.5 * half_period : edge + half_period;
    for (long i = 0; i < kMaxPanels; ++i) {
        const double pv = quad::panel(integrand, edge, next, rule);
        if (edge >= monotone_edge) {
            const double tail_err = 0.5 * std::abs(pv);
            const double candidate = value + 0.5 * pv;
            if (tail_err <= 0.5 * cfg.rel_tol * std::abs(candidate)) {
                quad::Result out{candidate, head_err + tail_err};
                if (!(out.error <= cfg.rel_tol * std::abs(out.value)))
                    throw ToleranceNotMet(
                        "correlation kernel: error estimate " + std::to_string(out.error) +
                        " exceeds requested relative tolerance at tau = " + std::to_string(tau));
                return out;
            }
        }
        value += pv;
        edge = next;
        next += half_period;
    }
    throw ToleranceNotMet("correlation kernel: panel budget exhausted before the tail "
                          "certified the requested tolerance at tau = " +
                          std::to_string(tau));
}

double susceptibility_kernel(double tau, const PhysicalParams& p) {
    if (!(tau > 0.0))
        throw ValidationError("tau", "susceptibility kernel is defined for tau > 0");
    const double wc = p.omega_c();
    return 0.5 * p.alpha * wc * wc * std::exp(-wc * tau);
}

CoefficientPair tcl_coefficients(double t, const PhysicalParams& p) {
    const double r = p.r;
    const double r2p1 = r * r + 1.0;
    const double E = std::exp(-p.omega_c() * t);
    const double s = std::sin(p.omega0 * t);
    const double c = std::cos(p.omega0 * t);
    const double pref_d = p.alpha / p.hbar_beta_omega0() * r / r2p1;
    const double pref_g = 0.5 * p.alpha * r * r / r2p1;
    CoefficientPair out;
    out.t = t;
    out.delta_bar = pref_d * (E * s + r * (1.0 - E * c));
    out.gamma = pref_g * (1.0 - E * c - r * E * s);
    return out;
}

double delta_bar_asymptote(const PhysicalParams& p) {
    const double r2 = p.r * p.r;
    return p.alpha / p.hbar_beta_omega0() * r2 / (r2 + 1.0);
}

double gamma_asymptote(const PhysicalParams& p) {
    const double r2 = p.r * p.r;
    return 0.5 * p.alpha * r2 / (r2 + 1.0);
}

ValidityReport lindblad_validity(const PhysicalParams& p, double t_max,
                                 std::size_t n_points, double eps_tol) {
    if (n_points < 2) throw ValidationError("n_points", "validity scan needs >= 2 points");
    ValidityReport rep;
    rep.eps_tol = eps_tol;
    rep.n_points = n_points;
    rep.min_sum = rep.min_diff = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_points; ++i) {
        double t = t_max * static_cast<double>(i) / static_cast<double>(n_points - 1);
        CoefficientPair cp = tcl_coefficients(t, p);
        double sum = cp.delta_bar + cp.gamma;
        double diff = cp.delta_bar - cp.gamma;
        if (sum < rep.min_sum) {
            rep.min_sum = sum;
            rep.t_min_sum = t;
        }
        if (diff < rep.min_diff) {
            rep.min_diff = diff;
            rep.t_min_diff = t;
        }
        if ((sum < -eps_tol || diff < -eps_tol) && !rep.has_violation) {
            rep.has_violation = true;
            rep.first_violation_time = t;
        }
    }
    rep.valid = !rep.has_violation;
    return rep;
}

MarkovRates markovian_limit(const PhysicalParams& p) {
    const double dbar = delta_bar_asymptote(p);
    const double gam = gamma_asymptote(p);
    MarkovRates out;
    // The stationary generator damps the mean at twice the asymptotic gamma:
    // lowering acts at dbar + gam, raising at dbar - gam, and their difference
    // sets the relaxation rate of <n>.
    out.Gamma = 2.0 * gam;
    out.N = (dbar / gam - 1.0) / 2.0;
    out.n_omega0 = thermal_occupation(p.omega0, p);
    out.relative_gap = std::abs(out.N - out.n_omega0) / out.n_omega0;
    return out;
}

}  // namespace ionheat::reservoir
