#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ionheat/errors.hpp"

// Adaptive embedded Runge-Kutta integrator (Dormand-Prince 5(4)) for scalar
// initial value problems. Error control is relative to the larger of the old
// and new state, with an optional absolute floor, so solutions that start at
// zero and grow are resolved to relative accuracy throughout.
namespace ionheat::ode {

struct Options {
    double rel_tol{1e-10};
    double abs_tol{0.0};       // absolute floor added to the error scale
    double h_init{0.0};        // 0 = choose automatically
    double h_max{0.0};         // 0 = no cap beyond the remaining span
    long max_steps{4000000};   // accepted + rejected steps before StepFailure
};

namespace detail {

// Integrate from (t, y) to t_end, updating t, y and the step size h in place.
template <class F>
inline void advance(F&& f, double& t, double& y, double t_end, double& h,
                    const Options& opt, long& steps) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                            e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    while (t < t_end) {
        if (steps++ > opt.max_steps)
            throw StepFailure("adaptive stepper exceeded " + std::to_string(opt.max_steps) +
                              " steps at t = " + std::to_string(t));
        double span = t_end - t;
        h = std::min(h, span);
        if (opt.h_max > 0.0) h = std::min(h, opt.h_max);

        double k1 = f(t, y);
        double k2 = f(t + c2 * h, y + h * a21 * k1);
        double k3 = f(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        double k4 = f(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        double k5 = f(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        double k6 = f(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        double y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        double k7 = f(t + h, y5);
        double y4 = y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double scale = opt.abs_tol +
                       opt.rel_tol * std::max({std::abs(y), std::abs(y5), 1e-300});
        double err = std::abs(y5 - y4) / scale;
        if (err <= 1.0 || h <= span * 1e-14) {
            t = (span == h) ? t_end : t + h;
            y = y5;
        }
        double grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(grow, 0.2, 5.0);
        if (!(h > 0.0) || !std::isfinite(h))
            throw StepFailure("adaptive stepper produced a degenerate step at t = " +
                              std::to_string(t));
    }
}

}  // namespace detail

// Value of y(t_end) for y' = f(t, y), y(t0) = y0.
template <class F>
double integrate(F&& f, double t0, double y0, double t_end, const Options& opt = {}) {
    if (t_end < t0) throw StepFailure("integration interval is reversed");
    double t = t0, y = y0;
    double h = opt.h_init > 0.0 ? opt.h_init
                                : std::max((t_end - t0) * 1e-6, (t_end - t0) * 1e-12);
    long steps = 0;
    detail::advance(f, t, y, t_end, h, opt, steps);
    return y;
}

// Single sweep producing y at every point of an ascending grid with
// grid.front() >= t0. Far cheaper than integrating from t0 once per point.
template <class F>
std::vector<double> integrate_grid(F&& f, double t0, double y0,
                                   const std::vector<double>& grid,
                                   const Options& opt = {}) {
    std::vector<double> out;
    out.reserve(grid.size());
    double t = t0, y = y0;
    double span = grid.empty() ? 0.0 : grid.back() - t0;
    double h = opt.h_init > 0.0 ? opt.h_init : std::max(span * 1e-6, 1e-300);
    long steps = 0;
    for (double tg : grid) {
        if (tg < t) throw StepFailure("output grid is not ascending");
        detail::advance(f, t, y, tg, h, opt, steps);
        out.push_back(y);
    }
    return out;
}

}  // namespace ionheat::ode
