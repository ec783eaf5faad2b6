#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <mutex>
#include <utility>
#include <vector>

#include "ionheat/errors.hpp"

// Small self-contained quadrature toolkit: Gauss-Legendre rules with nodes
// computed to machine precision at first use, plus an adaptive bisection
// integrator for smooth integrands on finite intervals.
namespace ionheat::quad {

struct Rule {
    std::vector<double> node;    // on (-1, 1)
    std::vector<double> weight;  // sums to 2
};

// Gauss-Legendre rule of order n. Nodes are the roots of P_n found by Newton
// iteration from the Chebyshev-like initial guesses; converges to full double
// precision in a handful of iterations.
inline const Rule& gauss_legendre(int n) {
    static std::map<int, Rule> cache;
    static std::mutex cache_mutex;
    std::lock_guard<std::mutex> lock(cache_mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    Rule rule;
    rule.node.resize(n);
    rule.weight.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 64; ++iter) {
            // Evaluate P_n(x) and P_n'(x) by the three-term recurrence.
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.node[i] = x;
        rule.weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

template <class F>
double panel(F&& f, double a, double b, const Rule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.node.size(); ++i)
        acc += rule.weight[i] * f(mid + half * rule.node[i]);
    return half * acc;
}

struct Result {
    double value{0.0};
    double error{0.0};  // estimated absolute error
};

// Adaptive bisection with a GL(n) / GL(2n) error estimate per interval.
// Throws ToleranceNotMet when the recursion depth budget is exhausted before
// the local tolerance is reached.
template <class F>
Result adaptive(F&& f, double a, double b, double rel_tol, double abs_tol,
                int order = 12, int max_depth = 48) {
    const Rule& coarse = gauss_legendre(order);
    const Rule& fine = gauss_legendre(2 * order);

    struct Frame {
        double a, b;
        int depth;
    };
    std::vector<Frame> stack{{a, b, 0}};
    Result out;
    double scale = 0.0;  // running magnitude for the relative tolerance
    while (!stack.empty()) {
        Frame fr = stack.back();
        stack.pop_back();
        double c = panel(f, fr.a, fr.b, coarse);
        double v = panel(f, fr.a, fr.b, fine);
        double err = std::abs(v - c);
        scale = std::max(scale, std::abs(out.value) + std::abs(v));
        double local_tol = std::max(abs_tol, rel_tol * scale) *
                           std::max(1e-3, (fr.b - fr.a) / (b - a));
        if (err <= local_tol || err <= 1e-17 * std::abs(v)) {
            out.value += v;
            out.error += err;
            continue;
        }
        if (fr.depth >= max_depth)
            throw ToleranceNotMet("adaptive quadrature: depth budget exhausted on [" +
                                  std::to_string(fr.a) + ", " + std::to_string(fr.b) + "]");
        double mid = 0.5 * (fr.a + fr.b);
        stack.push_back({fr.a, mid, fr.depth + 1});
        stack.push_back({mid, fr.b, fr.depth + 1});
    }
    return out;
}

}  // namespace ionheat::quad
