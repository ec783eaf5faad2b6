#pragma once

#include <cmath>
#include <string>

#include "ionheat/errors.hpp"

namespace ionheat {

// ---- Physical constants (SI) ----

inline constexpr double kHbar = 1.0545718e-34;      // reduced Planck constant, J s
inline constexpr double kBoltzmann = 1.380649e-23;  // Boltzmann constant, J / K

// Negative jump-rate slack, in 1/s. Rates above -kRateSlack are treated as
// rounding noise and clamped to zero; anything below it is a genuine
// violation of the Lindblad form.
inline constexpr double kRateSlack = 1e-18;

// ---- Model parameters ----
//
// A single harmonic mode (trap frequency omega0) coupled to a thermal
// reservoir whose spectrum is Lorentzian with cutoff omega_c = r * omega0.
// All frequencies are angular (rad/s); temperature is in kelvin.
struct PhysicalParams {
    double alpha{0.1};          // coupling strength, 1/s
    double omega0{1.0e7};       // trap angular frequency, rad/s
    double r{10.0};             // cutoff ratio omega_c / omega0
    double temperature{300.0};  // reservoir temperature, K

    double omega_c() const { return r * omega0; }
    double beta() const { return 1.0 / (kBoltzmann * temperature); }

    // hbar * beta * omega0; the high-temperature expansions assume this is small.
    double hbar_beta_omega0() const { return kHbar * beta() * omega0; }

    // The second-order master equation is trustworthy when the thermal
    // frequency 1/(hbar beta) dominates the cutoff.
    bool high_temperature_ok() const {
        return 1.0 / (kHbar * beta()) > 10.0 * omega_c();
    }

    // Throws ValidationError naming the offending field.
    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v))
                throw ValidationError(name, "must be positive and finite, got " + std::to_string(v));
        };
        // alpha = 0 is a legal degenerate case (zero coupling, no dynamics).
        if (!(alpha >= 0.0) || !std::isfinite(alpha))
            throw ValidationError("alpha", "must be non-negative and finite, got " + std::to_string(alpha));
        positive(omega0, "omega0");
        positive(r, "r");
        positive(temperature, "temperature_K");
    }

    static PhysicalParams validated(double alpha, double omega0, double r, double temperature) {
        PhysicalParams p{alpha, omega0, r, temperature};
        p.validate();
        return p;
    }
};

// Initial motional state: the Fock state |k>. The kind tag exists so the
// surface can grow other preparations later without an API break.
enum class StateKind { Fock };

struct InitialCondition {
    StateKind kind{StateKind::Fock};
    long k{0};

    void validate() const {
        if (k < 0) throw ValidationError("k", "initial Fock index must be >= 0");
    }
};

}  // namespace ionheat
