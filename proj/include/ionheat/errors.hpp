#pragma once

#include <stdexcept>
#include <string>

namespace ionheat {

// Requested evaluation point is outside the kernel's domain (the symmetrized
// reservoir correlation has a logarithmic divergence at tau = 0).
struct DivergentAtZero : std::domain_error {
    explicit DivergentAtZero(const std::string& what) : std::domain_error(what) {}
};

// A quadrature routine could not certify the requested tolerance.
struct ToleranceNotMet : std::runtime_error {
    explicit ToleranceNotMet(const std::string& what) : std::runtime_error(what) {}
};

// The adaptive ODE stepper exhausted its step budget before reaching the
// requested time at the requested tolerance.
struct StepFailure : std::runtime_error {
    explicit StepFailure(const std::string& what) : std::runtime_error(what) {}
};

// The population-inversion integral lost its exponential damping and the
// quadrature would be dominated by cancellation.
struct IllConditioned : std::runtime_error {
    explicit IllConditioned(const std::string& what) : std::runtime_error(what) {}
};

// A jump channel rate came out negative beyond the numerical slack, so the
// generator is not of Lindblad form at the requested time.
struct NonLindbladRates : std::runtime_error {
    explicit NonLindbladRates(const std::string& what) : std::runtime_error(what) {}
};

// A decay step removed more norm than the step-size policy permits.
struct StepTooLarge : std::runtime_error {
    explicit StepTooLarge(const std::string& what) : std::runtime_error(what) {}
};

// A raising jump was selected while the top of the truncated Fock space holds
// non-negligible population; the trajectory cannot be continued faithfully.
struct TruncationOverflow : std::runtime_error {
    explicit TruncationOverflow(const std::string& what) : std::runtime_error(what) {}
};

// Malformed scenario configuration text. line = 1-based line number.
struct ParseError : std::runtime_error {
    ParseError(int line_number, const std::string& what)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + what),
          line(line_number) {}
    int line;
};

// A scenario or parameter value is out of range. key names the offender.
struct ValidationError : std::runtime_error {
    ValidationError(const std::string& key_name, const std::string& what)
        : std::runtime_error(key_name + ": " + what), key(key_name) {}
    std::string key;
};

}  // namespace ionheat
