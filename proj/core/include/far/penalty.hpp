#pragma once
#include <string>

namespace far {

enum class PenaltyFamily { Lasso, Scad };

/// Penalty rho_lambda with the derivative used by the shrinkage step.
struct PenaltySpec {
    PenaltyFamily family = PenaltyFamily::Lasso;
    double lambda = 0.0;
    double scad_a = 3.7;

    PenaltySpec with_lambda(double l) const {
        PenaltySpec s = *this;
        s.lambda = l;
        return s;
    }
};

/// rho_lambda(t), t >= 0. Lasso: lambda t. SCAD: lambda t on [0, lambda],
/// quadratic blend on (lambda, a lambda], constant (a+1) lambda^2 / 2 beyond.
double rho(const PenaltySpec& spec, double t);

/// rho'_lambda(t), t >= 0. Lasso: lambda. SCAD: lambda on [0, lambda],
/// (a lambda - t) / (a - 1) on (lambda, a lambda], 0 beyond.
double rho_prime(const PenaltySpec& spec, double t);

/// Parse "lasso", "scad", "scad:a=3.7". Lambda is carried separately.
PenaltySpec parse_penalty(const std::string& text);
std::string penalty_family_string(const PenaltySpec& spec);

void validate(const PenaltySpec& spec);

}  // namespace far
