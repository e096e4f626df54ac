#include "far/penalty.hpp"

#include "far/errors.hpp"

namespace far {

void validate(const PenaltySpec& spec) {
    if (spec.lambda < 0.0) throw ConfigError("penalty lambda must be >= 0");
    if (spec.family == PenaltyFamily::Scad && !(spec.scad_a > 2.0))
        throw ConfigError("SCAD shape parameter must be > 2");
}

double rho(const PenaltySpec& spec, double t) {
    if (t < 0.0) throw ConfigError("rho: t must be >= 0");
    validate(spec);
    const double l = spec.lambda;
    if (spec.family == PenaltyFamily::Lasso) return l * t;
    const double a = spec.scad_a;
    if (t <= l) return l * t;
    if (t <= a * l) return (2.0 * a * l * t - t * t - l * l) / (2.0 * (a - 1.0));
    return (a + 1.0) * l * l / 2.0;
}

double rho_prime(const PenaltySpec& spec, double t) {
    if (t < 0.0) throw ConfigError("rho_prime: t must be >= 0");
    validate(spec);
    const double l = spec.lambda;
    if (spec.family == PenaltyFamily::Lasso) return l;
    const double a = spec.scad_a;
    if (t <= l) return l;
    if (t <= a * l) return (a * l - t) / (a - 1.0);
    return 0.0;
}

PenaltySpec parse_penalty(const std::string& text) {
    PenaltySpec spec;
    if (text == "lasso") {
        spec.family = PenaltyFamily::Lasso;
        return spec;
    }
    if (text == "scad") {
        spec.family = PenaltyFamily::Scad;
        return spec;
    }
    const std::string prefix = "scad:a=";
    if (text.rfind(prefix, 0) == 0) {
        spec.family = PenaltyFamily::Scad;
        try {
            spec.scad_a = std::stod(text.substr(prefix.size()));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse SCAD shape in penalty string: " + text);
        }
        validate(spec);
        return spec;
    }
    throw ConfigError("unknown penalty: " + text + " (expected lasso, scad, or scad:a=<value>)");
}

std::string penalty_family_string(const PenaltySpec& spec) {
    return spec.family == PenaltyFamily::Lasso ? "lasso" : "scad";
}

}  // namespace far
