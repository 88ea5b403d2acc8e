#pragma once

#include <string>
#include <variant>

namespace fusionclust {

/// Gaussian-shaped saturating penalty 1 - exp(-x^2 / (2 sigma^2)).
struct H1Penalty {
    double sigma = 1.0;
};

/// x^p with 0 < p <= 1.
struct LpPenalty {
    double p = 0.5;
};

struct PenaltySpec {
    std::variant<H1Penalty, LpPenalty> kind = H1Penalty{};
    /// Distance floor used only inside the Lp weight, where w(x) is
    /// singular at 0. phi itself is never smoothed.
    double tau = 1e-9;

    static PenaltySpec h1(double sigma, double tau = 1e-9);
    static PenaltySpec lp(double p, double tau = 1e-9);

    void validate() const;
    bool is_h1() const { return std::holds_alternative<H1Penalty>(kind); }
    std::string describe() const;
};

/// Penalty value for a distance x >= 0.
double phi(double x, const PenaltySpec& spec);

/// Derivative phi'(x) for x > 0.
double phi_derivative(double x, const PenaltySpec& spec);

/// Curvature of the tangent quadratic majorizer, w(x) = phi'(x) / (2x):
///   phi(y) <= w(x) y^2 + phi(x) - w(x) x^2   for all y >= 0.
/// H1 uses the continuous limit 1/(2 sigma^2) at x = 0; Lp evaluates at
/// max(x, tau).
double weight(double x, const PenaltySpec& spec);

} // namespace fusionclust
