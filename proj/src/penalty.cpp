#include "fusionclust/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fusionclust/csv_io.hpp"

namespace fusionclust {

PenaltySpec PenaltySpec::h1(double sigma, double tau)
{
    PenaltySpec s{H1Penalty{sigma}, tau};
    s.validate();
    return s;
}

PenaltySpec PenaltySpec::lp(double p, double tau)
{
    PenaltySpec s{LpPenalty{p}, tau};
    s.validate();
    return s;
}

void PenaltySpec::validate() const
{
    if (!(tau > 0.0)) throw std::invalid_argument("penalty floor tau must be positive");
    if (const auto* h = std::get_if<H1Penalty>(&kind)) {
        if (!(h->sigma > 0.0) || !std::isfinite(h->sigma)) {
            throw std::invalid_argument("H1 sigma must be positive");
        }
    } else {
        const double p = std::get<LpPenalty>(kind).p;
        if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("Lp exponent must lie in (0,1]");
    }
}

std::string PenaltySpec::describe() const
{
    if (const auto* h = std::get_if<H1Penalty>(&kind)) {
        return "h1(sigma=" + format_double(h->sigma) + ")";
    }
    return "lp(p=" + format_double(std::get<LpPenalty>(kind).p) + ",tau=" + format_double(tau) + ")";
}

double phi(double x, const PenaltySpec& spec)
{
    if (const auto* h = std::get_if<H1Penalty>(&spec.kind)) {
        return -std::expm1(-x * x / (2.0 * h->sigma * h->sigma));
    }
    return std::pow(x, std::get<LpPenalty>(spec.kind).p);
}

double phi_derivative(double x, const PenaltySpec& spec)
{
    if (const auto* h = std::get_if<H1Penalty>(&spec.kind)) {
        const double s2 = h->sigma * h->sigma;
        return x / s2 * std::exp(-x * x / (2.0 * s2));
    }
    const double p = std::get<LpPenalty>(spec.kind).p;
    return p * std::pow(x, p - 1.0);
}

double weight(double x, const PenaltySpec& spec)
{
    if (const auto* h = std::get_if<H1Penalty>(&spec.kind)) {
        const double s2 = h->sigma * h->sigma;
        return std::exp(-x * x / (2.0 * s2)) / (2.0 * s2);
    }
    const double p = std::get<LpPenalty>(spec.kind).p;
    return p / (2.0 * std::pow(std::max(x, spec.tau), 2.0 - p));
}

} // namespace fusionclust
