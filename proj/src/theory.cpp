#include "fusionclust/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fusionclust::theory {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_exp(double log_value)
{
    return log_value == kNegInf ? 0.0 : std::exp(log_value);
}

double safe_log(double value)
{
    return value <= 0.0 ? kNegInf : std::log(value);
}

// Visits every composition of `total` into buf.size() non-negative parts.
template <typename Visit>
void for_each_composition(int total, std::vector<int>& buf, std::size_t pos, Visit& visit)
{
    if (pos + 1 == buf.size()) {
        buf[pos] = total;
        visit(buf);
        return;
    }
    for (int m = 0; m <= total; ++m) {
        buf[pos] = m;
        for_each_composition(total - m, buf, pos + 1, visit);
    }
}

} // namespace

double log_gamma0(double p0, int P)
{
    return -(p0 * p0 * P / 2.0) * (1.0 - std::log(2.0));
}

double log_delta0(double p0, int P, double kappa, double mu0)
{
    if (!(kappa < 1.0)) {
        throw std::domain_error("guarantee undefined for κ ≥ 1");
    }
    if (!(mu0 >= 1.0)) {
        throw std::invalid_argument("mu0 must be >= 1");
    }
    const double slack = 1.0 - kappa * kappa;
    return -p0 * p0 * P * slack * slack / (mu0 * mu0);
}

double log_beta0(double log_gamma0, double log_delta0)
{
    const double hi = std::max(log_gamma0, log_delta0);
    if (hi == kNegInf) return kNegInf;
    if (hi < -700.0) {
        // Both terms are below double range: beta0 = g + d - g d ~= g + d.
        const double lo = std::min(log_gamma0, log_delta0);
        return hi + std::log1p(std::exp(lo - hi));
    }
    const double log_miss =
        std::log1p(-safe_exp(log_gamma0)) + std::log1p(-safe_exp(log_delta0));
    return safe_log(-std::expm1(log_miss));
}

double beta0(double gamma0, double delta0)
{
    return gamma0 + delta0 - gamma0 * delta0;
}

double log_binomial(int n, int k)
{
    if (k < 0 || k > n) return kNegInf;
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double eta0_two_clusters(int M, double log_beta)
{
    if (M < 2) {
        throw std::invalid_argument("eta0 needs M >= 2");
    }
    double sum = 0.0;
    for (int i = 1; i <= M - 1; ++i) {
        const double exponent = static_cast<double>(i) * (M - i);
        sum += safe_exp(exponent * log_beta + 2.0 * log_binomial(M, i));
    }
    return sum;
}

double eta0_enumerate(int K, int M, double log_beta)
{
    if (K < 2 || M < 2) {
        throw std::invalid_argument("eta0 needs K >= 2 and M >= 2");
    }
    if (K * M > kEnumerationBudget) {
        throw std::invalid_argument(
            "eta0 enumeration limited to K*M <= " + std::to_string(kEnumerationBudget) +
            "; use K = 2 (closed sum) or the M^3 beta0^(M-1) approximation");
    }
    double sum = 0.0;
    auto visit = [&](const std::vector<int>& m) {
        const auto nonzero = std::count_if(m.begin(), m.end(), [](int v) { return v > 0; });
        if (nonzero < 2) return;
        long long sq = 0;
        double log_term = 0.0;
        for (int v : m) {
            sq += static_cast<long long>(v) * v;
            log_term += log_binomial(M, v);
        }
        const double exponent = 0.5 * static_cast<double>(static_cast<long long>(M) * M - sq);
        sum += safe_exp(exponent * log_beta + log_term);
    };
    std::vector<int> buf(static_cast<std::size_t>(K));
    for_each_composition(M, buf, 0, visit);
    return sum;
}

double eta0(int K, int M, double log_beta)
{
    return K == 2 ? eta0_two_clusters(M, log_beta) : eta0_enumerate(K, M, log_beta);
}

Eta0Approx eta0_approx(int M, double log_beta)
{
    if (M < 2) {
        throw std::invalid_argument("eta0_approx needs M >= 2");
    }
    Eta0Approx out;
    out.value = static_cast<double>(M) * M * M * safe_exp((M - 1) * log_beta);
    if (M == 2) {
        out.valid = false;
        return out;
    }
    const double threshold = 1.0 / (M - 1) + 2.0 / (M - 2) * std::log(1.0 / (M - 1));
    out.valid = log_beta <= threshold;
    return out;
}

void GuaranteeInputs::validate() const
{
    if (!(p0 >= 0.0 && p0 <= 1.0)) throw std::invalid_argument("p0 must lie in [0,1]");
    if (P < 1) throw std::invalid_argument("P must be >= 1");
    if (!(kappa >= 0.0)) throw std::invalid_argument("kappa must be >= 0");
    if (!(kappa < 1.0)) throw std::domain_error("guarantee undefined for κ ≥ 1");
    if (!(mu0 >= 1.0)) throw std::invalid_argument("mu0 must be >= 1");
    if (K < 2) throw std::invalid_argument("K must be >= 2");
    if (M < 2) throw std::invalid_argument("M must be >= 2");
}

double GuaranteeReport::gamma0() const { return safe_exp(log_gamma0); }
double GuaranteeReport::delta0() const { return safe_exp(log_delta0); }
double GuaranteeReport::beta0() const { return safe_exp(log_beta0); }

GuaranteeReport evaluate(const GuaranteeInputs& in)
{
    in.validate();
    GuaranteeReport r;
    r.p0 = in.p0;
    r.log_gamma0 = log_gamma0(in.p0, in.P);
    r.log_delta0 = log_delta0(in.p0, in.P, in.kappa, in.mu0);
    r.log_beta0 = log_beta0(r.log_gamma0, r.log_delta0);
    r.eta0 = eta0(in.K, in.M, r.log_beta0);
    const auto approx = eta0_approx(in.M, r.log_beta0);
    r.eta0_approx = approx.value;
    r.approx_valid = approx.valid;
    r.success_lower_bound = std::clamp(1.0 - r.eta0, 0.0, 1.0);
    return r;
}

std::vector<GuaranteeReport> guarantee_curve(std::span<const double> p0_grid, GuaranteeInputs fixed)
{
    if (p0_grid.empty()) {
        throw std::invalid_argument("p0 grid is empty");
    }
    std::vector<GuaranteeReport> out;
    out.reserve(p0_grid.size());
    for (double p0 : p0_grid) {
        fixed.p0 = p0;
        out.push_back(evaluate(fixed));
    }
    return out;
}

} // namespace fusionclust::theory
