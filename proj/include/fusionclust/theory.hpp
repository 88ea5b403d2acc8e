#pragma once

#include <span>
#include <vector>

namespace fusionclust::theory {

// Recovery-guarantee quantities for l0 fusion clustering with entries
// missing uniformly at random. Probabilities that routinely underflow are
// carried as natural logarithms; exponentiate only for reporting.

/// ln gamma0 = -(p0^2 P / 2)(1 - ln 2): bound on the chance that two points
/// share fewer than p0^2 P / 2 observed coordinates.
double log_gamma0(double p0, int P);

/// ln delta0 = -p0^2 P (1 - kappa^2)^2 / mu0^2. Throws std::domain_error
/// for kappa >= 1, where the bound does not apply.
double log_delta0(double p0, int P, double kappa, double mu0);

/// ln beta0 with beta0 = 1 - (1 - delta0)(1 - gamma0), evaluated without
/// cancellation when both inputs are tiny.
double log_beta0(double log_gamma0, double log_delta0);

/// Linear-domain convenience wrapper: 1 - (1 - delta0)(1 - gamma0).
double beta0(double gamma0, double delta0);

/// Failure bound eta0 for K clusters of M points. K = 2 uses the closed
/// sum over i = 1..M-1; other K enumerate compositions and are limited to
/// K * M <= kEnumerationBudget. May exceed 1; returns +inf on overflow.
double eta0(int K, int M, double log_beta0);

/// sum_{i=1}^{M-1} beta0^{i(M-i)} C(M,i)^2
double eta0_two_clusters(int M, double log_beta0);

/// Sum over ordered K-tuples (m_1..m_K) of non-negative counts with
/// sum M and at least two non-zero entries of
///   beta0^{(M^2 - sum m_j^2)/2} prod_j C(M, m_j).
/// The tuple index j is the cluster a point is drawn from, which is the
/// reading that reproduces the K = 2 closed sum.
double eta0_enumerate(int K, int M, double log_beta0);

inline constexpr int kEnumerationBudget = 64;

struct Eta0Approx {
    double value = 0.0; // M^3 beta0^{M-1}
    bool valid = false; // ln beta0 <= 1/(M-1) + 2/(M-2) ln(1/(M-1))
};

/// The validity condition is undefined at M = 2; that case reports
/// valid = false.
Eta0Approx eta0_approx(int M, double log_beta0);

/// ln C(n, k) via lgamma.
double log_binomial(int n, int k);

struct GuaranteeInputs {
    double p0 = 1.0;
    int P = 1;
    double kappa = 0.0;
    double mu0 = 1.0;
    int K = 2;
    int M = 2;

    void validate() const;
};

struct GuaranteeReport {
    double p0 = 0.0;
    double log_gamma0 = 0.0;
    double log_delta0 = 0.0;
    double log_beta0 = 0.0;
    double eta0 = 0.0;
    double eta0_approx = 0.0;
    bool approx_valid = false;
    double success_lower_bound = 0.0; // clamp(1 - eta0, 0, 1)

    double gamma0() const;
    double delta0() const;
    double beta0() const;
};

GuaranteeReport evaluate(const GuaranteeInputs& in);

/// One report per p0 value in the grid; other inputs fixed.
std::vector<GuaranteeReport> guarantee_curve(std::span<const double> p0_grid,
                                             GuaranteeInputs fixed);

} // namespace fusionclust::theory
