#pragma once

#include <cstdint>
#include <vector>

#include "interp/datagen.hpp"
#include "interp/matrix.hpp"
#include "interp/solvers.hpp"

namespace interp {

// Winner-takes-all prediction; exact ties resolve to the lowest class index.
// OvO classifiers route to pairwise majority vote (vote ties likewise).
int predict(const LinearClassifier& clf, std::span<const double> x);
std::vector<int> predict_batch(const LinearClassifier& clf, const Matrix& x);

struct ErrorEstimate {
    double total = 0.0;
    std::vector<double> per_class;
    std::vector<std::size_t> class_counts;
    std::size_t n_test = 0;
    double se_total = 0.0;
    std::vector<double> se_class;
};

// Monte Carlo classification error. GMM: stratified per class (largest
// remainder allocation of n_test across priors), total error is the
// prior-weighted class error. MLM: unconditional sampling with per-class
// conditioning on the drawn label. Deterministic given (model, n_test, seed);
// the test stream depends only on the seed, never on the classifier.
ErrorEstimate mc_error(const LinearClassifier& clf, const GenerativeModel& model,
                       std::size_t n_test, std::uint64_t seed);

struct GmmBoundConstants {
    double c1 = 1.0;
    double c2 = 1.0;
    double c3 = 1.0;
    double c4 = 1.0;
};

// Rate function of the GMM class-error bound (uncalibrated constants):
//   (k-1) exp(-mu^2 ((1 - C1/sqrt(n) - C2 n/p) mu - C3 min(sqrt(k), sqrt(log 2n)))^2
//             / (C4 (1 + k p / (n mu^2))))
// clipped to [0, 1]; returns 1 when the positivity condition fails.
double gmm_bound_rate(std::size_t n, std::size_t p, std::size_t k, double mu_norm,
                      const GmmBoundConstants& constants = {});

// Gaussian upper tail Q(x) = P(Z > x).
double q_function(double x);

// Variance-free analytic estimate: P_{e|c} <= sum_{j != c} Q((w_c - w_j)^T mu_c
// / ||w_c - w_j||), one value per class.
std::vector<double> gmm_pairwise_q_bound(const LinearClassifier& clf, const Matrix& means);

struct SuCn {
    double su = 0.0;
    double cn = 0.0;
};

// Survival / contamination split of a recovered difference direction under
// the Sigma inner product: su = dhat^T Sigma d / ||Sigma^(1/2) d||,
// cn^2 = ||Sigma^(1/2) dhat||^2 - su^2.
SuCn su_cn(std::span<const double> delta_hat, std::span<const double> delta,
           std::span<const double> spectrum);

// P(x^T delta * x^T delta_hat < 0) for x ~ N(0, Sigma): 1/2 - arctan(su/cn)/pi.
double sign_disagreement_probability(const SuCn& sc);

struct MlmExcessRisk {
    double error = 0.0;
    double bayes = 0.0;
    double excess = 0.0;  // error - bayes, reported raw (may be negative)
    double pairwise_bound = 0.0;
    double se_excess = 0.0;
};

MlmExcessRisk mlm_excess_risk(const LinearClassifier& clf, const MlmSpec& spec,
                              std::size_t n_test, std::uint64_t seed);

// Sum of the pairwise arctan error terms over all class pairs (the Monte
// Carlo-free half of mlm_excess_risk).
double mlm_pairwise_bound(const LinearClassifier& clf, const MlmSpec& spec);

struct BilevelRates {
    double su_exponent = 0.0;
    double cn_exponent = 0.0;
    double snr_exponent = 0.0;
    bool consistent = false;
};

// Closed-form rate exponents of the bi-level ensemble per regime branch
// (q < 1-r vs q > 1-r) and the benign-overfitting predicate
// q < (1 - r) + (m - 1)/2 (strict).
BilevelRates bilevel_rate_exponents(const BilevelParams& params);

}  // namespace interp
