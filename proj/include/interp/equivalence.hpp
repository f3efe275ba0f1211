#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "interp/datagen.hpp"
#include "interp/matrix.hpp"
#include "interp/solvers.hpp"

namespace interp {

struct DetConOptions {
    double strict_tol = 0.0;       // verdict requires min value > strict_tol
    double marginal_guard = 1e-12;  // |value| below this is "marginal" and fails
};

struct DetConReport {
    Matrix values;  // k x n, entry (c, i) = z_{c,i} * ((X^T X)+ z_c)_i
    bool verdict = false;
    double min_value = 0.0;
    std::size_t argmin_class = 0;
    std::size_t argmin_sample = 0;
    std::size_t marginal_count = 0;
};

// Deterministic equivalence condition z_c (.) (X^T X)+ z_c > 0 for all c.
// Strict positivity at exact floating sign; values inside the marginal guard
// are numerically unreliable and fail the verdict.
DetConReport check_det_condition(const Matrix& x, const Matrix& onehot,
                                 const DetConOptions& opts = {});

struct InterpolationReport {
    std::vector<char> flags;  // per sample: interpolates all k simplex targets
    double fraction = 0.0;
    double max_residual = 0.0;
};

// Fraction of training samples i with |w_c^T x_i - z_{c,i}| <= tol for all c.
InterpolationReport interpolation_fraction(const Matrix& weights, const Matrix& x,
                                           const Matrix& onehot, double tol = 1e-5);

struct EquivalenceReport {
    bool det_con = false;
    bool svm_equals_mni = false;
    bool decision_agreement = false;
    double max_weight_gap = 0.0;  // ||W_SVM - W_MNI-on-Z||_F (absolute)
    double det_con_min = 0.0;
    std::size_t disagreements = 0;
    std::size_t n_compared = 0;
    FitInfo svm_info;
};

// Fits the multiclass SVM and the simplex-target MNI on (X, Y) and compares
// weights; decisions of SVM vs one-hot MNI are compared on a seeded test grid
// drawn from `model` when given, otherwise on the training columns.
EquivalenceReport certify_equivalence(const Matrix& x, const Matrix& onehot, double tol,
                                      const GenerativeModel* model = nullptr,
                                      std::size_t n_test = 10000, std::uint64_t seed = 0);

// Sufficient overparameterization test for GMM equivalence:
//   p > C1 k^3 n log(kn) + n - 1   and   p > C2 k^1.5 n^1.5 ||mu||.
bool sufficient_condition_gmm(std::size_t n, std::size_t p, std::size_t k, double mu_norm,
                              double c1, double c2);

struct EffectiveDims {
    double d2 = 0.0;    // ||lambda||_1^2 / ||lambda||_2^2
    double d_inf = 0.0; // ||lambda||_1 / ||lambda||_inf
};
EffectiveDims effective_dimensions(std::span<const double> spectrum);

// Sufficient effective-dimension test for MLM equivalence:
//   d_inf > C1 k^2 n log(kn)   and   d_2 > C2 (log(kn) + n).
bool sufficient_condition_mlm(std::size_t n, std::size_t k, std::span<const double> spectrum,
                              double c1, double c2);

}  // namespace interp
