#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "interp/datagen.hpp"
#include "interp/matrix.hpp"

namespace interp {

// Leave-one-out quadratic forms for class j and sample i, computed against
// A_{-j} = Gram of X with the mu_j v_j^T mean component removed:
//   s = v_j^T A+ v_j,  t = d_j^T A+ d_j,  h = v_j^T A+ d_j,
//   g = v_j^T A+ e_i,  f = d_j^T A+ e_i,  with d_j = Q^T mu_j, Q = X - M Y,
// plus det = s (||mu_j||^2 - t) + (1 + h)^2.
struct QuadFormSet {
    double s = 0.0;
    double t = 0.0;
    double h = 0.0;
    double g = 0.0;
    double f = 0.0;
    double det = 0.0;
};

QuadFormSet loo_quadforms(const Matrix& x, const Matrix& onehot, const Matrix& means,
                          std::size_t j, std::size_t i);

// Full-Gram counterpart g = v_j^T (X^T X)+ e_i of the leave-one-out identity
//   g_full = ((1 + h) g - s f) / det.
double full_gram_g(const Matrix& x, const Matrix& onehot, std::size_t j, std::size_t i);

struct LemmaOrderRow {
    std::uint64_t seed = 0;
    std::size_t j = 0;
    std::size_t i = 0;
    bool own_class = false;  // j == y_i
    QuadFormSet forms;
    double s_norm = 0.0;  // s * k p / n
    double t_norm = 0.0;  // t * p / (n mu^2)
    double h_norm = 0.0;  // |h| sqrt(k) p / (n mu rho)
    double f_norm = 0.0;  // |f| p / (sqrt(n) mu)
    double g_norm = 0.0;  // g p (own class) or |g| k^2 p (cross class)
};

// Normalized leave-one-out statistics over seeded GMM draws; one row per
// (seed, j, i). The normalizations target order-one values in the
// overparameterized regime. `balanced` draws exactly n/k samples per class,
// matching the near-balanced event the order statements condition on.
std::vector<LemmaOrderRow> lemma_order_check(const GmmSpec& spec, std::size_t n,
                                             std::span<const std::uint64_t> seeds,
                                             bool balanced = false);

void write_lemma_order_csv(const std::filesystem::path& path,
                           const std::vector<LemmaOrderRow>& rows);

}  // namespace interp
