#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "interp/matrix.hpp"

namespace interp {

// Gaussian mixture: P(y=c) = priors[c], x = means.col(y) + q with q standard
// normal in p dimensions.
struct GmmSpec {
    std::size_t k = 0;
    std::size_t p = 0;
    Matrix means;                 // p x k
    std::vector<double> priors;   // sums to 1

    static GmmSpec orthogonal(std::size_t k, std::size_t p, double energy);
};

// Multinomial logit: x ~ N(0, diag(spectrum)), P(y=c|x) = softmax(means^T x).
// The covariance is realized diagonally in its eigenbasis.
struct MlmSpec {
    std::size_t k = 0;
    std::size_t p = 0;
    Matrix means;                  // p x k
    std::vector<double> spectrum;  // p positive eigenvalues

    static MlmSpec isotropic(std::size_t k, std::size_t p, double energy);
};

using GenerativeModel = std::variant<GmmSpec, MlmSpec>;

// Bi-level covariance ensemble (n, m, q, r): p = round(n^m), s = round(n^r),
// a = n^-q; the spectrum has s entries a*p/s and p-s entries (1-a)*p/(p-s).
struct BilevelParams {
    std::size_t n = 0;
    double m = 0.0;
    double q = 0.0;
    double r = 0.0;

    std::size_t dim() const;        // p
    std::size_t sparsity() const;   // s
    double spike_weight() const;    // a
    void validate() const;          // throws InvalidRegimeError
};

std::vector<double> bilevel_spectrum(const BilevelParams& params);

// Bi-level MLM with k orthogonal unit-signal means mu_c = e_c / sqrt(lambda_H)
// occupying the first k spike coordinates (requires k <= s).
MlmSpec bilevel_mlm_spec(const BilevelParams& params, std::size_t k);

struct Dataset {
    Matrix x;                  // p x n
    std::vector<int> labels;   // n entries in [0, k)
    Matrix onehot;             // k x n
    std::uint64_t seed = 0;
    std::string provenance;
};

Matrix onehot_from_labels(const std::vector<int>& labels, std::size_t k);

// Columns energy * e_c of the standard basis; pairwise orthogonal with equal
// norms. Any orthonormal choice is equivalent by rotation invariance.
Matrix orthogonal_means(std::size_t k, std::size_t p, double energy);

Dataset sample_gmm(const GmmSpec& spec, std::size_t n, std::uint64_t seed);

// Exactly balanced class counts (round-robin labels); noise drawn from the
// same per-sample streams as sample_gmm.
Dataset sample_gmm_balanced(const GmmSpec& spec, std::size_t n, std::uint64_t seed);

Dataset sample_mlm(const MlmSpec& spec, std::size_t n, std::uint64_t seed);

// Neural-collapse feature set: mean matrix M = alpha*sqrt(k/n)*U(I - 11^T/k)
// with U the first k standard basis columns, and X = [M, M, ..., M]
// (samples_per_class copies, n = k * samples_per_class). Every sample equals
// its class mean exactly.
Dataset neural_collapse_features(std::size_t k, std::size_t samples_per_class, std::size_t p,
                                 double alpha);

// CSV layout: header "# p,n,k,seed", then one row per sample: label followed
// by p feature values at 17 significant digits.
void write_dataset_csv(const std::filesystem::path& path, const Dataset& ds);
Dataset read_dataset_csv(const std::filesystem::path& path);

}  // namespace interp
