#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "interp/matrix.hpp"

namespace interp {

enum class ClassifierKind { MNI, MulticlassSVM, SimplexOvA, OvA, OvO };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_kind_from_string(const std::string& name);

struct FitInfo {
    std::size_t iterations = 0;
    double duality_gap = 0.0;
    double kkt_residual = 0.0;
    bool rank_deficient = false;
};

struct LinearClassifier {
    Matrix weights;  // k x p (empty for OvO)
    ClassifierKind kind = ClassifierKind::MNI;
    FitInfo info;

    // OvO only: one row per class pair, matching `pairs`.
    Matrix pairwise_weights;
    std::vector<std::pair<int, int>> pairs;
};

// Reparameterized dual variables of the multiclass SVM: row c holds beta_c.
struct DualVariables {
    Matrix beta;  // k x n
};

struct SvmOptions {
    double tol = 1e-8;          // KKT residual target (relative)
    std::size_t max_iters = 0;  // 0 selects max(50*n*k, 2000)
    double active_tol = 1e-6;   // absolute margin tolerance for "active"
};

struct Margins {
    double positive = 1.0;
    double negative = -1.0;
};

Margins simplex_margins(std::size_t k);

struct NotSeparableError : std::runtime_error {
    explicit NotSeparableError(const std::string& what, int class_index = -1)
        : std::runtime_error(what), class_index(class_index) {}
    int class_index;  // -1 when not tied to a single binary subproblem
};

struct UnconvergedError : std::runtime_error {
    UnconvergedError(const std::string& what, LinearClassifier best, double gap)
        : std::runtime_error(what), best(std::move(best)), gap(gap) {}
    LinearClassifier best;
    double gap;
};

// Z = Y - (1/k) * ones; entries (k-1)/k at the labeled class and -1/k elsewhere.
Matrix simplex_targets(const Matrix& onehot);

// Minimum-norm interpolator of the one-hot targets: w_c = X (X^T X)+ v_c.
LinearClassifier fit_mni(const Matrix& x, const Matrix& onehot);

// Minimum-norm interpolator of arbitrary target rows (simplex or affine maps
// alpha*v_c + beta*1 of the one-hot rows).
LinearClassifier fit_mni_targets(const Matrix& x, const Matrix& targets);

// Multiclass SVM through the beta-parameterized dual
//   max sum_c beta_c^T z_c - 1/2 ||X beta_c||^2
//   s.t. sum_c beta_{c,i} = 0 per sample, beta_c (.) z_c >= 0,
// solved by projected gradient ascent (FISTA steps, exact per-sample
// projection). Warm-started at (X^T X)+ z_c, which is optimal whenever the
// deterministic sign condition holds. Terminates on a verified KKT residual.
std::pair<LinearClassifier, DualVariables> fit_multiclass_svm(const Matrix& x,
                                                              const Matrix& onehot,
                                                              const SvmOptions& opts = {});

// One-vs-all max-margin with configurable margins: for every class c,
//   min ||w||  s.t.  w^T x_i >= pos (y_i = c),  w^T x_i <= neg (otherwise).
// Margins (1, -1) give the classical OvA-SVM; simplex_margins(k) gives the
// simplex OvA classifier that matches the multiclass SVM under the
// deterministic condition.
LinearClassifier fit_ova_svm(const Matrix& x, const Matrix& onehot, const Margins& margins,
                             const SvmOptions& opts = {});

// One-vs-one: k(k-1)/2 binary max-margin classifiers with margins (1, -1);
// prediction is by majority vote with ties resolved toward the lowest index.
LinearClassifier fit_ovo_svm(const Matrix& x, const Matrix& onehot, const SvmOptions& opts = {});

}  // namespace interp
