#include "interp/equivalence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "interp/errors.hpp"
#include "interp/metrics.hpp"
#include "interp/rng.hpp"

namespace interp {

DetConReport check_det_condition(const Matrix& x, const Matrix& onehot,
                                 const DetConOptions& opts) {
    const std::size_t k = onehot.rows();
    const std::size_t n = onehot.cols();
    const Matrix z = simplex_targets(onehot);
    const PseudoInverse ap = pinv(gram(x));

    DetConReport report;
    report.values = Matrix(k, n);
    report.min_value = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        const Vector zc = z.row(c);
        const Vector azc = ap.apply(zc);
        for (std::size_t i = 0; i < n; ++i) {
            const double q = zc[i] * azc[i];
            report.values(c, i) = q;
            if (std::fabs(q) < opts.marginal_guard) ++report.marginal_count;
            if (q < report.min_value) {
                report.min_value = q;
                report.argmin_class = c;
                report.argmin_sample = i;
            }
        }
    }
    report.verdict = report.min_value > opts.strict_tol && report.marginal_count == 0;
    return report;
}

InterpolationReport interpolation_fraction(const Matrix& weights, const Matrix& x,
                                           const Matrix& onehot, double tol) {
    const std::size_t n = x.cols();
    const Matrix z = simplex_targets(onehot);
    const Matrix scores = matmul(weights, x);  // k x n

    InterpolationReport report;
    report.flags.assign(n, 0);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double worst = 0.0;
        for (std::size_t c = 0; c < weights.rows(); ++c) {
            worst = std::max(worst, std::fabs(scores(c, i) - z(c, i)));
        }
        report.max_residual = std::max(report.max_residual, worst);
        if (worst <= tol) {
            report.flags[i] = 1;
            ++hits;
        }
    }
    report.fraction = n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
    return report;
}

namespace {

Matrix sample_test_points(const GenerativeModel& model, std::size_t n_test, std::uint64_t seed) {
    if (const auto* gmm = std::get_if<GmmSpec>(&model)) {
        return sample_gmm(*gmm, n_test, seed).x;
    }
    const auto& mlm = std::get<MlmSpec>(model);
    return sample_mlm(mlm, n_test, seed).x;
}

}  // namespace

EquivalenceReport certify_equivalence(const Matrix& x, const Matrix& onehot, double tol,
                                      const GenerativeModel* model, std::size_t n_test,
                                      std::uint64_t seed) {
    EquivalenceReport report;
    const DetConReport det = check_det_condition(x, onehot);
    report.det_con = det.verdict;
    report.det_con_min = det.min_value;

    auto [svm, duals] = fit_multiclass_svm(x, onehot);
    (void)duals;
    const LinearClassifier mni_z = fit_mni_targets(x, simplex_targets(onehot));
    const LinearClassifier mni = fit_mni(x, onehot);
    report.svm_info = svm.info;

    double gap_sq = 0.0;
    for (std::size_t idx = 0; idx < svm.weights.data().size(); ++idx) {
        const double d = svm.weights.data()[idx] - mni_z.weights.data()[idx];
        gap_sq += d * d;
    }
    report.max_weight_gap = std::sqrt(gap_sq);
    report.svm_equals_mni =
        report.max_weight_gap <= tol * (1.0 + frobenius_norm(svm.weights));

    const Matrix test = model != nullptr ? sample_test_points(*model, n_test, seed) : x;
    const std::vector<int> pred_svm = predict_batch(svm, test);
    const std::vector<int> pred_mni = predict_batch(mni, test);
    report.n_compared = test.cols();
    for (std::size_t i = 0; i < test.cols(); ++i) {
        if (pred_svm[i] != pred_mni[i]) ++report.disagreements;
    }
    report.decision_agreement = report.disagreements == 0;
    return report;
}

bool sufficient_condition_gmm(std::size_t n, std::size_t p, std::size_t k, double mu_norm,
                              double c1, double c2) {
    const double nn = static_cast<double>(n);
    const double pp = static_cast<double>(p);
    const double kk = static_cast<double>(k);
    const bool dim_ok = pp > c1 * kk * kk * kk * nn * std::log(kk * nn) + nn - 1.0;
    const bool snr_ok = pp > c2 * std::pow(kk, 1.5) * nn * std::sqrt(nn) * mu_norm;
    return dim_ok && snr_ok;
}

EffectiveDims effective_dimensions(std::span<const double> spectrum) {
    double l1 = 0.0;
    double l2_sq = 0.0;
    double linf = 0.0;
    for (double v : spectrum) {
        l1 += v;
        l2_sq += v * v;
        linf = std::max(linf, std::fabs(v));
    }
    EffectiveDims dims;
    dims.d2 = l2_sq > 0.0 ? l1 * l1 / l2_sq : 0.0;
    dims.d_inf = linf > 0.0 ? l1 / linf : 0.0;
    return dims;
}

bool sufficient_condition_mlm(std::size_t n, std::size_t k, std::span<const double> spectrum,
                              double c1, double c2) {
    const EffectiveDims dims = effective_dimensions(spectrum);
    const double nn = static_cast<double>(n);
    const double kk = static_cast<double>(k);
    return dims.d_inf > c1 * kk * kk * nn * std::log(kk * nn) &&
           dims.d2 > c2 * (std::log(kk * nn) + nn);
}

}  // namespace interp
