#include "interp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "interp/errors.hpp"
#include "interp/rng.hpp"

namespace interp {

namespace {

int argmax_lowest(std::span<const double> scores) {
    int best = 0;
    for (std::size_t j = 1; j < scores.size(); ++j) {
        if (scores[j] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(j);
    }
    return best;
}

int predict_ovo(const LinearClassifier& clf, std::span<const double> x) {
    std::size_t k = 0;
    for (const auto& [a, b] : clf.pairs) k = std::max({k, std::size_t(a) + 1, std::size_t(b) + 1});
    std::vector<int> votes(k, 0);
    for (std::size_t r = 0; r < clf.pairs.size(); ++r) {
        const Vector w = clf.pairwise_weights.row(r);
        const double score = dot(w, x);
        const auto& [a, b] = clf.pairs[r];
        ++votes[static_cast<std::size_t>(score >= 0.0 ? a : b)];
    }
    int best = 0;
    for (std::size_t c = 1; c < k; ++c) {
        if (votes[c] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    return best;
}

}  // namespace

int predict(const LinearClassifier& clf, std::span<const double> x) {
    if (clf.kind == ClassifierKind::OvO) return predict_ovo(clf, x);
    if (x.size() != clf.weights.cols()) throw DimMismatchError("predict: dimension mismatch");
    const Vector scores = matvec(clf.weights, x);
    return argmax_lowest(scores);
}

std::vector<int> predict_batch(const LinearClassifier& clf, const Matrix& x) {
    std::vector<int> out(x.cols());
    if (clf.kind == ClassifierKind::OvO) {
        for (std::size_t i = 0; i < x.cols(); ++i) out[i] = predict_ovo(clf, x.col(i));
        return out;
    }
    const Matrix scores = matmul(clf.weights, x);  // k x n_test
    for (std::size_t i = 0; i < x.cols(); ++i) out[i] = argmax_lowest(scores.col(i));
    return out;
}

namespace {

// Largest-remainder allocation of n_test across the priors.
std::vector<std::size_t> stratified_counts(const std::vector<double>& priors, std::size_t n_test) {
    const std::size_t k = priors.size();
    std::vector<std::size_t> counts(k);
    std::vector<std::pair<double, std::size_t>> remainders(k);
    std::size_t assigned = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const double exact = priors[c] * static_cast<double>(n_test);
        counts[c] = static_cast<std::size_t>(std::floor(exact));
        assigned += counts[c];
        remainders[c] = {exact - std::floor(exact), c};
    }
    std::stable_sort(remainders.begin(), remainders.end(), [](const auto& l, const auto& r) {
        return l.first > r.first;
    });
    for (std::size_t j = 0; assigned < n_test; ++j, ++assigned) ++counts[remainders[j % k].second];
    return counts;
}

ErrorEstimate mc_error_gmm(const LinearClassifier& clf, const GmmSpec& spec, std::size_t n_test,
                           std::uint64_t seed) {
    const std::size_t k = spec.k;
    ErrorEstimate est;
    est.n_test = n_test;
    est.per_class.assign(k, 0.0);
    est.se_class.assign(k, 0.0);
    est.class_counts = stratified_counts(spec.priors, n_test);

    Vector x(spec.p);
    std::size_t global = 0;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t wrong = 0;
        auto mu = spec.means.col(c);
        for (std::size_t s = 0; s < est.class_counts[c]; ++s, ++global) {
            SplitMix64 rng(derive_stream(seed, global));
            for (std::size_t j = 0; j < spec.p; ++j) x[j] = mu[j] + rng.next_normal();
            if (predict(clf, x) != static_cast<int>(c)) ++wrong;
        }
        const double m = static_cast<double>(std::max<std::size_t>(est.class_counts[c], 1));
        est.per_class[c] = static_cast<double>(wrong) / m;
        est.se_class[c] = std::sqrt(est.per_class[c] * (1.0 - est.per_class[c]) / m);
    }
    double total = 0.0;
    double var = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        total += spec.priors[c] * est.per_class[c];
        var += spec.priors[c] * spec.priors[c] * est.se_class[c] * est.se_class[c];
    }
    est.total = total;
    est.se_total = std::sqrt(var);
    return est;
}

ErrorEstimate mc_error_mlm(const LinearClassifier& clf, const MlmSpec& spec, std::size_t n_test,
                           std::uint64_t seed) {
    const std::size_t k = spec.k;
    ErrorEstimate est;
    est.n_test = n_test;
    est.per_class.assign(k, 0.0);
    est.se_class.assign(k, 0.0);
    est.class_counts.assign(k, 0);

    Vector sqrt_lambda(spec.p);
    for (std::size_t j = 0; j < spec.p; ++j) sqrt_lambda[j] = std::sqrt(spec.spectrum[j]);

    Vector x(spec.p);
    std::vector<double> probs(k);
    std::vector<std::size_t> wrong(k, 0);
    std::size_t wrong_total = 0;
    for (std::size_t i = 0; i < n_test; ++i) {
        SplitMix64 rng(derive_stream(seed, i));
        for (std::size_t j = 0; j < spec.p; ++j) x[j] = sqrt_lambda[j] * rng.next_normal();
        Vector logits = tmatvec(spec.means, x);
        const double top = *std::max_element(logits.begin(), logits.end());
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            probs[c] = std::exp(logits[c] - top);
            sum += probs[c];
        }
        const double u = rng.next_double() * sum;
        double cum = 0.0;
        int label = static_cast<int>(k) - 1;
        for (std::size_t c = 0; c < k; ++c) {
            cum += probs[c];
            if (cum >= u) {
                label = static_cast<int>(c);
                break;
            }
        }
        ++est.class_counts[static_cast<std::size_t>(label)];
        if (predict(clf, x) != label) {
            ++wrong[static_cast<std::size_t>(label)];
            ++wrong_total;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        const double m = static_cast<double>(std::max<std::size_t>(est.class_counts[c], 1));
        est.per_class[c] = static_cast<double>(wrong[c]) / m;
        est.se_class[c] = std::sqrt(est.per_class[c] * (1.0 - est.per_class[c]) / m);
    }
    est.total = static_cast<double>(wrong_total) / static_cast<double>(n_test);
    est.se_total = std::sqrt(est.total * (1.0 - est.total) / static_cast<double>(n_test));
    return est;
}

}  // namespace

ErrorEstimate mc_error(const LinearClassifier& clf, const GenerativeModel& model,
                       std::size_t n_test, std::uint64_t seed) {
    if (const auto* gmm = std::get_if<GmmSpec>(&model)) {
        return mc_error_gmm(clf, *gmm, n_test, seed);
    }
    return mc_error_mlm(clf, std::get<MlmSpec>(model), n_test, seed);
}

double q_function(double x) {
    return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double gmm_bound_rate(std::size_t n, std::size_t p, std::size_t k, double mu_norm,
                      const GmmBoundConstants& constants) {
    const double nn = static_cast<double>(n);
    const double pp = static_cast<double>(p);
    const double kk = static_cast<double>(k);
    const double inner = (1.0 - constants.c1 / std::sqrt(nn) - constants.c2 * nn / pp) * mu_norm -
                         constants.c3 * std::min(std::sqrt(kk), std::sqrt(std::log(2.0 * nn)));
    if (inner <= 0.0) return 1.0;  // vacuous regime
    const double denom = constants.c4 * (1.0 + kk * pp / (nn * mu_norm * mu_norm));
    const double rate = (kk - 1.0) * std::exp(-mu_norm * mu_norm * inner * inner / denom);
    return std::clamp(rate, 0.0, 1.0);
}

std::vector<double> gmm_pairwise_q_bound(const LinearClassifier& clf, const Matrix& means) {
    const std::size_t k = clf.weights.rows();
    std::vector<double> bounds(k, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        const Vector wc = clf.weights.row(c);
        double total = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == c) continue;
            const Vector wj = clf.weights.row(j);
            Vector diff(wc.size());
            for (std::size_t l = 0; l < wc.size(); ++l) diff[l] = wc[l] - wj[l];
            const double denom = norm2(diff);
            total += denom == 0.0 ? 0.5 : q_function(dot(diff, means.col(c)) / denom);
        }
        bounds[c] = std::min(total, 1.0);
    }
    return bounds;
}

SuCn su_cn(std::span<const double> delta_hat, std::span<const double> delta,
           std::span<const double> spectrum) {
    if (delta_hat.size() != delta.size() || delta.size() != spectrum.size()) {
        throw DimMismatchError("su_cn: dimension mismatch");
    }
    double ee = 0.0;    // ||Sigma^(1/2) delta||^2
    double eh = 0.0;    // <Sigma^(1/2) delta_hat, Sigma^(1/2) delta>
    double hh = 0.0;    // ||Sigma^(1/2) delta_hat||^2
    for (std::size_t j = 0; j < delta.size(); ++j) {
        const double l = spectrum[j];
        ee += l * delta[j] * delta[j];
        eh += l * delta_hat[j] * delta[j];
        hh += l * delta_hat[j] * delta_hat[j];
    }
    if (ee == 0.0) throw ZeroSignalError("su_cn: ||Sigma^(1/2) delta|| is zero");
    SuCn out;
    out.su = eh / std::sqrt(ee);
    out.cn = std::sqrt(std::max(0.0, hh - out.su * out.su));
    return out;
}

double sign_disagreement_probability(const SuCn& sc) {
    return 0.5 - std::atan2(sc.su, sc.cn) / std::numbers::pi;
}

double mlm_pairwise_bound(const LinearClassifier& clf, const MlmSpec& spec) {
    const std::size_t k = spec.k;
    Vector delta(spec.p);
    Vector delta_hat(spec.p);
    double bound = 0.0;
    for (std::size_t c1 = 0; c1 < k; ++c1) {
        const Vector w1 = clf.weights.row(c1);
        auto mu1 = spec.means.col(c1);
        for (std::size_t c2 = c1 + 1; c2 < k; ++c2) {
            const Vector w2 = clf.weights.row(c2);
            auto mu2 = spec.means.col(c2);
            for (std::size_t j = 0; j < spec.p; ++j) {
                delta[j] = mu1[j] - mu2[j];
                delta_hat[j] = w1[j] - w2[j];
            }
            bound += sign_disagreement_probability(su_cn(delta_hat, delta, spec.spectrum));
        }
    }
    return bound;
}

MlmExcessRisk mlm_excess_risk(const LinearClassifier& clf, const MlmSpec& spec,
                              std::size_t n_test, std::uint64_t seed) {
    LinearClassifier bayes;
    bayes.kind = ClassifierKind::MNI;
    bayes.weights = transpose(spec.means);  // optimal MLM classifier: w_c = mu_c

    const GenerativeModel model = spec;
    const ErrorEstimate err = mc_error(clf, model, n_test, seed);
    const ErrorEstimate err_bayes = mc_error(bayes, model, n_test, seed);

    MlmExcessRisk out;
    out.error = err.total;
    out.bayes = err_bayes.total;
    out.excess = err.total - err_bayes.total;
    out.se_excess = std::hypot(err.se_total, err_bayes.se_total);
    out.pairwise_bound = mlm_pairwise_bound(clf, spec);
    return out;
}

BilevelRates bilevel_rate_exponents(const BilevelParams& params) {
    params.validate();
    const double one_minus_r = 1.0 - params.r;
    BilevelRates out;
    if (params.q <= one_minus_r) {
        // Survival saturates at a constant; contamination decays.
        out.su_exponent = 0.0;
        out.cn_exponent = -0.5 * std::min(params.m - 1.0, one_minus_r);
    } else {
        out.su_exponent = one_minus_r - params.q;
        out.cn_exponent = -0.5 * std::min(params.m - 1.0, 2.0 * params.q + params.r - 1.0);
    }
    out.snr_exponent = out.su_exponent - out.cn_exponent;
    out.consistent = params.q < one_minus_r + 0.5 * (params.m - 1.0);
    return out;
}

}  // namespace interp
