#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "interp/datagen.hpp"
#include "interp/equivalence.hpp"
#include "interp/errors.hpp"
#include "interp/metrics.hpp"
#include "interp/rng.hpp"
#include "oracles.hpp"

using namespace interp;

TEST_CASE("predict basics") {
    LinearClassifier clf;
    clf.weights = Matrix::identity(3);
    SUBCASE("argmax picks the active row") {
        Vector x{0.0, 1.0, 0.0};
        CHECK(predict(clf, x) == 1);
    }
    SUBCASE("exact ties resolve to the lowest index") {
        Vector x{0.0, 0.0, 0.0};
        CHECK(predict(clf, x) == 0);
    }
    SUBCASE("ovo majority vote") {
        LinearClassifier ovo;
        ovo.kind = ClassifierKind::OvO;
        ovo.pairs = {{0, 1}, {0, 2}, {1, 2}};
        ovo.pairwise_weights = Matrix(3, 2);
        // w_{01} = -e1 (votes 1), w_{02} = -e1 (votes 2 ... wait, votes by sign)
        ovo.pairwise_weights(0, 0) = -1.0;  // pair (0,1): score<0 -> vote 1
        ovo.pairwise_weights(1, 0) = -1.0;  // pair (0,2): score<0 -> vote 2
        ovo.pairwise_weights(2, 0) = 1.0;   // pair (1,2): score>0 -> vote 1
        Vector x{1.0, 0.0};
        CHECK(predict(ovo, x) == 1);  // class 1 gets two votes
    }
}

TEST_CASE("mc_error matches the Gaussian Q oracle for the Bayes classifier") {
    // Orthogonal equal-energy means with ||mu1 - mu2|| = 4 give error Q(2).
    const double energy = 2.0 * std::numbers::sqrt2;
    const GmmSpec spec = GmmSpec::orthogonal(2, 4, energy);
    LinearClassifier bayes;
    bayes.weights = transpose(spec.means);
    const GenerativeModel model = spec;
    const ErrorEstimate est = mc_error(bayes, model, 100000, 2024);
    const double expected = oracles::q_function(2.0);
    CHECK(std::fabs(est.total - expected) <= 3.0 * est.se_total + 1e-12);
}

TEST_CASE("zero weights predict class 0 everywhere") {
    const GmmSpec spec = GmmSpec::orthogonal(4, 6, 1.0);
    LinearClassifier clf;
    clf.weights = Matrix(4, 6);
    const GenerativeModel model = spec;
    const ErrorEstimate est = mc_error(clf, model, 8000, 5);
    CHECK(est.per_class[0] == 0.0);
    for (std::size_t c = 1; c < 4; ++c) CHECK(est.per_class[c] == 1.0);
    CHECK(est.total == doctest::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("mc_error is deterministic and classifier-independent in its stream") {
    const GmmSpec spec = GmmSpec::orthogonal(3, 10, 2.0);
    const GenerativeModel model = spec;
    LinearClassifier a;
    a.weights = transpose(spec.means);
    const ErrorEstimate e1 = mc_error(a, model, 3000, 77);
    const ErrorEstimate e2 = mc_error(a, model, 3000, 77);
    CHECK(e1.total == e2.total);
    CHECK(e1.per_class == e2.per_class);
}

TEST_CASE("decision invariance: SVM and MNI share every prediction under det-con") {
    const GmmSpec spec = GmmSpec::orthogonal(3, 300, 0.2 * std::sqrt(300.0));
    const Dataset ds = sample_gmm(spec, 15, 99);
    REQUIRE(check_det_condition(ds.x, ds.onehot).verdict);
    auto [svm, duals] = fit_multiclass_svm(ds.x, ds.onehot);
    const LinearClassifier mni = fit_mni(ds.x, ds.onehot);
    const GenerativeModel model = spec;
    const ErrorEstimate err_svm = mc_error(svm, model, 5000, 1234);
    const ErrorEstimate err_mni = mc_error(mni, model, 5000, 1234);
    CHECK(err_svm.total == err_mni.total);  // shared stream, identical decisions
    CHECK(err_svm.per_class == err_mni.per_class);
}

TEST_CASE("gmm_bound_rate") {
    SUBCASE("vacuous when the positivity condition fails") {
        CHECK(gmm_bound_rate(100, 120, 4, 0.1) == 1.0);
    }
    SUBCASE("decays to zero for huge signal") {
        CHECK(gmm_bound_rate(100, 10000, 4, 1e4) < 1e-12);
    }
    SUBCASE("monotone decreasing in mu past the positivity threshold") {
        double prev = 2.0;
        bool entered = false;
        for (double mu = 0.5; mu < 60.0; mu *= 1.3) {
            const double rate = gmm_bound_rate(64, 4096, 3, mu);
            if (rate < 1.0) {
                if (entered) CHECK(rate <= prev + 1e-15);
                entered = true;
                prev = rate;
            }
        }
        CHECK(entered);
    }
    SUBCASE("non-decreasing in p/n when mu^2 <= k p / n") {
        const double mu = 3.0;
        double prev = -1.0;
        for (std::size_t p = 2000; p <= 30000; p += 4000) {
            // k p / n = 4 p / 50 >= mu^2 = 9 throughout.
            const double rate = gmm_bound_rate(50, p, 4, mu);
            if (prev >= 0.0) CHECK(rate >= prev - 1e-15);
            prev = rate;
        }
    }
}

TEST_CASE("gmm pairwise Q bound tracks Monte Carlo for the Bayes classifier") {
    const GmmSpec spec = GmmSpec::orthogonal(3, 5, 2.5);
    LinearClassifier bayes;
    bayes.weights = transpose(spec.means);
    const std::vector<double> bound = gmm_pairwise_q_bound(bayes, spec.means);
    const GenerativeModel model = spec;
    const ErrorEstimate est = mc_error(bayes, model, 50000, 31);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(est.per_class[c] <= bound[c] + 3.0 * est.se_class[c]);
    }
}

TEST_CASE("su_cn") {
    SUBCASE("perfect recovery has no contamination") {
        const Vector delta{1.0, -2.0, 0.5};
        const Vector lambda{1.0, 2.0, 4.0};
        const SuCn sc = su_cn(delta, delta, lambda);
        CHECK(sc.cn == doctest::Approx(0.0));
        double ee = 0.0;
        for (std::size_t i = 0; i < 3; ++i) ee += lambda[i] * delta[i] * delta[i];
        CHECK(sc.su == doctest::Approx(std::sqrt(ee)).epsilon(1e-12));
        CHECK(sign_disagreement_probability(sc) == doctest::Approx(0.0));
    }
    SUBCASE("orthogonal recovery has no survival") {
        const Vector delta{1.0, 0.0};
        const Vector delta_hat{0.0, 2.0};
        const Vector lambda{1.0, 1.0};
        const SuCn sc = su_cn(delta_hat, delta, lambda);
        CHECK(sc.su == doctest::Approx(0.0));
        CHECK(sc.cn == doctest::Approx(2.0));
        CHECK(sign_disagreement_probability(sc) == doctest::Approx(0.5));
    }
    SUBCASE("pythagoras") {
        const Vector delta = oracles::random_matrix(6, 1, 5).data();
        const Vector delta_hat = oracles::random_matrix(6, 1, 6).data();
        Vector lambda(6);
        SplitMix64 rng(7);
        for (double& v : lambda) v = 0.5 + rng.next_double();
        const SuCn sc = su_cn(delta_hat, delta, lambda);
        double hh = 0.0;
        for (std::size_t i = 0; i < 6; ++i) hh += lambda[i] * delta_hat[i] * delta_hat[i];
        CHECK(sc.su * sc.su + sc.cn * sc.cn == doctest::Approx(hh).epsilon(1e-9));
    }
    SUBCASE("Monte Carlo agreement with the arctan law") {
        for (std::uint64_t seed : {11ull, 12ull}) {
            SplitMix64 rng(seed);
            const std::size_t p = 5;
            Vector delta(p), delta_hat(p), lambda(p);
            for (std::size_t i = 0; i < p; ++i) {
                delta[i] = rng.next_normal();
                delta_hat[i] = rng.next_normal();
                lambda[i] = 0.5 + 1.5 * rng.next_double();
            }
            const SuCn sc = su_cn(delta_hat, delta, lambda);
            const double formula = sign_disagreement_probability(sc);

            std::size_t hits = 0;
            const std::size_t trials = 200000;
            for (std::size_t t = 0; t < trials; ++t) {
                SplitMix64 sample_rng(derive_stream(seed, t));
                double a = 0.0, b = 0.0;
                for (std::size_t i = 0; i < p; ++i) {
                    const double x = std::sqrt(lambda[i]) * sample_rng.next_normal();
                    a += x * delta[i];
                    b += x * delta_hat[i];
                }
                if (a * b < 0.0) ++hits;
            }
            const double mc = static_cast<double>(hits) / static_cast<double>(trials);
            CHECK(std::fabs(mc - formula) < 0.01);
        }
    }
    SUBCASE("zero signal rejected") {
        const Vector zero{0.0, 0.0};
        const Vector any{1.0, 1.0};
        const Vector lambda{1.0, 1.0};
        CHECK_THROWS_AS(su_cn(any, zero, lambda), ZeroSignalError);
    }
}

TEST_CASE("mlm excess risk") {
    const MlmSpec spec = MlmSpec::isotropic(3, 40, 3.0);
    SUBCASE("Bayes weights give zero excess") {
        LinearClassifier bayes;
        bayes.weights = transpose(spec.means);
        const MlmExcessRisk risk = mlm_excess_risk(bayes, spec, 20000, 17);
        CHECK(std::fabs(risk.excess) <= 3.0 * risk.se_excess + 1e-12);
    }
    SUBCASE("pairwise bound dominates the excess for a fitted classifier") {
        const Dataset ds = sample_mlm(spec, 25, 3);
        const LinearClassifier mni = fit_mni(ds.x, ds.onehot);
        const MlmExcessRisk risk = mlm_excess_risk(mni, spec, 20000, 29);
        CHECK(risk.pairwise_bound >= risk.excess - 3.0 * risk.se_excess);
    }
    SUBCASE("k=2 reduces to a single arctan term") {
        const MlmSpec binary = MlmSpec::isotropic(2, 20, 2.0);
        const Dataset ds = sample_mlm(binary, 15, 5);
        const LinearClassifier mni = fit_mni(ds.x, ds.onehot);
        const MlmExcessRisk risk = mlm_excess_risk(mni, binary, 5000, 7);
        Vector delta(20), delta_hat(20);
        for (std::size_t j = 0; j < 20; ++j) {
            delta[j] = binary.means(j, 0) - binary.means(j, 1);
            delta_hat[j] = mni.weights(0, j) - mni.weights(1, j);
        }
        const double single =
            sign_disagreement_probability(su_cn(delta_hat, delta, binary.spectrum));
        CHECK(risk.pairwise_bound == doctest::Approx(single).epsilon(1e-12));
    }
}

TEST_CASE("bilevel rate exponents against hand-derived branch values") {
    SUBCASE("q below 1-r") {
        const BilevelRates r = bilevel_rate_exponents(BilevelParams{16, 2.0, 0.25, 0.5});
        CHECK(r.su_exponent == doctest::Approx(0.0));
        CHECK(r.cn_exponent == doctest::Approx(-0.25));
        CHECK(r.snr_exponent == doctest::Approx(0.25));
        CHECK(r.consistent);
    }
    SUBCASE("q above 1-r") {
        const BilevelRates r = bilevel_rate_exponents(BilevelParams{16, 2.0, 0.75, 0.5});
        CHECK(r.su_exponent == doctest::Approx(-0.25));
        // min(m-1, 2q+r-1) = min(1, 1) = 1
        CHECK(r.cn_exponent == doctest::Approx(-0.5));
        CHECK(r.snr_exponent == doctest::Approx(0.25));
        CHECK(r.consistent);
    }
    SUBCASE("boundary q = (1-r) + (m-1)/2 is not consistent") {
        const BilevelRates r = bilevel_rate_exponents(BilevelParams{16, 1.5, 1.25, 0.0});
        CHECK(r.snr_exponent == doctest::Approx(0.0));
        CHECK_FALSE(r.consistent);
    }
    SUBCASE("invalid regime") {
        CHECK_THROWS_AS(bilevel_rate_exponents(BilevelParams{16, 2.0, 2.5, 0.5}),
                        InvalidRegimeError);
    }
}
