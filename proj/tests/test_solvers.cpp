#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "interp/datagen.hpp"
#include "interp/equivalence.hpp"
#include "interp/errors.hpp"
#include "interp/metrics.hpp"
#include "interp/solvers.hpp"
#include "oracles.hpp"

using namespace interp;

namespace {

Matrix onehot_of(const std::vector<int>& labels, std::size_t k) {
    return onehot_from_labels(labels, k);
}

}  // namespace

TEST_CASE("simplex targets") {
    SUBCASE("k=4 entries are 3/4 and -1/4") {
        const Matrix y = onehot_of({0, 2, 1}, 4);
        const Matrix z = simplex_targets(y);
        CHECK(z(0, 0) == 0.75);
        CHECK(z(1, 0) == -0.25);
        CHECK(z(2, 1) == 0.75);
        CHECK(z(3, 2) == -0.25);
    }
    SUBCASE("k=2 entries are +-1/2") {
        const Matrix z = simplex_targets(onehot_of({0, 1}, 2));
        CHECK(z(0, 0) == 0.5);
        CHECK(z(1, 0) == -0.5);
    }
    SUBCASE("columns sum to zero") {
        for (std::size_t k : {2, 3, 5, 7}) {
            const Matrix z = simplex_targets(onehot_of({0, static_cast<int>(k) - 1}, k));
            for (std::size_t i = 0; i < 2; ++i) {
                double sum = 0.0;
                for (std::size_t c = 0; c < k; ++c) sum += z(c, i);
                CHECK(std::fabs(sum) < 1e-15);
            }
        }
    }
}

TEST_CASE("fit_mni") {
    SUBCASE("identity features reproduce the one-hot rows") {
        const Matrix x = Matrix::identity(4);
        const Matrix y = onehot_of({0, 1, 2, 0}, 3);
        const LinearClassifier clf = fit_mni(x, y);
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < 4; ++i) {
                CHECK(clf.weights(c, i) == doctest::Approx(y(c, i)).epsilon(1e-12));
            }
        }
    }
    SUBCASE("matches the normal-equations oracle") {
        const Matrix x = oracles::random_matrix(8, 3, 17);
        const Matrix y = onehot_of({0, 1, 0}, 2);
        const LinearClassifier clf = fit_mni(x, y);
        for (std::size_t c = 0; c < 2; ++c) {
            const Vector expected = oracles::mni_normal_equations(x, y.row(c));
            const Vector got = clf.weights.row(c);
            for (std::size_t j = 0; j < 8; ++j) {
                CHECK(got[j] == doctest::Approx(expected[j]).epsilon(1e-10));
            }
        }
    }
    SUBCASE("interpolates when rank(X) = n") {
        const Matrix x = oracles::random_matrix(30, 10, 23);
        const Matrix y = onehot_of({0, 1, 2, 0, 1, 2, 0, 1, 2, 0}, 3);
        const LinearClassifier clf = fit_mni(x, y);
        CHECK_FALSE(clf.info.rank_deficient);
        const Matrix scores = matmul(clf.weights, x);
        double residual = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < 10; ++i) {
                residual = std::max(residual, std::fabs(scores(c, i) - y(c, i)));
            }
        }
        CHECK(residual <= 1e-8 * std::sqrt(10.0));
    }
}

TEST_CASE("fit_mni_targets") {
    const Matrix x = oracles::random_matrix(12, 6, 31);
    const Matrix y = onehot_of({0, 1, 2, 2, 1, 0}, 3);

    SUBCASE("T = Y reproduces fit_mni") {
        const LinearClassifier a = fit_mni(x, y);
        const LinearClassifier b = fit_mni_targets(x, y);
        CHECK(max_abs_diff(a.weights, b.weights) == 0.0);
    }
    SUBCASE("affine transform of targets maps weights linearly") {
        const double alpha = 2.0, beta = 0.3;
        Matrix t(3, 6);
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t i = 0; i < 6; ++i) t(c, i) = alpha * y(c, i) + beta;
        }
        const LinearClassifier base = fit_mni(x, y);
        const LinearClassifier shifted = fit_mni_targets(x, t);
        // shift direction: X (X^T X)+ 1
        const PseudoInverse ap = pinv(gram(x));
        const Vector ones(6, 1.0);
        const Vector shift = matvec(x, ap.apply(ones));
        for (std::size_t c = 0; c < 3; ++c) {
            for (std::size_t j = 0; j < 12; ++j) {
                const double expected = alpha * base.weights(c, j) + beta * shift[j];
                CHECK(shifted.weights(c, j) == doctest::Approx(expected).epsilon(1e-9));
            }
        }
    }
    SUBCASE("simplex and one-hot targets give identical decisions") {
        const LinearClassifier a = fit_mni(x, y);
        const LinearClassifier b = fit_mni_targets(x, simplex_targets(y));
        const Matrix test = oracles::random_matrix(12, 200, 55);
        CHECK(predict_batch(a, test) == predict_batch(b, test));
    }
}

TEST_CASE("multiclass svm on a single sample") {
    // One sample, label 0: w_0^T x = (k-1)/k and w_c^T x = -1/k. Solves
    // min a^2 + (k-1) b^2 s.t. a - b = 1/||x||^2 after the usual rescaling.
    const std::size_t k = 4;
    Matrix x(3, 1);
    x(0, 0) = 1.0;
    x(1, 0) = -2.0;
    x(2, 0) = 0.5;
    const Matrix y = onehot_of({0}, k);
    auto [clf, duals] = fit_multiclass_svm(x, y);
    const Vector scores = matvec(clf.weights, x.col(0));
    CHECK(scores[0] == doctest::Approx(0.75).epsilon(1e-9));
    for (std::size_t c = 1; c < k; ++c) {
        CHECK(scores[c] == doctest::Approx(-0.25).epsilon(1e-9));
    }
    CHECK(clf.info.iterations == 0);  // warm start is optimal here
    // Dual columns certify the closed form (X^T X)+ z_c.
    const double inv_sq = 1.0 / dot(x.col(0), x.col(0));
    CHECK(duals.beta(0, 0) == doctest::Approx(0.75 * inv_sq).epsilon(1e-10));
    CHECK(duals.beta(1, 0) == doctest::Approx(-0.25 * inv_sq).epsilon(1e-10));
}

TEST_CASE("multiclass svm matches the active-set oracle on tiny instances") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const std::size_t n = 4 + seed % 3;  // 4..6
        const Matrix x = oracles::random_matrix(10, n, 100 + seed);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 3);
        const Matrix y = onehot_of(labels, 3);

        auto [clf, duals] = fit_multiclass_svm(x, y);
        const auto oracle = oracles::multiclass_svm_active_set(x, labels, 3);
        REQUIRE(oracle.found);
        const double obj = frobenius_norm(clf.weights) * frobenius_norm(clf.weights);
        CHECK(obj == doctest::Approx(oracle.objective).epsilon(1e-6));
        CHECK(max_abs_diff(clf.weights, oracle.weights) < 1e-5);

        // Dual feasibility and consistency invariants.
        const Matrix z = simplex_targets(y);
        for (std::size_t i = 0; i < n; ++i) {
            double col = 0.0;
            for (std::size_t c = 0; c < 3; ++c) {
                col += duals.beta(c, i);
                CHECK(duals.beta(c, i) * z(c, i) >= -1e-10);
            }
            CHECK(std::fabs(col) <= 1e-10);
        }
    }
}

TEST_CASE("multiclass svm warm start is exact under det-con") {
    const GmmSpec spec = GmmSpec::orthogonal(3, 400, 0.2 * std::sqrt(400.0));
    const Dataset ds = sample_gmm(spec, 16, 5);
    const DetConReport det = check_det_condition(ds.x, ds.onehot);
    REQUIRE(det.verdict);

    auto [clf, duals] = fit_multiclass_svm(ds.x, ds.onehot);
    CHECK(clf.info.iterations == 0);
    CHECK(clf.info.kkt_residual <= 1e-8);

    // Duals equal (X^T X)+ z_c columnwise.
    const PseudoInverse ap = pinv(gram(ds.x));
    const Matrix z = simplex_targets(ds.onehot);
    for (std::size_t c = 0; c < 3; ++c) {
        const Vector expected = ap.apply(z.row(c));
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(duals.beta(c, i) == doctest::Approx(expected[i]).epsilon(1e-8));
        }
    }

    // All margins active.
    const Matrix scores = matmul(clf.weights, ds.x);
    for (std::size_t i = 0; i < 16; ++i) {
        const auto yi = static_cast<std::size_t>(ds.labels[i]);
        for (std::size_t c = 0; c < 3; ++c) {
            if (c == yi) continue;
            CHECK(scores(yi, i) - scores(c, i) == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("multiclass svm complementary slackness on a non-det-con instance") {
    // Low dimension forces det-con to fail while staying separable.
    Matrix x(2, 4);
    x(0, 0) = 2.0;  x(1, 0) = 0.1;
    x(0, 1) = -1.9; x(1, 1) = 0.2;
    x(0, 2) = 0.1;  x(1, 2) = 2.2;
    x(0, 3) = 0.3;  x(1, 3) = 1.8;
    const std::vector<int> labels{0, 1, 2, 2};
    const Matrix y = onehot_of(labels, 3);

    auto [clf, duals] = fit_multiclass_svm(x, y);
    CHECK(clf.info.kkt_residual <= 1e-8);
    const Matrix z = simplex_targets(y);
    const Matrix scores = matmul(clf.weights, x);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto yi = static_cast<std::size_t>(labels[i]);
        for (std::size_t c = 0; c < 3; ++c) {
            if (c == yi) continue;
            const double margin = scores(yi, i) - scores(c, i);
            CHECK(margin >= 1.0 - 1e-7);
            const double lambda = 3.0 * duals.beta(c, i) * z(c, i);
            CHECK(lambda >= -1e-8);
            if (lambda > 1e-6) CHECK(margin == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("multiclass svm rejects non-separable data") {
    Matrix x(3, 2);
    x(0, 0) = 1.0;
    x(0, 1) = 1.0;  // identical samples, different labels
    const Matrix y = onehot_of({0, 1}, 2);
    CHECK_THROWS_AS(fit_multiclass_svm(x, y), NotSeparableError);
}

TEST_CASE("ova svm") {
    SUBCASE("binary margins match the coordinate-ascent oracle") {
        const Matrix x = oracles::random_matrix(12, 8, 77);
        std::vector<int> labels{0, 1, 0, 1, 1, 0, 0, 1};
        const Matrix y = onehot_of(labels, 2);
        const LinearClassifier clf = fit_ova_svm(x, y, Margins{1.0, -1.0});

        const Matrix a = gram(x);
        Vector t(8);
        std::vector<double> sign(8);
        for (std::size_t i = 0; i < 8; ++i) {
            t[i] = labels[i] == 0 ? 1.0 : -1.0;
            sign[i] = t[i];
        }
        const Vector nu = oracles::binary_dual_coordinate_ascent(a, t, sign);
        const Vector w_oracle = matvec(x, nu);
        const Vector w = clf.weights.row(0);
        for (std::size_t j = 0; j < 12; ++j) {
            CHECK(w[j] == doctest::Approx(w_oracle[j]).epsilon(1e-6));
        }
        CHECK(clf.kind == ClassifierKind::OvA);
    }
    SUBCASE("simplex margins equal the multiclass svm under det-con") {
        const GmmSpec spec = GmmSpec::orthogonal(4, 500, 0.2 * std::sqrt(500.0));
        const Dataset ds = sample_gmm(spec, 20, 21);
        REQUIRE(check_det_condition(ds.x, ds.onehot).verdict);
        const LinearClassifier ova = fit_ova_svm(ds.x, ds.onehot, simplex_margins(4));
        auto [svm, duals] = fit_multiclass_svm(ds.x, ds.onehot);
        CHECK(ova.kind == ClassifierKind::SimplexOvA);
        CHECK(max_abs_diff(ova.weights, svm.weights) <
              1e-5 * (1.0 + max_abs(svm.weights)));
    }
    SUBCASE("single sample hits the margins exactly") {
        Matrix x(2, 1);
        x(0, 0) = 3.0;
        x(1, 0) = 4.0;
        const Matrix y = onehot_of({0}, 2);
        const LinearClassifier clf = fit_ova_svm(x, y, Margins{1.0, -1.0});
        CHECK(dot(clf.weights.row(0), x.col(0)) == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(dot(clf.weights.row(1), x.col(0)) == doctest::Approx(-1.0).epsilon(1e-10));
    }
    SUBCASE("invalid margins rejected") {
        const Matrix x = oracles::random_matrix(4, 2, 3);
        const Matrix y = onehot_of({0, 1}, 2);
        CHECK_THROWS_AS(fit_ova_svm(x, y, Margins{-1.0, 1.0}), ConfigError);
    }
}

TEST_CASE("ovo svm") {
    SUBCASE("k=2 decisions equal the binary svm") {
        const Matrix x = oracles::random_matrix(10, 8, 41);
        std::vector<int> labels{0, 1, 0, 1, 0, 1, 0, 1};
        const Matrix y = onehot_of(labels, 2);
        const LinearClassifier ovo = fit_ovo_svm(x, y);
        const LinearClassifier binary = fit_ova_svm(x, y, Margins{1.0, -1.0});
        const Matrix test = oracles::random_matrix(10, 100, 42);
        CHECK(predict_batch(ovo, test) == predict_batch(binary, test));
    }
    SUBCASE("unanimous votes pick the winner") {
        // Well-separated 3-class data: every test point near mean 1 gets all
        // pairwise votes for class 1.
        const GmmSpec spec = GmmSpec::orthogonal(3, 40, 12.0);
        const Dataset ds = sample_gmm_balanced(spec, 30, 9);
        const LinearClassifier ovo = fit_ovo_svm(ds.x, ds.onehot);
        Vector probe(40, 0.0);
        probe[1] = 12.0;  // exactly class 1's mean
        CHECK(predict(ovo, probe) == 1);
    }
    SUBCASE("missing class raises EmptyPair") {
        const Matrix x = oracles::random_matrix(5, 3, 1);
        Matrix y(3, 3);  // class 2 never appears
        y(0, 0) = 1.0;
        y(1, 1) = 1.0;
        y(0, 2) = 1.0;
        CHECK_THROWS_AS(fit_ovo_svm(x, y), EmptyPairError);
    }
}
