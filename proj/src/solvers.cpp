#include "interp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "interp/errors.hpp"

namespace interp {

std::string to_string(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::MNI: return "mni";
        case ClassifierKind::MulticlassSVM: return "multiclass-svm";
        case ClassifierKind::SimplexOvA: return "simplex-ova";
        case ClassifierKind::OvA: return "ova";
        case ClassifierKind::OvO: return "ovo";
    }
    return "unknown";
}

ClassifierKind classifier_kind_from_string(const std::string& name) {
    if (name == "mni") return ClassifierKind::MNI;
    if (name == "svm" || name == "multiclass-svm") return ClassifierKind::MulticlassSVM;
    if (name == "simplex-ova") return ClassifierKind::SimplexOvA;
    if (name == "ova") return ClassifierKind::OvA;
    if (name == "ovo") return ClassifierKind::OvO;
    throw ConfigError("unknown classifier kind: " + name);
}

Margins simplex_margins(std::size_t k) {
    const double kk = static_cast<double>(k);
    return {(kk - 1.0) / kk, -1.0 / kk};
}

Matrix simplex_targets(const Matrix& onehot) {
    const std::size_t k = onehot.rows();
    const std::size_t n = onehot.cols();
    Matrix z(k, n);
    const double off = -1.0 / static_cast<double>(k);
    const double on = (static_cast<double>(k) - 1.0) / static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < k; ++c) z(c, i) = onehot(c, i) == 1.0 ? on : off;
    }
    return z;
}

namespace {

std::vector<int> labels_from_onehot(const Matrix& onehot) {
    std::vector<int> labels(onehot.cols(), -1);
    for (std::size_t i = 0; i < onehot.cols(); ++i) {
        for (std::size_t c = 0; c < onehot.rows(); ++c) {
            if (onehot(c, i) == 1.0) {
                labels[i] = static_cast<int>(c);
                break;
            }
        }
        if (labels[i] < 0) throw DimMismatchError("onehot matrix has a column without a 1");
    }
    return labels;
}

LinearClassifier mni_from_targets(const Matrix& x, const Matrix& targets, ClassifierKind kind) {
    if (targets.cols() != x.cols()) throw DimMismatchError("fit_mni: target/sample count mismatch");
    const std::size_t k = targets.rows();
    const std::size_t p = x.rows();
    const std::size_t n = x.cols();

    const Matrix a = gram(x);
    const PseudoInverse ap = pinv(a);

    LinearClassifier clf;
    clf.kind = kind;
    clf.weights = Matrix(k, p);
    for (std::size_t c = 0; c < k; ++c) {
        const Vector target = targets.row(c);
        const Vector coeff = ap.apply(target);
        const Vector w = matvec(x, coeff);
        clf.weights.set_row(c, w);
    }
    clf.info.rank_deficient = ap.rank() < n;
    return clf;
}

// Euclidean projection of one sample column onto
//   { u in R^k : sum_c u_c = 0, u_c <= 0 for c != label }.
// The shifted coordinates are u_label = x_label + lam and
// u_c = min(0, x_c + lam); the unique lam zeroing the sum is found by a
// breakpoint scan (the sum is strictly increasing in lam).
void project_sample(std::span<double> u, int label, std::vector<double>& breakpoints) {
    const std::size_t k = u.size();
    breakpoints.clear();
    for (std::size_t c = 0; c < k; ++c) {
        if (static_cast<int>(c) != label) breakpoints.push_back(-u[c]);
    }
    std::sort(breakpoints.begin(), breakpoints.end());

    const double x_label = u[static_cast<std::size_t>(label)];
    // Prefix sums over entries still in the linear regime. With j breakpoints
    // passed, g(lam) = x_label + lam + tail_sum_j + (k-1-j) lam.
    double tail = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        if (static_cast<int>(c) != label) tail += u[c];
    }
    double lam = 0.0;
    bool found = false;
    double lo = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= breakpoints.size(); ++j) {
        const double hi = j < breakpoints.size() ? breakpoints[j]
                                                 : std::numeric_limits<double>::infinity();
        const double slope = 1.0 + static_cast<double>(breakpoints.size() - j);
        const double candidate = -(x_label + tail) / slope;
        if (candidate >= lo - 1e-18 && candidate <= hi + 1e-18) {
            lam = candidate;
            found = true;
            break;
        }
        if (j < breakpoints.size()) tail -= -breakpoints[j];  // drop x_c = -b_j from the tail
        lo = hi;
    }
    if (!found) lam = -(x_label + tail);  // final segment, slope 1

    for (std::size_t c = 0; c < k; ++c) {
        if (static_cast<int>(c) == label) {
            u[c] = x_label + lam;
        } else {
            u[c] = std::min(0.0, u[c] + lam);
        }
    }
}

struct KktState {
    double feasibility = 0.0;   // max primal margin violation
    double gap = 0.0;           // primal - dual
    double complementarity = 0.0;
    double primal = 0.0;
    double residual() const {
        const double denom = 1.0 + std::fabs(primal);
        return std::max(feasibility, std::max(std::fabs(gap), complementarity) / denom);
    }
};

// B and S = A*B are n x k (column c = beta_c); Z likewise.
KktState multiclass_kkt(const Matrix& b, const Matrix& s, const Matrix& z,
                        const std::vector<int>& labels) {
    const std::size_t n = b.rows();
    const std::size_t k = b.cols();
    KktState st;
    double dual_linear = 0.0;
    double quad = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        auto bc = b.col(c);
        auto sc = s.col(c);
        auto zc = z.col(c);
        for (std::size_t i = 0; i < n; ++i) {
            quad += bc[i] * sc[i];
            dual_linear += bc[i] * zc[i];
        }
    }
    st.primal = 0.5 * quad;
    st.gap = quad - dual_linear;  // primal - dual

    const double kk = static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
        const auto yi = static_cast<std::size_t>(labels[i]);
        const double own = s(i, yi);
        for (std::size_t c = 0; c < k; ++c) {
            if (c == yi) continue;
            const double margin = own - s(i, c);
            st.feasibility = std::max(st.feasibility, 1.0 - margin);
            const double lambda = kk * b(i, c) * z(i, c);
            st.complementarity = std::max(st.complementarity, std::fabs(lambda * (margin - 1.0)));
        }
    }
    st.feasibility = std::max(0.0, st.feasibility);
    return st;
}

double dual_objective(const Matrix& b, const Matrix& s, const Matrix& z) {
    double obj = 0.0;
    for (std::size_t c = 0; c < b.cols(); ++c) {
        auto bc = b.col(c);
        auto sc = s.col(c);
        auto zc = z.col(c);
        for (std::size_t i = 0; i < b.rows(); ++i) obj += bc[i] * (zc[i] - 0.5 * sc[i]);
    }
    return obj;
}

Matrix weights_from_dual(const Matrix& x, const Matrix& b) {
    // w_c = X beta_c; rows of W.
    return transpose(matmul(x, b));
}

}  // namespace

LinearClassifier fit_mni(const Matrix& x, const Matrix& onehot) {
    return mni_from_targets(x, onehot, ClassifierKind::MNI);
}

LinearClassifier fit_mni_targets(const Matrix& x, const Matrix& targets) {
    return mni_from_targets(x, targets, ClassifierKind::MNI);
}

std::pair<LinearClassifier, DualVariables> fit_multiclass_svm(const Matrix& x,
                                                              const Matrix& onehot,
                                                              const SvmOptions& opts) {
    const std::size_t n = x.cols();
    const std::size_t k = onehot.rows();
    if (onehot.cols() != n) throw DimMismatchError("fit_multiclass_svm: label count mismatch");
    const std::vector<int> labels = labels_from_onehot(onehot);

    const Matrix a = gram(x);
    const PseudoInverse ap = pinv(a);
    const double lipschitz = std::max(ap.max_eigenvalue(), 1e-300);

    // n x k working layout: column c is beta_c.
    const Matrix zt = transpose(simplex_targets(onehot));
    Matrix b(n, k);
    for (std::size_t c = 0; c < k; ++c) {
        const Vector bc = ap.apply(zt.col(c));
        std::copy(bc.begin(), bc.end(), b.col(c).begin());
    }

    auto finish = [&](const Matrix& bt, const KktState& st, std::size_t iters) {
        LinearClassifier clf;
        clf.kind = ClassifierKind::MulticlassSVM;
        clf.weights = weights_from_dual(x, bt);
        clf.info.iterations = iters;
        clf.info.duality_gap = st.gap;
        clf.info.kkt_residual = st.residual();
        clf.info.rank_deficient = ap.rank() < n;
        return std::make_pair(std::move(clf), DualVariables{transpose(bt)});
    };

    // Warm start: the unconstrained maximizer (X^T X)+ z_c. When it is
    // feasible (exactly the deterministic sign condition) it is optimal and
    // no projected-gradient iterations are needed.
    {
        const double scale = 1.0 + max_abs(b);
        bool feasible = true;
        for (std::size_t i = 0; i < n && feasible; ++i) {
            double row_sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) {
                row_sum += b(i, c);
                if (b(i, c) * zt(i, c) < -1e-12 * scale) feasible = false;
            }
            if (std::fabs(row_sum) > 1e-9 * scale) feasible = false;
        }
        if (feasible) {
            const Matrix s = matmul(a, b);
            const KktState st = multiclass_kkt(b, s, zt, labels);
            if (st.residual() <= opts.tol) return finish(b, st, 0);
        }
    }

    const std::size_t max_iters =
        opts.max_iters > 0 ? opts.max_iters : std::max<std::size_t>(50 * n * k, 2000);
    std::vector<double> breakpoints;
    std::vector<double> row(k);

    auto project = [&](Matrix& m) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < k; ++c) row[c] = m(i, c);
            project_sample(row, labels[i], breakpoints);
            for (std::size_t c = 0; c < k; ++c) m(i, c) = row[c];
        }
    };

    auto pg_step = [&](const Matrix& point, const Matrix& s_point) {
        Matrix next = point;
        for (std::size_t c = 0; c < k; ++c) {
            auto nc = next.col(c);
            auto sc = s_point.col(c);
            auto zc = zt.col(c);
            for (std::size_t i = 0; i < n; ++i) nc[i] += (zc[i] - sc[i]) / lipschitz;
        }
        project(next);
        return next;
    };

    project(b);
    Matrix sb = matmul(a, b);
    double fb = -dual_objective(b, sb, zt);
    KktState st = multiclass_kkt(b, sb, zt, labels);
    if (st.residual() <= opts.tol) return finish(b, st, 0);

    Matrix b_prev = b;
    Matrix sb_prev = sb;
    double t_momentum = 1.0;
    const double diverged = 1e14 * (1.0 + std::fabs(fb));

    std::size_t iter = 1;
    for (; iter <= max_iters; ++iter) {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        const double omega = (t_momentum - 1.0) / t_next;

        Matrix y = b;
        Matrix sy = sb;
        if (omega != 0.0) {
            for (std::size_t idx = 0; idx < y.data().size(); ++idx) {
                y.data()[idx] += omega * (b.data()[idx] - b_prev.data()[idx]);
                sy.data()[idx] += omega * (sb.data()[idx] - sb_prev.data()[idx]);
            }
        }

        Matrix b_next = pg_step(y, sy);
        Matrix sb_next = matmul(a, b_next);
        double fb_next = -dual_objective(b_next, sb_next, zt);

        if (fb_next > fb) {
            // Adaptive restart: fall back to a plain monotone step from b.
            t_momentum = 1.0;
            b_next = pg_step(b, sb);
            sb_next = matmul(a, b_next);
            fb_next = -dual_objective(b_next, sb_next, zt);
        } else {
            t_momentum = t_next;
        }

        b_prev = std::move(b);
        sb_prev = std::move(sb);
        b = std::move(b_next);
        sb = std::move(sb_next);
        fb = fb_next;

        st = multiclass_kkt(b, sb, zt, labels);
        if (st.residual() <= opts.tol) return finish(b, st, iter);
        if (-fb > diverged || max_abs(b) > 1e13) {
            throw NotSeparableError("multiclass SVM dual diverged; data not multiclass separable");
        }
    }

    if (st.feasibility > 1e-3) {
        throw NotSeparableError(
            "multiclass SVM: primal infeasibility persists after max iterations");
    }
    auto best = finish(b, st, max_iters);
    throw UnconvergedError("multiclass SVM did not reach the requested KKT tolerance",
                           std::move(best.first), st.gap);
}

namespace {

struct BinaryResult {
    Vector w;
    std::size_t iterations = 0;
    double gap = 0.0;
    double kkt = 0.0;
};

// Sign-constrained QP shared by the OvA and OvO paths:
//   max nu^T t - 1/2 nu^T A nu   s.t.   nu_i * sign_i >= 0.
// Gradient projection with clipping; warm start at A+ t.
BinaryResult solve_sign_qp(const Matrix& x, const Matrix& a, const PseudoInverse& ap,
                           const Vector& t, const std::vector<double>& sign,
                           const SvmOptions& opts, int class_index) {
    const std::size_t n = t.size();
    const double lipschitz = std::max(ap.max_eigenvalue(), 1e-300);

    auto clip = [&](Vector& v) {
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = sign[i] > 0.0 ? std::max(0.0, v[i]) : std::min(0.0, v[i]);
        }
    };
    struct State {
        double feas = 0.0, gap = 0.0, comp = 0.0, primal = 0.0, fval = 0.0;
        double residual() const {
            const double denom = 1.0 + std::fabs(primal);
            return std::max(feas, std::max(std::fabs(gap), comp) / denom);
        }
    };
    auto evaluate = [&](const Vector& nu, const Vector& s) {
        State st;
        double quad = 0.0, lin = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            quad += nu[i] * s[i];
            lin += nu[i] * t[i];
            const double viol = sign[i] > 0.0 ? t[i] - s[i] : s[i] - t[i];
            st.feas = std::max(st.feas, viol);
            st.comp = std::max(st.comp, std::fabs(nu[i] * (s[i] - t[i])));
        }
        st.primal = 0.5 * quad;
        st.gap = quad - lin;
        st.fval = 0.5 * quad - lin;  // negative dual objective
        st.feas = std::max(0.0, st.feas);
        return st;
    };
    auto finish = [&](const Vector& nu, const State& st, std::size_t iter) {
        BinaryResult res;
        res.w = matvec(x, nu);
        res.iterations = iter;
        res.gap = st.gap;
        res.kkt = st.residual();
        return res;
    };

    Vector nu = ap.apply(t);
    {
        double nu_scale = 1.0;
        for (double v : nu) nu_scale = std::max(nu_scale, std::fabs(v));
        bool feasible = true;
        for (std::size_t i = 0; i < n && feasible; ++i) {
            if (nu[i] * sign[i] < -1e-12 * nu_scale) feasible = false;
        }
        if (feasible) {
            const Vector s = matvec(a, nu);
            const State st = evaluate(nu, s);
            if (st.residual() <= opts.tol) return finish(nu, st, 0);
        }
    }

    const std::size_t max_iters =
        opts.max_iters > 0 ? opts.max_iters : std::max<std::size_t>(100 * n, 2000);
    clip(nu);
    Vector s = matvec(a, nu);
    State st = evaluate(nu, s);
    if (st.residual() <= opts.tol) return finish(nu, st, 0);

    Vector nu_prev = nu;
    Vector s_prev = s;
    double t_momentum = 1.0;
    const double diverged = 1e14 * (1.0 + std::fabs(st.fval));

    auto pg_step = [&](const Vector& point, const Vector& s_point) {
        Vector next = point;
        for (std::size_t i = 0; i < n; ++i) next[i] += (t[i] - s_point[i]) / lipschitz;
        clip(next);
        return next;
    };

    for (std::size_t iter = 1; iter <= max_iters; ++iter) {
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_momentum * t_momentum));
        const double omega = (t_momentum - 1.0) / t_next;
        Vector y = nu;
        Vector sy = s;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] += omega * (nu[i] - nu_prev[i]);
            sy[i] += omega * (s[i] - s_prev[i]);
        }
        Vector nu_next = pg_step(y, sy);
        Vector s_next = matvec(a, nu_next);
        State st_next = evaluate(nu_next, s_next);
        if (st_next.fval > st.fval) {
            t_momentum = 1.0;
            nu_next = pg_step(nu, s);
            s_next = matvec(a, nu_next);
            st_next = evaluate(nu_next, s_next);
        } else {
            t_momentum = t_next;
        }
        nu_prev = std::move(nu);
        s_prev = std::move(s);
        nu = std::move(nu_next);
        s = std::move(s_next);
        st = st_next;
        if (st.residual() <= opts.tol) return finish(nu, st, iter);
        if (-st.fval > diverged) {
            throw NotSeparableError("binary max-margin subproblem diverged", class_index);
        }
    }
    if (st.feas > 1e-3) {
        throw NotSeparableError("binary max-margin subproblem infeasible", class_index);
    }
    return finish(nu, st, max_iters);  // converged to looser than tol; caller sees kkt
}

}  // namespace

LinearClassifier fit_ova_svm(const Matrix& x, const Matrix& onehot, const Margins& margins,
                             const SvmOptions& opts) {
    if (margins.positive <= margins.negative) {
        throw ConfigError("fit_ova_svm: positive margin must exceed negative margin");
    }
    const std::size_t n = x.cols();
    const std::size_t k = onehot.rows();
    const std::vector<int> labels = labels_from_onehot(onehot);
    const Matrix a = gram(x);
    const PseudoInverse ap = pinv(a);

    const Margins simplex = simplex_margins(k);
    const bool is_simplex =
        margins.positive == simplex.positive && margins.negative == simplex.negative;

    LinearClassifier clf;
    clf.kind = is_simplex ? ClassifierKind::SimplexOvA : ClassifierKind::OvA;
    clf.weights = Matrix(k, x.rows());
    Vector t(n);
    std::vector<double> sign(n);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            const bool own = labels[i] == static_cast<int>(c);
            t[i] = own ? margins.positive : margins.negative;
            sign[i] = own ? 1.0 : -1.0;
        }
        BinaryResult res = solve_sign_qp(x, a, ap, t, sign, opts, static_cast<int>(c));
        clf.weights.set_row(c, res.w);
        clf.info.iterations += res.iterations;
        clf.info.duality_gap = std::max(clf.info.duality_gap, std::fabs(res.gap));
        clf.info.kkt_residual = std::max(clf.info.kkt_residual, res.kkt);
    }
    clf.info.rank_deficient = ap.rank() < n;
    return clf;
}

LinearClassifier fit_ovo_svm(const Matrix& x, const Matrix& onehot, const SvmOptions& opts) {
    const std::size_t k = onehot.rows();
    const std::vector<int> labels = labels_from_onehot(onehot);

    std::vector<std::vector<std::size_t>> members(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (members[c].empty()) {
            throw EmptyPairError("fit_ovo_svm: class " + std::to_string(c) + " has no samples");
        }
    }

    LinearClassifier clf;
    clf.kind = ClassifierKind::OvO;
    clf.pairwise_weights = Matrix(k * (k - 1) / 2, x.rows());
    std::size_t pair_row = 0;
    for (std::size_t ca = 0; ca < k; ++ca) {
        for (std::size_t cb = ca + 1; cb < k; ++cb) {
            std::vector<std::size_t> cols;
            cols.reserve(members[ca].size() + members[cb].size());
            for (std::size_t i : members[ca]) cols.push_back(i);
            for (std::size_t i : members[cb]) cols.push_back(i);
            std::sort(cols.begin(), cols.end());

            Matrix sub(x.rows(), cols.size());
            Vector t(cols.size());
            std::vector<double> sign(cols.size());
            for (std::size_t j = 0; j < cols.size(); ++j) {
                auto src = x.col(cols[j]);
                std::copy(src.begin(), src.end(), sub.col(j).begin());
                const bool own = labels[cols[j]] == static_cast<int>(ca);
                t[j] = own ? 1.0 : -1.0;
                sign[j] = t[j];
            }
            const Matrix a = gram(sub);
            const PseudoInverse ap = pinv(a);
            BinaryResult res =
                solve_sign_qp(sub, a, ap, t, sign, opts, static_cast<int>(pair_row));
            clf.pairwise_weights.set_row(pair_row, res.w);
            clf.pairs.emplace_back(static_cast<int>(ca), static_cast<int>(cb));
            clf.info.iterations += res.iterations;
            clf.info.duality_gap = std::max(clf.info.duality_gap, std::fabs(res.gap));
            clf.info.kkt_residual = std::max(clf.info.kkt_residual, res.kkt);
            ++pair_row;
        }
    }
    return clf;
}

}  // namespace interp
