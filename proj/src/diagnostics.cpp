#include "interp/diagnostics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "interp/errors.hpp"

namespace interp {

namespace {

struct LooContext {
    PseudoInverse inv;       // (A_{-j})+
    Vector v;                // label indicator of class j
    Vector d;                // Q^T mu_j
    Vector inv_v;            // A+ v
    Vector inv_d;            // A+ d
    double mu_sq = 0.0;
    double s = 0.0, t = 0.0, h = 0.0;
};

LooContext make_loo_context(const Matrix& x, const Matrix& onehot, const Matrix& means,
                            std::size_t j) {
    const std::size_t p = x.rows();
    const std::size_t n = x.cols();

    LooContext ctx;
    ctx.v = onehot.row(j);
    auto mu = means.col(j);
    ctx.mu_sq = dot(mu, mu);

    // X with the j-th mean component removed.
    Matrix x_loo = x;
    for (std::size_t i = 0; i < n; ++i) {
        if (ctx.v[i] == 0.0) continue;
        auto xi = x_loo.col(i);
        for (std::size_t r = 0; r < p; ++r) xi[r] -= mu[r];
    }
    // Noise matrix Q = X - M Y (all components removed).
    Matrix q = x;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < onehot.rows(); ++c) {
            if (onehot(c, i) == 0.0) continue;
            auto xi = q.col(i);
            auto mc = means.col(c);
            for (std::size_t r = 0; r < p; ++r) xi[r] -= mc[r];
        }
    }
    ctx.d = tmatvec(q, mu);

    ctx.inv = pinv(gram(x_loo));
    if (ctx.inv.rank() < n) {
        throw RankDeficientError("loo_quadforms: leave-one-out Gram matrix is rank deficient");
    }
    ctx.inv_v = ctx.inv.apply(ctx.v);
    ctx.inv_d = ctx.inv.apply(ctx.d);
    ctx.s = dot(ctx.v, ctx.inv_v);
    ctx.t = dot(ctx.d, ctx.inv_d);
    ctx.h = dot(ctx.v, ctx.inv_d);
    return ctx;
}

QuadFormSet forms_at(const LooContext& ctx, std::size_t i) {
    QuadFormSet out;
    out.s = ctx.s;
    out.t = ctx.t;
    out.h = ctx.h;
    out.g = ctx.inv_v[i];
    out.f = ctx.inv_d[i];
    out.det = ctx.s * (ctx.mu_sq - ctx.t) + (1.0 + ctx.h) * (1.0 + ctx.h);
    return out;
}

}  // namespace

QuadFormSet loo_quadforms(const Matrix& x, const Matrix& onehot, const Matrix& means,
                          std::size_t j, std::size_t i) {
    if (j >= onehot.rows()) throw DimMismatchError("loo_quadforms: class index out of range");
    if (i >= x.cols()) throw DimMismatchError("loo_quadforms: sample index out of range");
    const LooContext ctx = make_loo_context(x, onehot, means, j);
    return forms_at(ctx, i);
}

double full_gram_g(const Matrix& x, const Matrix& onehot, std::size_t j, std::size_t i) {
    const PseudoInverse ap = pinv(gram(x));
    const Vector vj = onehot.row(j);
    return ap.apply(vj)[i];
}

std::vector<LemmaOrderRow> lemma_order_check(const GmmSpec& spec, std::size_t n,
                                             std::span<const std::uint64_t> seeds,
                                             bool balanced) {
    std::vector<LemmaOrderRow> rows;
    const double p = static_cast<double>(spec.p);
    const double k = static_cast<double>(spec.k);
    const double mu = norm2(spec.means.col(0));
    const double rho = std::min(1.0, std::sqrt(std::log(2.0 * static_cast<double>(n)) / k));

    for (const std::uint64_t seed : seeds) {
        const Dataset ds = balanced ? sample_gmm_balanced(spec, n, seed)
                                    : sample_gmm(spec, n, seed);
        for (std::size_t j = 0; j < spec.k; ++j) {
            const LooContext ctx = make_loo_context(ds.x, ds.onehot, spec.means, j);
            for (std::size_t i = 0; i < n; ++i) {
                LemmaOrderRow row;
                row.seed = seed;
                row.j = j;
                row.i = i;
                row.own_class = ds.labels[i] == static_cast<int>(j);
                row.forms = forms_at(ctx, i);
                const double nn = static_cast<double>(n);
                row.s_norm = row.forms.s * k * p / nn;
                row.t_norm = row.forms.t * p / (nn * mu * mu);
                row.h_norm = std::fabs(row.forms.h) * std::sqrt(k) * p / (nn * mu * rho);
                row.f_norm = std::fabs(row.forms.f) * p / (std::sqrt(nn) * mu);
                row.g_norm = row.own_class ? row.forms.g * p
                                           : std::fabs(row.forms.g) * k * k * p;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

void write_lemma_order_csv(const std::filesystem::path& path,
                           const std::vector<LemmaOrderRow>& rows) {
    std::ofstream out(path);
    if (!out) throw IoError("write_lemma_order_csv: cannot open " + path.string());
    out << "seed,j,i,own_class,s,t,h,g,f,det,"
           "s_norm,t_norm,h_norm,f_norm,g_own_norm,g_cross_norm\n";
    char buf[512];
    for (const LemmaOrderRow& r : rows) {
        std::snprintf(buf, sizeof buf,
                      "%llu,%zu,%zu,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                      "%.17g,",
                      static_cast<unsigned long long>(r.seed), r.j, r.i, r.own_class ? 1 : 0,
                      r.forms.s, r.forms.t, r.forms.h, r.forms.g, r.forms.f, r.forms.det,
                      r.s_norm, r.t_norm, r.h_norm, r.f_norm);
        out << buf;
        std::snprintf(buf, sizeof buf, "%.17g", r.g_norm);
        if (r.own_class) {
            out << buf << ",\n";
        } else {
            out << ',' << buf << '\n';
        }
    }
    if (!out) throw IoError("write_lemma_order_csv: short write to " + path.string());
}

}  // namespace interp
