#include "interp/matrix.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "interp/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "fixture format assumes a little-endian host");

namespace interp {

Matrix::Matrix(std::size_t rows, std::size_t cols, Vector entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (data_.size() != rows_ * cols_) {
        throw DimMismatchError("Matrix: entries length does not match rows*cols");
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector Matrix::row(std::size_t r) const {
    Vector out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) out[c] = (*this)(r, c);
    return out;
}

void Matrix::set_row(std::size_t r, std::span<const double> values) {
    if (values.size() != cols_) throw DimMismatchError("set_row: length mismatch");
    for (std::size_t c = 0; c < cols_; ++c) (*this)(r, c) = values[c];
}

bool Matrix::is_finite() const {
    for (double v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw DimMismatchError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm2(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw DimMismatchError("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        auto cj = c.col(j);
        auto bj = b.col(j);
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double blj = bj[l];
            if (blj == 0.0) continue;
            auto al = a.col(l);
            for (std::size_t i = 0; i < a.rows(); ++i) cj[i] += al[i] * blj;
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < a.rows(); ++i) t(j, i) = a(i, j);
    return t;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.cols()) throw DimMismatchError("matvec: length mismatch");
    Vector y(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const double xj = x[j];
        if (xj == 0.0) continue;
        auto aj = a.col(j);
        for (std::size_t i = 0; i < a.rows(); ++i) y[i] += aj[i] * xj;
    }
    return y;
}

Vector tmatvec(const Matrix& a, std::span<const double> x) {
    if (x.size() != a.rows()) throw DimMismatchError("tmatvec: length mismatch");
    Vector y(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
    return y;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const Matrix& a) {
    double m = 0.0;
    for (double v : a.data()) m = std::max(m, std::fabs(v));
    return m;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimMismatchError("max_abs_diff: shape mismatch");
    }
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
        m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
    }
    return m;
}

Matrix gram(const Matrix& x) {
    if (!x.is_finite()) throw NonFiniteError("gram: input contains non-finite entries");
    const std::size_t n = x.cols();
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = dot(x.col(i), x.col(j));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

EigenDecomposition eigh(const Matrix& a_in) {
    if (a_in.rows() != a_in.cols()) throw DimMismatchError("eigh: matrix not square");
    if (!a_in.is_finite()) throw NonFiniteError("eigh: input contains non-finite entries");
    const std::size_t n = a_in.rows();

    // Work on the symmetrized copy; callers guarantee asymmetry is roundoff.
    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (a_in(i, j) + a_in(j, i));
    Matrix v = Matrix::identity(n);

    const double scale = std::max(max_abs(a), 1e-300);
    const std::size_t max_sweeps = 64;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) <= 1e-15 * scale * static_cast<double>(n)) break;

        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const double app = a(p, p);
                const double aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = a(r, p);
                    const double arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(r, q) = s * arp + c * arq;
                    a(p, r) = a(r, p);
                    a(q, r) = a(r, q);
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = c * vrp - s * vrq;
                    v(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    EigenDecomposition out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        auto src = v.col(order[j]);
        auto dst = out.vectors.col(j);
        std::copy(src.begin(), src.end(), dst.begin());
    }
    return out;
}

Vector PseudoInverse::apply(std::span<const double> x) const {
    if (x.size() != dim_) throw DimMismatchError("PseudoInverse::apply: length mismatch");
    Vector proj = tmatvec(vectors_, x);
    for (std::size_t i = 0; i < dim_; ++i) proj[i] *= inv_values_[i];
    return matvec(vectors_, proj);
}

Matrix PseudoInverse::dense() const {
    Matrix out(dim_, dim_);
    for (std::size_t l = 0; l < dim_; ++l) {
        if (inv_values_[l] == 0.0) continue;
        auto vl = vectors_.col(l);
        for (std::size_t j = 0; j < dim_; ++j) {
            const double w = inv_values_[l] * vl[j];
            auto oj = out.col(j);
            for (std::size_t i = 0; i < dim_; ++i) oj[i] += w * vl[i];
        }
    }
    return out;
}

double PseudoInverse::quad(std::span<const double> a, std::span<const double> b) const {
    if (a.size() != dim_ || b.size() != dim_) throw DimMismatchError("quad_form: length mismatch");
    const Vector pa = tmatvec(vectors_, a);
    const Vector pb = tmatvec(vectors_, b);
    double s = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) s += pa[i] * inv_values_[i] * pb[i];
    return s;
}

PseudoInverse pinv(const Matrix& m, double rel_tol) {
    if (m.rows() != m.cols()) throw DimMismatchError("pinv: matrix not square");
    if (!m.is_finite()) throw NonFiniteError("pinv: input contains non-finite entries");
    const std::size_t n = m.rows();
    const double scale = std::max(max_abs(m), 1e-300);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::fabs(m(i, j) - m(j, i)) > 1e-10 * std::max(1.0, scale)) {
                throw DimMismatchError("pinv: matrix is not symmetric within tolerance");
            }
        }
    }

    EigenDecomposition eig = eigh(m);
    double max_mag = 0.0;
    for (double v : eig.values) max_mag = std::max(max_mag, std::fabs(v));
    if (rel_tol < 0.0) rel_tol = 1e-12 * static_cast<double>(n);
    const double cutoff = rel_tol * max_mag;

    PseudoInverse out;
    out.dim_ = n;
    out.vectors_ = std::move(eig.vectors);
    out.inv_values_.assign(n, 0.0);
    out.max_eig_ = eig.values.empty() ? 0.0 : eig.values.front();
    for (std::size_t i = 0; i < n; ++i) {
        if (std::fabs(eig.values[i]) > cutoff) {
            out.inv_values_[i] = 1.0 / eig.values[i];
            ++out.rank_;
        }
    }
    return out;
}

double quad_form(const PseudoInverse& m_inv, std::span<const double> a, std::span<const double> b) {
    return m_inv.quad(a, b);
}

void write_matrix_fixture(const std::filesystem::path& path, const Matrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("write_matrix_fixture: cannot open " + path.string());
    const std::uint64_t rows = m.rows();
    const std::uint64_t cols = m.cols();
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    out.write(reinterpret_cast<const char*>(m.data().data()),
              static_cast<std::streamsize>(m.data().size() * sizeof(double)));
    if (!out) throw IoError("write_matrix_fixture: short write to " + path.string());
}

Matrix read_matrix_fixture(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_matrix_fixture: cannot open " + path.string());
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    Matrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    in.read(reinterpret_cast<char*>(m.data().data()),
            static_cast<std::streamsize>(m.data().size() * sizeof(double)));
    if (!in) throw IoError("read_matrix_fixture: truncated file " + path.string());
    return m;
}

}  // namespace interp
