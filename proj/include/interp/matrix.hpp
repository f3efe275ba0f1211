#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace interp {

using Vector = std::vector<double>;

// Dense column-major matrix of 64-bit floats. Column-major layout is fixed so
// binary fixtures are bit-reproducible across implementations. Values are
// immutable after construction in all library entry points, so matrices are
// safe to share across threads.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}
    Matrix(std::size_t rows, std::size_t cols, Vector entries);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[c * rows_ + r]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[c * rows_ + r]; }

    std::span<const double> col(std::size_t c) const { return {data_.data() + c * rows_, rows_}; }
    std::span<double> col(std::size_t c) { return {data_.data() + c * rows_, rows_}; }

    Vector row(std::size_t r) const;
    void set_row(std::size_t r, std::span<const double> values);

    const Vector& data() const { return data_; }
    Vector& data() { return data_; }

    bool is_finite() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix transpose(const Matrix& a);
Vector matvec(const Matrix& a, std::span<const double> x);   // a x
Vector tmatvec(const Matrix& a, std::span<const double> x);  // a^T x

double frobenius_norm(const Matrix& a);
double max_abs(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);

// Gram matrix X^T X. Each entry is computed once and mirrored, so the result
// is symmetric to the bit.
Matrix gram(const Matrix& x);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Eigenvalues are returned in descending order with matching vector columns.
struct EigenDecomposition {
    Vector values;
    Matrix vectors;
};
EigenDecomposition eigh(const Matrix& a);

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix, held in factored
// form (eigenvectors plus inverted spectrum) so applying M+ to a vector costs
// two dense mat-vecs.
class PseudoInverse {
public:
    PseudoInverse() = default;

    std::size_t dim() const { return dim_; }
    std::size_t rank() const { return rank_; }
    double max_eigenvalue() const { return max_eig_; }

    Vector apply(std::span<const double> v) const;
    Matrix dense() const;
    double quad(std::span<const double> a, std::span<const double> b) const;

private:
    friend PseudoInverse pinv(const Matrix& m, double rel_tol);

    std::size_t dim_ = 0;
    std::size_t rank_ = 0;
    Matrix vectors_;
    Vector inv_values_;
    double max_eig_ = 0.0;
};

// rel_tol < 0 selects the default cutoff 1e-12 * n; eigenvalues below
// rel_tol * max|eigenvalue| are treated as zero.
PseudoInverse pinv(const Matrix& m, double rel_tol = -1.0);

double quad_form(const PseudoInverse& m_inv, std::span<const double> a, std::span<const double> b);

// Binary fixture format: little-endian u64 rows, u64 cols, then rows*cols
// f64 values column-major.
void write_matrix_fixture(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_fixture(const std::filesystem::path& path);

}  // namespace interp
