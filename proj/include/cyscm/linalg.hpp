#pragma once

// Small dense linear algebra for desk-scale models (n in the tens at most).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace cyscm {

using Vector = std::vector<double>;

enum class Norm { L1, L2, Linf };

std::string_view to_string(Norm p);
// Accepts "1", "2", "inf" (also "l1", "l2", "linf").
Norm parse_norm(std::string_view text);

double vector_norm(std::span<const double> v, Norm p);
double difference_norm(std::span<const double> a, std::span<const double> b, Norm p);

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Matrix transposed() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, std::span<const double> x);
Matrix operator-(const Matrix& a, const Matrix& b);

double max_abs_column_sum(const Matrix& a);
double max_abs_row_sum(const Matrix& a);
double frobenius_norm(const Matrix& a);
double max_abs_difference(const Matrix& a, const Matrix& b);

struct PowerIterationResult {
    double value = 0.0;  // largest singular value estimate
    std::size_t iterations = 0;
    bool converged = false;
};

// Largest singular value of `a` by power iteration on a^T a. Stops when the
// relative change of the Rayleigh quotient drops below `tol`.
PowerIterationResult spectral_norm(const Matrix& a, double tol = 1e-10, std::size_t max_iter = 10'000);

// Operator norm induced by p. The p = 2 case delegates to spectral_norm.
double operator_norm(const Matrix& a, Norm p);

// LU factorization with partial pivoting. Throws SingularSystem when a pivot
// falls below `pivot_floor` in absolute value.
class LuFactorization {
public:
    explicit LuFactorization(Matrix a, double pivot_floor = 1e-12);

    std::size_t size() const noexcept { return lu_.rows(); }
    Vector solve(std::span<const double> rhs) const;
    Matrix inverse() const;

private:
    Matrix lu_;
    std::vector<std::size_t> perm_;
};

}  // namespace cyscm
