#include "cyscm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "cyscm/errors.hpp"

namespace cyscm {

std::string_view to_string(Norm p) {
    switch (p) {
    case Norm::L1: return "1";
    case Norm::L2: return "2";
    case Norm::Linf: return "inf";
    }
    return "?";
}

Norm parse_norm(std::string_view text) {
    if (text == "1" || text == "l1") return Norm::L1;
    if (text == "2" || text == "l2") return Norm::L2;
    if (text == "inf" || text == "linf" || text == "Inf") return Norm::Linf;
    throw std::invalid_argument("unsupported norm '" + std::string(text) + "' (expected 1, 2 or inf)");
}

double vector_norm(std::span<const double> v, Norm p) {
    switch (p) {
    case Norm::L1: {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    case Norm::L2: {
        // scaled to avoid overflow for the large radii used by the sampler
        double scale = 0.0;
        for (double x : v) scale = std::max(scale, std::abs(x));
        if (scale == 0.0 || !std::isfinite(scale)) return scale;
        double s = 0.0;
        for (double x : v) s += (x / scale) * (x / scale);
        return scale * std::sqrt(s);
    }
    case Norm::Linf: {
        double m = 0.0;
        for (double x : v) {
            if (std::isnan(x)) return x;
            m = std::max(m, std::abs(x));
        }
        return m;
    }
    }
    return 0.0;
}

double difference_norm(std::span<const double> a, std::span<const double> b, Norm p) {
    if (a.size() != b.size()) throw std::invalid_argument("difference_norm: size mismatch");
    Vector d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return vector_norm(d, p);
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matrix product: dimension mismatch");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

Vector operator*(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector product: dimension mismatch");
    Vector out(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * x[k];
        out[i] = s;
    }
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("matrix difference: dimension mismatch");
    Matrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j) - b(i, j);
    return out;
}

double max_abs_column_sum(const Matrix& a) {
    double best = 0.0;
    for (std::size_t c = 0; c < a.cols(); ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r) s += std::abs(a(r, c));
        best = std::max(best, s);
    }
    return best;
}

double max_abs_row_sum(const Matrix& a) {
    double best = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (double v : a.row(r)) s += std::abs(v);
        best = std::max(best, s);
    }
    return best;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (double v : a.row(r)) s += v * v;
    return std::sqrt(s);
}

double max_abs_difference(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
    double m = 0.0;
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) m = std::max(m, std::abs(a(r, c) - b(r, c)));
    return m;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void normalize(Vector& v) {
    const double n = std::sqrt(dot(v, v));
    if (n > 0.0)
        for (double& x : v) x /= n;
}

// a^T (a v)
Vector gram_apply(const Matrix& a, const Matrix& at, const Vector& v) {
    const Vector w = a * v;
    return at * w;
}

}  // namespace

PowerIterationResult spectral_norm(const Matrix& a, double tol, std::size_t max_iter) {
    PowerIterationResult result;
    const std::size_t n = a.cols();
    if (n == 0 || a.rows() == 0 || frobenius_norm(a) == 0.0) {
        result.converged = true;
        return result;
    }
    const Matrix at = a.transposed();

    // Jittered all-ones start; fall back to unit vectors if it lies in the null space.
    std::vector<Vector> starts;
    Vector ones(n);
    for (std::size_t i = 0; i < n; ++i) ones[i] = 1.0 + 0.1 * static_cast<double>(i + 1) / static_cast<double>(n);
    starts.push_back(ones);
    for (std::size_t i = 0; i < n; ++i) {
        Vector e(n, 0.0);
        e[i] = 1.0;
        starts.push_back(e);
    }

    for (Vector v : starts) {
        normalize(v);
        Vector u = gram_apply(a, at, v);
        double lambda = dot(v, u);
        if (lambda <= 0.0) continue;
        for (std::size_t it = 1; it <= max_iter; ++it) {
            v = u;
            normalize(v);
            u = gram_apply(a, at, v);
            const double next = dot(v, u);
            result.iterations = it;
            if (std::abs(next - lambda) <= tol * std::abs(next)) {
                result.value = std::sqrt(std::max(next, 0.0));
                result.converged = true;
                return result;
            }
            lambda = next;
        }
        result.value = std::sqrt(std::max(lambda, 0.0));
        result.converged = false;
        return result;
    }
    result.converged = true;
    return result;
}

double operator_norm(const Matrix& a, Norm p) {
    switch (p) {
    case Norm::L1: return max_abs_column_sum(a);
    case Norm::Linf: return max_abs_row_sum(a);
    case Norm::L2: return spectral_norm(a).value;
    }
    return 0.0;
}

LuFactorization::LuFactorization(Matrix a, double pivot_floor) : lu_(std::move(a)) {
    const std::size_t n = lu_.rows();
    if (lu_.cols() != n) throw std::invalid_argument("LU factorization needs a square matrix");
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pivot = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            if (std::abs(lu_(r, k)) > best) {
                best = std::abs(lu_(r, k));
                pivot = r;
            }
        }
        if (!(best >= pivot_floor))
            throw SingularSystem("singular system: pivot " + std::to_string(best) + " in column " + std::to_string(k));
        if (pivot != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(lu_(k, c), lu_(pivot, c));
            std::swap(perm_[k], perm_[pivot]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double factor = lu_(r, k) / lu_(k, k);
            lu_(r, k) = factor;
            if (factor == 0.0) continue;
            for (std::size_t c = k + 1; c < n; ++c) lu_(r, c) -= factor * lu_(k, c);
        }
    }
}

Vector LuFactorization::solve(std::span<const double> rhs) const {
    const std::size_t n = size();
    if (rhs.size() != n) throw std::invalid_argument("LU solve: right-hand side has wrong length");
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = rhs[perm_[i]];
        for (std::size_t k = 0; k < i; ++k) s -= lu_(i, k) * y[k];
        y[i] = s;
    }
    Vector x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = y[ii];
        for (std::size_t k = ii + 1; k < n; ++k) s -= lu_(ii, k) * x[k];
        x[ii] = s / lu_(ii, ii);
    }
    return x;
}

Matrix LuFactorization::inverse() const {
    const std::size_t n = size();
    Matrix inv(n, n);
    Vector e(n, 0.0);
    for (std::size_t c = 0; c < n; ++c) {
        e[c] = 1.0;
        const Vector col = solve(e);
        for (std::size_t r = 0; r < n; ++r) inv(r, c) = col[r];
        e[c] = 0.0;
    }
    return inv;
}

}  // namespace cyscm
