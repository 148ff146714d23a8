#include <cmath>
#include <random>

#include "cyscm/errors.hpp"
#include "cyscm/linalg.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cyscm;

namespace {

Matrix from(const oracle::Mat& m) {
    Matrix out(m.size(), m[0].size());
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = 0; j < m[0].size(); ++j) out(i, j) = m[i][j];
    return out;
}

Matrix toy() { return from({{0.0, 0.5}, {0.4, 0.0}}); }

}  // namespace

TEST_CASE("norm names parse and print") {
    CHECK(parse_norm("1") == Norm::L1);
    CHECK(parse_norm("2") == Norm::L2);
    CHECK(parse_norm("inf") == Norm::Linf);
    CHECK(to_string(Norm::Linf) == "inf");
    CHECK_THROWS(parse_norm("3"));
}

TEST_CASE("vector norms") {
    const Vector v{3.0, -4.0};
    CHECK(vector_norm(v, Norm::L1) == doctest::Approx(7.0));
    CHECK(vector_norm(v, Norm::L2) == doctest::Approx(5.0));
    CHECK(vector_norm(v, Norm::Linf) == doctest::Approx(4.0));
    const Vector huge{1e200, 1e200};
    CHECK(std::isfinite(vector_norm(huge, Norm::L2)));
    CHECK(vector_norm(huge, Norm::L2) == doctest::Approx(std::sqrt(2.0) * 1e200));
}

TEST_CASE("toy matrix norms") {
    const Matrix a = toy();
    CHECK(max_abs_column_sum(a) == doctest::Approx(0.5));
    CHECK(max_abs_row_sum(a) == doctest::Approx(0.5));
    CHECK(frobenius_norm(a) == doctest::Approx(0.6403).epsilon(1e-4));
    // A^T A = diag(0.16, 0.25)
    const double oracle_value = oracle::spectral_norm_2x2({{0.0, 0.5}, {0.4, 0.0}});
    CHECK(oracle_value == doctest::Approx(0.5).epsilon(1e-14));
    const auto power = spectral_norm(a);
    CHECK(power.converged);
    CHECK(std::abs(power.value - oracle_value) < 1e-8);
    CHECK(power.value <= frobenius_norm(a) + 1e-12);
}

TEST_CASE("power iteration matches the 2x2 eigen oracle on random matrices") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const oracle::Mat m{{u(rng), u(rng)}, {u(rng), u(rng)}};
        const double expected = oracle::spectral_norm_2x2(m);
        const auto got = spectral_norm(from(m));
        CHECK(std::abs(got.value - expected) <= 1e-6 * std::max(1.0, expected));
    }
}

TEST_CASE("power iteration on a matrix whose all-ones direction is degenerate") {
    const Matrix a = from({{1.0, -1.0}, {1.0, -1.0}});
    CHECK(spectral_norm(a).value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(spectral_norm(Matrix(3, 3)).value == 0.0);
}

TEST_CASE("operator norm dispatch") {
    const Matrix a = from({{1.0, -2.0}, {0.5, 0.25}});
    CHECK(operator_norm(a, Norm::L1) == doctest::Approx(2.25));
    CHECK(operator_norm(a, Norm::Linf) == doctest::Approx(3.0));
    CHECK(operator_norm(a, Norm::L2) ==
          doctest::Approx(oracle::spectral_norm_2x2({{1.0, -2.0}, {0.5, 0.25}})).epsilon(1e-8));
}

TEST_CASE("LU solve and inverse agree with the Neumann series") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 2 + trial % 5;
        oracle::Mat a(n, oracle::Vec(n));
        for (auto& row : a)
            for (double& v : row) v = u(rng);
        const double f = oracle::frobenius(a);
        for (auto& row : a)
            for (double& v : row) v *= 0.7 / f;
        Matrix i_minus_a = Matrix::identity(n) - from(a);
        oracle::Vec rhs(n);
        for (double& v : rhs) v = u(rng);
        const LuFactorization lu(i_minus_a);
        const Vector got = lu.solve(rhs);
        const oracle::Vec expected = oracle::neumann_solve(a, rhs);
        for (std::size_t i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(expected[i]).epsilon(1e-10));
        const Matrix prod = i_minus_a * lu.inverse();
        CHECK(max_abs_difference(prod, Matrix::identity(n)) < 1e-12);
    }
}

TEST_CASE("singular systems are rejected") {
    CHECK_THROWS_AS(LuFactorization(from({{1.0, 2.0}, {2.0, 4.0}})), SingularSystem);
    CHECK_THROWS_AS(LuFactorization(Matrix(2, 2)), SingularSystem);
}

TEST_CASE("matrix products and transpose") {
    const Matrix a = from({{1.0, 2.0, 3.0}, {4.0, 5.0, 6.0}});
    const Matrix t = a.transposed();
    CHECK(t.rows() == 3);
    CHECK(t(2, 1) == 6.0);
    const Matrix g = a * t;
    CHECK(g(0, 0) == 14.0);
    CHECK(g(0, 1) == 32.0);
    const Vector x{1.0, 0.0, -1.0};
    const Vector y = a * x;
    CHECK(y == Vector{-2.0, -2.0});
}
