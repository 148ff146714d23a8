#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cyscm/errors.hpp"
#include "cyscm/linalg.hpp"
#include "cyscm/model.hpp"
#include "cyscm/sample.hpp"
#include "cyscm/system.hpp"

namespace cyscm {

struct SolveOptions {
    Norm p = Norm::L2;
    double tol = 1e-10;
    std::size_t max_iter = 10'000;
    // Certified contraction constant in norm p. When below one the stopping
    // rule uses the a-priori bound, so the returned point is within tol of the
    // true fixed point.
    std::optional<double> kappa;
    bool record_steps = false;
};

struct SolveReport {
    Vector x_star;
    std::size_t iterations = 0;
    double residual = 0.0;  // ||x - f(x, e)||_p at exit
    bool converged = false;
    Norm p = Norm::L2;
    std::vector<double> steps;  // ||x_{k+1} - x_k||_p, filled when record_steps is set
};

class Diverged : public Error {
public:
    Diverged(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
    const SolveReport& report() const noexcept { return report_; }

private:
    SolveReport report_;
};

class MaxIterExceeded : public Error {
public:
    MaxIterExceeded(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
    const SolveReport& report() const noexcept { return report_; }

private:
    SolveReport report_;
};

// A Monte Carlo row whose solve failed.
class SamplingError : public Error {
public:
    SamplingError(std::size_t row, const std::string& what)
        : Error("row " + std::to_string(row) + ": " + what), row_(row) {}
    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

// Picard iteration x_{k+1} = f(x_k, e) from x0 (zeros when empty). Stops once
// ||x_{k+1} - x_k||_p <= tol (1 - kappa) / max(kappa, 1e-12) with a certified
// kappa < 1, or <= tol without one, and the exit residual is within tol.
// Throws Diverged when a step grows past 1e6 times the first step or turns
// non-finite, MaxIterExceeded after max_iter steps.
SolveReport picard_solve(const StructuralSystem& system, std::span<const double> e, std::span<const double> x0,
                         const SolveOptions& options = {});
SolveReport picard_solve(const ScmModel& model, std::span<const double> e, std::span<const double> x0,
                         const SolveOptions& options = {});

// Smallest n with kappa^n * initial_step / (1 - kappa) <= tol; 0 when the
// initial step is zero. Throws KappaNotContractive unless 0 <= kappa < 1.
std::size_t iteration_bound(double kappa, double initial_step, double tol);

// Fixed point of u -> f_O(u, x_rest, e) over the coordinates in `subset`,
// holding the remaining coordinates (in increasing index order) at x_rest.
// The returned x_star is ordered like the sorted subset.
SolveReport solve_subset(const StructuralSystem& system, std::span<const std::size_t> subset,
                         std::span<const double> x_rest, std::span<const double> e, const SolveOptions& options = {});
SolveReport solve_subset(const ScmModel& model, std::span<const std::size_t> subset, std::span<const double> x_rest,
                         std::span<const double> e, const SolveOptions& options = {});

// Factored (I - A) of a linear system; solve(e) = (I - A)^{-1} (b + N e).
class LinearSolver {
public:
    // Throws NonLinearModel or SingularSystem (pivot below 1e-12).
    explicit LinearSolver(const StructuralSystem& system);
    explicit LinearSolver(const ScmModel& model);

    Vector solve(std::span<const double> e) const;
    const LinearForm& form() const noexcept { return form_; }
    const LuFactorization& factorization() const noexcept { return lu_; }

private:
    LinearForm form_;
    LuFactorization lu_;
};

Vector linear_solve(const ScmModel& model, std::span<const double> e);

struct LinearMoments {
    Vector mean;
    Matrix covariance;

    double correlation(std::size_t i, std::size_t j) const;
};

// mean = (I - A)^{-1}(b + N mu), covariance = M diag(var) M^T with M = (I - A)^{-1} N.
LinearMoments linear_moments(const StructuralSystem& system);
LinearMoments linear_moments(const ScmModel& model);

// e = D^{-1}((I - A) x_obs - b). Throws NonLinearModel, or DegenerateNoise if a
// noise gain is zero.
Vector abduct_noise_linear(const ScmModel& model, std::span<const double> x_obs);

// Solves a system at any noise value: LU for linear systems, Picard otherwise
// (tol 1e-10 by default, using a certified kappa when one is available).
class SolutionMap {
public:
    explicit SolutionMap(StructuralSystem system, SolveOptions options = {});

    Vector operator()(std::span<const double> e) const;
    const StructuralSystem& system() const noexcept { return system_; }
    bool is_linear() const noexcept { return linear_.has_value(); }
    const std::optional<double>& kappa() const noexcept { return options_.kappa; }

private:
    StructuralSystem system_;
    SolveOptions options_;
    std::optional<LinearSolver> linear_;
};

// Row `row` of the seeded noise stream: e_j = mean_j + sqrt(var_j) z_j.
void draw_noise(const NoiseSpec& noise, std::uint64_t seed, std::uint64_t row, std::span<double> out);

// n solutions at independent noise draws; row r depends only on (seed, r).
// Throws SamplingError naming the failing row.
SampleMatrix sample_observational(const ScmModel& model, std::size_t n, std::uint64_t seed,
                                  const SolveOptions& options = {});

}  // namespace cyscm
