#include "cyscm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cyscm/contraction.hpp"
#include "cyscm/rng.hpp"

namespace cyscm {

namespace {

using StepFn = std::function<void(std::span<const double> x, std::span<double> out)>;

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

SolveReport picard_core(std::size_t dim, const StepFn& step_fn, std::span<const double> x0, const SolveOptions& opt) {
    if (!(opt.tol > 0.0)) throw std::invalid_argument("picard_solve: tol must be positive");
    if (opt.max_iter < 1) throw std::invalid_argument("picard_solve: max_iter must be at least 1");
    if (!x0.empty() && x0.size() != dim) throw std::invalid_argument("picard_solve: x0 has the wrong length");

    SolveReport report;
    report.p = opt.p;
    Vector x = x0.empty() ? Vector(dim, 0.0) : Vector(x0.begin(), x0.end());
    Vector next(dim), image(dim), diff(dim);

    const bool contractive = opt.kappa && *opt.kappa >= 0.0 && *opt.kappa < 1.0;
    const double threshold = contractive ? opt.tol * (1.0 - *opt.kappa) / std::max(*opt.kappa, 1e-12) : opt.tol;

    double first_step = -1.0;
    for (std::size_t it = 1; it <= opt.max_iter; ++it) {
        step_fn(x, next);
        for (std::size_t i = 0; i < dim; ++i) diff[i] = next[i] - x[i];
        const double step = vector_norm(diff, opt.p);
        report.iterations = it;
        if (opt.record_steps) report.steps.push_back(step);
        if (!std::isfinite(step) || !all_finite(next)) {
            report.x_star = x;
            report.residual = step;
            throw Diverged("fixed-point iteration produced a non-finite value at iteration " + std::to_string(it),
                           report);
        }
        if (first_step < 0.0) {
            first_step = step;
        } else if (step > 1e6 * std::max(first_step, opt.tol)) {
            report.x_star = next;
            report.residual = step;
            throw Diverged("fixed-point iteration diverged: step grew by more than 1e6 at iteration " +
                               std::to_string(it),
                           report);
        }
        x.swap(next);
        if (step <= threshold) {
            step_fn(x, image);
            for (std::size_t i = 0; i < dim; ++i) diff[i] = x[i] - image[i];
            const double residual = vector_norm(diff, opt.p);
            if (residual <= opt.tol) {
                report.x_star = x;
                report.residual = residual;
                report.converged = true;
                return report;
            }
        }
    }
    report.x_star = x;
    step_fn(x, image);
    for (std::size_t i = 0; i < dim; ++i) diff[i] = x[i] - image[i];
    report.residual = vector_norm(diff, opt.p);
    throw MaxIterExceeded("fixed-point iteration did not converge within " + std::to_string(opt.max_iter) +
                              " iterations",
                          report);
}

}  // namespace

SolveReport picard_solve(const StructuralSystem& system, std::span<const double> e, std::span<const double> x0,
                         const SolveOptions& options) {
    if (e.size() != system.noise_dim()) throw std::invalid_argument("picard_solve: noise vector has the wrong length");
    return picard_core(
        system.dim(), [&](std::span<const double> x, std::span<double> out) { system.evaluate(x, e, out); }, x0,
        options);
}

SolveReport picard_solve(const ScmModel& model, std::span<const double> e, std::span<const double> x0,
                         const SolveOptions& options) {
    return picard_solve(StructuralSystem(model), e, x0, options);
}

std::size_t iteration_bound(double kappa, double initial_step, double tol) {
    if (!(kappa >= 0.0 && kappa < 1.0)) throw KappaNotContractive("iteration_bound needs 0 <= kappa < 1");
    if (!(tol > 0.0)) throw std::invalid_argument("iteration_bound: tol must be positive");
    if (initial_step <= 0.0) return 0;
    const auto satisfied = [&](std::size_t n) {
        return std::pow(kappa, static_cast<double>(n)) * initial_step / (1.0 - kappa) <= tol;
    };
    if (satisfied(0)) return 0;
    if (kappa == 0.0) return 1;
    const double estimate = std::log(tol * (1.0 - kappa) / initial_step) / std::log(kappa);
    std::size_t n = static_cast<std::size_t>(std::max(0.0, std::ceil(estimate)));
    while (n > 0 && satisfied(n - 1)) --n;
    while (!satisfied(n)) ++n;
    return n;
}

SolveReport solve_subset(const StructuralSystem& system, std::span<const std::size_t> subset,
                         std::span<const double> x_rest, std::span<const double> e, const SolveOptions& options) {
    const std::size_t n = system.dim();
    std::vector<std::size_t> inside(subset.begin(), subset.end());
    std::sort(inside.begin(), inside.end());
    if (inside.empty()) throw std::invalid_argument("solve_subset: subset must be nonempty");
    if (std::adjacent_find(inside.begin(), inside.end()) != inside.end())
        throw std::invalid_argument("solve_subset: repeated coordinate");
    if (inside.back() >= n) throw std::invalid_argument("solve_subset: coordinate out of range");
    if (x_rest.size() != n - inside.size())
        throw std::invalid_argument("solve_subset: x_rest must hold one value per coordinate outside the subset");
    if (e.size() != system.noise_dim()) throw std::invalid_argument("solve_subset: noise vector has the wrong length");

    Vector full(n, 0.0);
    {
        std::size_t r = 0;
        std::size_t s = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (s < inside.size() && inside[s] == i) {
                ++s;
                continue;
            }
            full[i] = x_rest[r++];
        }
    }
    return picard_core(
        inside.size(),
        [&](std::span<const double> u, std::span<double> out) {
            for (std::size_t s = 0; s < inside.size(); ++s) full[inside[s]] = u[s];
            for (std::size_t s = 0; s < inside.size(); ++s) out[s] = system.evaluate(inside[s], full, e);
        },
        {}, options);
}

SolveReport solve_subset(const ScmModel& model, std::span<const std::size_t> subset, std::span<const double> x_rest,
                         std::span<const double> e, const SolveOptions& options) {
    return solve_subset(StructuralSystem(model), subset, x_rest, e, options);
}

namespace {

Matrix identity_minus(const Matrix& a) {
    Matrix m = Matrix::identity(a.rows()) - a;
    return m;
}

}  // namespace

LinearSolver::LinearSolver(const StructuralSystem& system)
    : form_(system.linear_form()), lu_(identity_minus(form_.coefficients)) {}

LinearSolver::LinearSolver(const ScmModel& model) : LinearSolver(StructuralSystem(model)) {}

Vector LinearSolver::solve(std::span<const double> e) const {
    if (e.size() != form_.noise_gains.cols()) throw std::invalid_argument("linear solve: noise vector has the wrong length");
    Vector rhs = form_.noise_gains * e;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += form_.offsets[i];
    return lu_.solve(rhs);
}

Vector linear_solve(const ScmModel& model, std::span<const double> e) { return LinearSolver(model).solve(e); }

double LinearMoments::correlation(std::size_t i, std::size_t j) const {
    return covariance(i, j) / std::sqrt(covariance(i, i) * covariance(j, j));
}

LinearMoments linear_moments(const StructuralSystem& system) {
    const LinearSolver solver(system);
    const NoiseSpec& noise = system.noise();
    LinearMoments out;
    out.mean = solver.solve(noise.means);

    const Matrix inv = solver.factorization().inverse();
    const Matrix m = inv * solver.form().noise_gains;  // dim x noise_dim
    const std::size_t n = m.rows();
    out.covariance = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m.cols(); ++k) s += m(i, k) * noise.variances[k] * m(j, k);
            out.covariance(i, j) = s;
        }
    return out;
}

LinearMoments linear_moments(const ScmModel& model) { return linear_moments(StructuralSystem(model)); }

Vector abduct_noise_linear(const ScmModel& model, std::span<const double> x_obs) {
    const LinearParts parts = linear_parts(model);
    const std::size_t n = model.size();
    if (x_obs.size() != n) throw std::invalid_argument("abduction: observation has the wrong length");
    Vector e(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (parts.noise_gains[i] == 0.0)
            throw DegenerateNoise("noise gain of '" + model.endogenous_names[i] +
                                  "' is zero, so its noise cannot be recovered from an observation");
        double s = x_obs[i] - parts.offsets[i];
        for (std::size_t k = 0; k < n; ++k) s -= parts.coefficients(i, k) * x_obs[k];
        e[i] = s / parts.noise_gains[i];
    }
    return e;
}

SolutionMap::SolutionMap(StructuralSystem system, SolveOptions options)
    : system_(std::move(system)), options_(options) {
    if (system_.is_linear()) {
        linear_.emplace(system_);
        return;
    }
    if (!options_.kappa) {
        try {
            const auto cert = certify(system_, options_.p);
            if (cert.supports_simplicity()) options_.kappa = cert.kappa;
        } catch (const Uncertifiable&) {
        }
    }
}

Vector SolutionMap::operator()(std::span<const double> e) const {
    if (linear_) return linear_->solve(e);
    return picard_solve(system_, e, {}, options_).x_star;
}

void draw_noise(const NoiseSpec& noise, std::uint64_t seed, std::uint64_t row, std::span<double> out) {
    NormalStream rng(seed, row);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = noise.means[j] + std::sqrt(noise.variances[j]) * rng.normal();
}

SampleMatrix sample_observational(const ScmModel& model, std::size_t n, std::uint64_t seed,
                                  const SolveOptions& options) {
    SampleMatrix out(model.endogenous_names, n);
    if (n == 0) return out;
    const SolutionMap solve(StructuralSystem(model), options);
    Vector e(model.size());
    for (std::size_t r = 0; r < n; ++r) {
        draw_noise(model.noise, seed, r, e);
        try {
            const Vector x = solve(e);
            std::copy(x.begin(), x.end(), out.row(r).begin());
        } catch (const Error& err) {
            throw SamplingError(r, err.what());
        }
    }
    return out;
}

}  // namespace cyscm
