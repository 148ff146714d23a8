#include "cyscm/twin.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "cyscm/contraction.hpp"
#include "cyscm/errors.hpp"

namespace cyscm {

std::string primed(const std::string& name) { return name + "'"; }

std::vector<std::string> TwinModel::names() const {
    std::vector<std::string> out = base_.endogenous_names;
    for (const auto& name : base_.endogenous_names) out.push_back(primed(name));
    return out;
}

StructuralSystem TwinModel::flatten() const {
    const std::array<const ScmModel*, 2> copies{&factual_, &counterfactual_};
    return StructuralSystem::stacked(copies, names());
}

TwinModel build_twin(const ScmModel& model) {
    require_valid(model);
    TwinModel twin;
    twin.base_ = model;
    twin.factual_ = model;
    twin.counterfactual_ = model;
    const std::size_t n = model.size();
    twin.noise_map_.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) twin.noise_map_[i] = twin.noise_map_[n + i] = i;
    return twin;
}

TwinModel intervene_twin(const TwinModel& twin, const Intervention& iv_unprimed, const Intervention& iv_primed) {
    TwinModel out = twin;
    out.factual_ = apply_shift_scale(twin.factual_, iv_unprimed);
    out.counterfactual_ = apply_shift_scale(twin.counterfactual_, iv_primed);
    return out;
}

SolveReport solve_twin(const TwinModel& twin, std::span<const double> e, const SolveOptions& options) {
    return picard_solve(twin.flatten(), e, {}, options);
}

Vector CounterfactualMap::apply(std::span<const double> x_obs) const {
    Vector out = matrix * x_obs;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += offset[i];
    return out;
}

CounterfactualMap counterfactual_map_linear(const ScmModel& model, const Intervention& iv) {
    const LinearParts before = linear_parts(model);
    const LinearParts after = linear_parts(apply_shift_scale(model, iv));
    const std::size_t n = model.size();
    for (std::size_t i = 0; i < n; ++i)
        if (before.noise_gains[i] == 0.0)
            throw DegenerateNoise("noise gain of '" + model.endogenous_names[i] + "' is zero; abduction is not unique");

    const Matrix i_minus_a = Matrix::identity(n) - before.coefficients;
    const LuFactorization intervened(Matrix::identity(n) - after.coefficients);

    // R = D' D^{-1}
    Vector ratio(n);
    for (std::size_t i = 0; i < n; ++i) ratio[i] = after.noise_gains[i] / before.noise_gains[i];

    Matrix rhs(n, n);
    Vector rhs_offset(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) rhs(i, k) = ratio[i] * i_minus_a(i, k);
        rhs_offset[i] = after.offsets[i] - ratio[i] * before.offsets[i];
    }

    CounterfactualMap map{Matrix(n, n), intervened.solve(rhs_offset)};
    Vector column(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) column[i] = rhs(i, k);
        const Vector solved = intervened.solve(column);
        for (std::size_t i = 0; i < n; ++i) map.matrix(i, k) = solved[i];
    }
    return map;
}

Vector counterfactual_at_noise(const ScmModel& model, const Intervention& iv, std::span<const double> e,
                               const SolveOptions& options) {
    const ScmModel intervened = apply_shift_scale(model, iv);
    return SolutionMap(StructuralSystem(intervened), options)(e);
}

Vector counterfactual_aap(const ScmModel& model, const Intervention& iv, std::span<const double> x_obs,
                          const SolveOptions& options) {
    const Vector e = abduct_noise_linear(model, x_obs);
    return counterfactual_at_noise(model, iv, e, options);
}

SampleMatrix counterfactual_sample(const TwinModel& twin, std::size_t n, std::uint64_t seed,
                                   const SolveOptions& options) {
    SampleMatrix out(twin.names(), n);
    if (n == 0) return out;
    const std::size_t dim = twin.size();
    const SolutionMap factual(StructuralSystem(twin.factual()), options);
    const SolutionMap counterfactual(StructuralSystem(twin.counterfactual()), options);
    Vector e(dim);
    for (std::size_t r = 0; r < n; ++r) {
        draw_noise(twin.base().noise, seed, r, e);
        try {
            const Vector x = factual(e);
            const Vector xp = counterfactual(e);
            auto row = out.row(r);
            std::copy(x.begin(), x.end(), row.begin());
            std::copy(xp.begin(), xp.end(), row.begin() + static_cast<std::ptrdiff_t>(dim));
        } catch (const Error& err) {
            throw SamplingError(r, err.what());
        }
    }
    return out;
}

EquivalenceReport verify_twin_aap_equivalence(const ScmModel& model, const Intervention& iv, std::size_t n_obs,
                                              std::uint64_t seed, double tol) {
    EquivalenceReport report;
    report.tolerance = tol;
    const std::size_t n = model.size();
    const TwinModel twin = intervene_twin(build_twin(model), Intervention{}, iv);
    const StructuralSystem flat = twin.flatten();

    // Twin route: Picard on the stacked system when it is certified
    // contractive, otherwise a direct solve of the 2n-dimensional system.
    SolveOptions picard;
    picard.p = Norm::L2;
    picard.tol = std::min(1e-12, tol / 100.0);
    picard.max_iter = 100'000;
    std::optional<LinearSolver> stacked_direct;
    const auto cert = certify(flat, Norm::L2);
    if (cert.supports_simplicity()) picard.kappa = cert.kappa;
    else stacked_direct.emplace(flat);

    const LinearSolver observational(model);
    Vector draw(n);
    for (std::size_t r = 0; r < n_obs; ++r) {
        draw_noise(model.noise, seed, r, draw);
        const Vector x_obs = observational.solve(draw);

        const Vector e = abduct_noise_linear(model, x_obs);
        const Vector stacked = stacked_direct ? stacked_direct->solve(e) : picard_solve(flat, e, {}, picard).x_star;
        const Vector aap = counterfactual_aap(model, iv, x_obs);

        for (std::size_t i = 0; i < n; ++i) {
            report.max_factual_discrepancy = std::max(report.max_factual_discrepancy, std::abs(stacked[i] - x_obs[i]));
            report.max_discrepancy = std::max(report.max_discrepancy, std::abs(stacked[n + i] - aap[i]));
        }
        ++report.observations;
    }
    report.pass = report.max_discrepancy <= tol && report.max_factual_discrepancy <= tol;
    return report;
}

}  // namespace cyscm
