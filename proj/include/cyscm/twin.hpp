#pragma once

// Twin models: a factual copy and a counterfactual (primed) copy of the same
// mechanisms that share one exogenous noise vector. Solving the twin under an
// intervention on the primed copy gives the joint law of (X, X').

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cyscm/interventions.hpp"
#include "cyscm/model.hpp"
#include "cyscm/sample.hpp"
#include "cyscm/solver.hpp"
#include "cyscm/system.hpp"

namespace cyscm {

class TwinModel {
public:
    std::size_t size() const noexcept { return base_.size(); }  // n; the twin has 2n coordinates
    const ScmModel& base() const noexcept { return base_; }
    const ScmModel& factual() const noexcept { return factual_; }
    const ScmModel& counterfactual() const noexcept { return counterfactual_; }

    // Exogenous index read by each of the 2n coordinates; i and i' map to the same term.
    const std::vector<std::size_t>& noise_map() const noexcept { return noise_map_; }

    // [names..., names + "'"...]
    std::vector<std::string> names() const;

    // Flat 2n-coordinate system for solvers and certification.
    StructuralSystem flatten() const;

private:
    friend TwinModel build_twin(const ScmModel& model);
    friend TwinModel intervene_twin(const TwinModel& twin, const Intervention& iv_unprimed,
                                    const Intervention& iv_primed);

    ScmModel base_;
    ScmModel factual_;
    ScmModel counterfactual_;
    std::vector<std::size_t> noise_map_;
};

std::string primed(const std::string& name);

// Throws SchemaError if the model is invalid.
TwinModel build_twin(const ScmModel& model);

// Applies each intervention to its own copy. The canonical counterfactual
// query leaves the factual copy alone and intervenes on the primed copy.
TwinModel intervene_twin(const TwinModel& twin, const Intervention& iv_unprimed, const Intervention& iv_primed);

// Picard solve of the flattened twin at shared noise e.
SolveReport solve_twin(const TwinModel& twin, std::span<const double> e, const SolveOptions& options = {});

// x' = matrix * x_obs + offset.
struct CounterfactualMap {
    Matrix matrix;
    Vector offset;

    Vector apply(std::span<const double> x_obs) const;
};

// matrix = (I - A')^{-1} D' D^{-1} (I - A), offset = (I - A')^{-1}(b' - D' D^{-1} b),
// where primes denote the intervened model. Throws NonLinearModel,
// SingularSystem or DegenerateNoise.
CounterfactualMap counterfactual_map_linear(const ScmModel& model, const Intervention& iv);

// Abduction (recover e from x_obs), action (apply iv), prediction (solve the
// intervened model at the same e).
Vector counterfactual_aap(const ScmModel& model, const Intervention& iv, std::span<const double> x_obs,
                          const SolveOptions& options = {});

// Action and prediction for a caller-supplied noise value.
Vector counterfactual_at_noise(const ScmModel& model, const Intervention& iv, std::span<const double> e,
                               const SolveOptions& options = {});

// n rows of (x, x'), one shared noise draw per row; row r depends only on (seed, r).
SampleMatrix counterfactual_sample(const TwinModel& twin, std::size_t n, std::uint64_t seed,
                                   const SolveOptions& options = {});

struct EquivalenceReport {
    std::size_t observations = 0;
    double max_discrepancy = 0.0;         // twin route vs abduction-action-prediction, counterfactual part
    double max_factual_discrepancy = 0.0; // factual copy of the twin vs the observation
    double tolerance = 0.0;
    bool pass = false;
};

// For n_obs observations drawn from the model, compares the primed half of the
// intervened twin solved at the abducted noise with counterfactual_aap.
EquivalenceReport verify_twin_aap_equivalence(const ScmModel& model, const Intervention& iv, std::size_t n_obs,
                                              std::uint64_t seed, double tol);

}  // namespace cyscm
