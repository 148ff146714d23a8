#pragma once

// Global l_p contraction constants:
//   ||f(x, e) - f(y, e)||_p <= kappa ||x - y||_p   for all x, y, e.
// A certified kappa < 1 makes the model uniquely solvable with respect to every
// subset of its variables. Three tiers produce a kappa: exact operator norms of
// linear models, interval derivative bounds of expressions, and a sampled
// lower estimate that never counts as a certificate.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>

#include "cyscm/interventions.hpp"
#include "cyscm/linalg.hpp"
#include "cyscm/model.hpp"
#include "cyscm/system.hpp"

namespace cyscm {

enum class CertMethod {
    LinearOperatorNorm,
    LinearFrobeniusBound,
    IntervalDerivativeBound,
    SampledEstimate,
    UserAsserted,
};

std::string_view to_string(CertMethod m);

struct ContractionCertificate {
    Norm p = Norm::L2;
    double kappa = 0.0;
    CertMethod method = CertMethod::LinearOperatorNorm;
    bool is_certified = false;
    // p = 2 linear certificates also carry the Frobenius upper bound.
    std::optional<double> frobenius_bound;

    // A simplicity claim needs kappa < 1 backed by a certificate or a user assertion.
    bool supports_simplicity() const {
        return kappa < 1.0 && (is_certified || method == CertMethod::UserAsserted);
    }
};

// Operator norm of A: max column sum (p = 1), max row sum (p = inf), or the
// spectral norm by power iteration on A^T A (p = 2, tol 1e-10, 10'000
// iterations; falls back to the Frobenius bound if that does not converge).
// Throws NonLinearModel.
ContractionCertificate certify_linear(const ScmModel& model, Norm p);
ContractionCertificate certify_linear(const StructuralSystem& system, Norm p);

// Operator norm of the bound matrix B[i][k] >= sup |df_i/dx_k| assembled from
// interval derivative rules. Throws Uncertifiable.
ContractionCertificate bound_expr_lipschitz(const ScmModel& model, Norm p);
ContractionCertificate bound_expr_lipschitz(const StructuralSystem& system, Norm p);

// certify_linear for all-linear models, bound_expr_lipschitz otherwise.
ContractionCertificate certify(const ScmModel& model, Norm p);
ContractionCertificate certify(const StructuralSystem& system, Norm p);

// max ||f(x,e) - f(y,e)||_p / ||x - y||_p over n_pairs seeded draws, with x, y
// standard normal scaled by radii cycling through {1, 10, 100} and e from the
// model noise. A lower estimate only: is_certified is false. Throws
// NumericalFailure on a non-finite evaluation.
ContractionCertificate estimate_kappa_sampled(const ScmModel& model, Norm p, std::size_t n_pairs, std::uint64_t seed);
ContractionCertificate estimate_kappa_sampled(const StructuralSystem& system, Norm p, std::size_t n_pairs,
                                              std::uint64_t seed);

ContractionCertificate user_asserted(double kappa, Norm p);

struct InterventionKappa {
    ContractionCertificate certificate;  // unchanged when a_max <= 1, else kappa scaled by a_max
    double a_max = 0.0;
    bool scaled = false;
    bool simple_guaranteed = false;
};

InterventionKappa kappa_after_intervention(const ContractionCertificate& cert, const Intervention& iv);

}  // namespace cyscm
