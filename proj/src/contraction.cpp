#include "cyscm/contraction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "cyscm/errors.hpp"
#include "cyscm/rng.hpp"

namespace cyscm {

std::string_view to_string(CertMethod m) {
    switch (m) {
    case CertMethod::LinearOperatorNorm: return "linear-operator-norm";
    case CertMethod::LinearFrobeniusBound: return "linear-frobenius-bound";
    case CertMethod::IntervalDerivativeBound: return "interval-derivative-bound";
    case CertMethod::SampledEstimate: return "sampled-estimate";
    case CertMethod::UserAsserted: return "user-asserted";
    }
    return "?";
}

namespace {

ContractionCertificate certify_matrix(const Matrix& a, Norm p, CertMethod exact_method) {
    ContractionCertificate cert;
    cert.p = p;
    cert.is_certified = true;
    cert.method = exact_method;
    switch (p) {
    case Norm::L1: cert.kappa = max_abs_column_sum(a); break;
    case Norm::Linf: cert.kappa = max_abs_row_sum(a); break;
    case Norm::L2: {
        const double frob = frobenius_norm(a);
        cert.frobenius_bound = frob;
        const auto power = spectral_norm(a, 1e-10, 10'000);
        if (power.converged) {
            cert.kappa = std::min(power.value, frob);
        } else {
            cert.kappa = frob;
            if (exact_method == CertMethod::LinearOperatorNorm) cert.method = CertMethod::LinearFrobeniusBound;
        }
        break;
    }
    }
    return cert;
}

}  // namespace

ContractionCertificate certify_linear(const StructuralSystem& system, Norm p) {
    return certify_matrix(system.linear_form().coefficients, p, CertMethod::LinearOperatorNorm);
}

ContractionCertificate certify_linear(const ScmModel& model, Norm p) {
    return certify_matrix(linear_parts(model).coefficients, p, CertMethod::LinearOperatorNorm);
}

ContractionCertificate bound_expr_lipschitz(const StructuralSystem& system, Norm p) {
    Matrix bounds(system.dim(), system.dim());
    for (std::size_t i = 0; i < system.dim(); ++i) {
        const auto row = system.derivative_bound_row(i);
        for (std::size_t k = 0; k < row.size(); ++k) bounds(i, k) = row[k];
    }
    auto cert = certify_matrix(bounds, p, CertMethod::IntervalDerivativeBound);
    cert.frobenius_bound.reset();
    return cert;
}

ContractionCertificate bound_expr_lipschitz(const ScmModel& model, Norm p) {
    return bound_expr_lipschitz(StructuralSystem(model), p);
}

ContractionCertificate certify(const StructuralSystem& system, Norm p) {
    return system.is_linear() ? certify_linear(system, p) : bound_expr_lipschitz(system, p);
}

ContractionCertificate certify(const ScmModel& model, Norm p) { return certify(StructuralSystem(model), p); }

ContractionCertificate estimate_kappa_sampled(const StructuralSystem& system, Norm p, std::size_t n_pairs,
                                              std::uint64_t seed) {
    if (n_pairs == 0) throw std::invalid_argument("estimate_kappa_sampled needs at least one pair");
    constexpr std::array<double, 3> radii{1.0, 10.0, 100.0};
    const std::size_t n = system.dim();
    const std::size_t d = system.noise_dim();
    const NoiseSpec& noise = system.noise();

    Vector x(n), y(n), e(d), fx(n), fy(n), dx(n), df(n);
    double best = 0.0;
    for (std::size_t k = 0; k < n_pairs; ++k) {
        NormalStream rng(seed, k);
        const double r = radii[k % radii.size()];
        for (auto& v : x) v = r * rng.normal();
        for (auto& v : y) v = r * rng.normal();
        for (std::size_t j = 0; j < d; ++j) {
            const double mean = j < noise.means.size() ? noise.means[j] : 0.0;
            const double var = j < noise.variances.size() ? noise.variances[j] : 0.0;
            e[j] = mean + std::sqrt(var) * rng.normal();
        }
        system.evaluate(x, e, fx);
        system.evaluate(y, e, fy);
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(fx[i]) || !std::isfinite(fy[i]))
                throw NumericalFailure("non-finite mechanism value while sampling pair " + std::to_string(k));
            dx[i] = x[i] - y[i];
            df[i] = fx[i] - fy[i];
        }
        const double denom = vector_norm(dx, p);
        if (denom == 0.0) continue;
        best = std::max(best, vector_norm(df, p) / denom);
    }
    ContractionCertificate cert;
    cert.p = p;
    cert.kappa = best;
    cert.method = CertMethod::SampledEstimate;
    cert.is_certified = false;
    return cert;
}

ContractionCertificate estimate_kappa_sampled(const ScmModel& model, Norm p, std::size_t n_pairs, std::uint64_t seed) {
    return estimate_kappa_sampled(StructuralSystem(model), p, n_pairs, seed);
}

ContractionCertificate user_asserted(double kappa, Norm p) {
    if (!(kappa >= 0.0)) throw std::invalid_argument("asserted kappa must be nonnegative");
    ContractionCertificate cert;
    cert.p = p;
    cert.kappa = kappa;
    cert.method = CertMethod::UserAsserted;
    cert.is_certified = false;
    return cert;
}

InterventionKappa kappa_after_intervention(const ContractionCertificate& cert, const Intervention& iv) {
    InterventionKappa out;
    out.certificate = cert;
    out.a_max = iv.a_max();
    if (out.a_max > 1.0) {
        // ||diag(a)||_p = max |a_j| for every p
        out.certificate.kappa = out.a_max * cert.kappa;
        out.certificate.frobenius_bound.reset();
        out.scaled = true;
    }
    out.simple_guaranteed = out.certificate.supports_simplicity();
    return out;
}

}  // namespace cyscm
