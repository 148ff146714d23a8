#include <cmath>
#include <filesystem>

#include "cyscm/contraction.hpp"
#include "cyscm/errors.hpp"
#include "cyscm/model_io.hpp"
#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cyscm;

namespace {

ScmModel model_file(const char* name) {
    return load_model(std::filesystem::path(CYSCM_DATA_DIR) / "models" / (std::string(name) + ".json"));
}

}  // namespace

TEST_CASE("toy model certificates in every norm") {
    const ScmModel toy = model_file("toy");
    const auto l2 = certify(toy, Norm::L2);
    CHECK(l2.is_certified);
    CHECK(l2.method == CertMethod::LinearOperatorNorm);
    CHECK(l2.kappa == doctest::Approx(oracle::spectral_norm_2x2({{0, 0.5}, {0.4, 0}})).epsilon(1e-8));
    REQUIRE(l2.frobenius_bound);
    CHECK(std::abs(*l2.frobenius_bound - 0.6403) < 1e-4);
    CHECK(l2.kappa <= 0.6403);
    CHECK(l2.supports_simplicity());

    const auto l1 = certify(toy, Norm::L1);
    CHECK(l1.kappa == doctest::Approx(0.5));
    CHECK_FALSE(l1.frobenius_bound);
    CHECK(certify(toy, Norm::Linf).kappa == doctest::Approx(0.5));
}

TEST_CASE("expression toy has the same bound as the linear toy") {
    const auto cert = certify(model_file("toy_expr"), Norm::L2);
    CHECK(cert.method == CertMethod::IntervalDerivativeBound);
    CHECK(cert.is_certified);
    CHECK(cert.kappa == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(bound_expr_lipschitz(model_file("toy_expr"), Norm::Linf).kappa == doctest::Approx(0.5));
}

TEST_CASE("self-loop with gain two is not contractive") {
    const auto cert = certify(model_file("divergent"), Norm::L2);
    CHECK(cert.kappa == doctest::Approx(2.0));
    CHECK_FALSE(cert.supports_simplicity());
}

TEST_CASE("division is uncertifiable but can be sampled") {
    const ScmModel m = model_file("division");
    CHECK_THROWS_AS(certify(m, Norm::L2), Uncertifiable);
    const auto est = estimate_kappa_sampled(m, Norm::L2, 2000, 3);
    CHECK(est.method == CertMethod::SampledEstimate);
    CHECK_FALSE(est.is_certified);
    CHECK_FALSE(est.supports_simplicity());
    CHECK(est.kappa > 0.0);
    CHECK(est.kappa < 1.0);
    CHECK(estimate_kappa_sampled(m, Norm::L2, 2000, 3).kappa == est.kappa);
}

TEST_CASE("certify_linear rejects expression models") {
    CHECK_THROWS_AS(certify_linear(model_file("toy_expr"), Norm::L2), NonLinearModel);
}

TEST_CASE("sampled estimates never exceed certified constants") {
    gen::Rng rng(17);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 2 + gen::index(rng, 4);
        const ScmModel m = trial % 2 ? gen::linear_model(rng, n).model : gen::tanh_model(rng, n).model;
        for (Norm p : {Norm::L1, Norm::L2, Norm::Linf}) {
            const auto cert = certify(m, p);
            const auto est = estimate_kappa_sampled(m, p, 300, trial);
            CHECK(est.kappa <= cert.kappa * (1.0 + 1e-9) + 1e-12);
        }
    }
}

TEST_CASE("random linear certificates match the Frobenius construction") {
    gen::Rng rng(23);
    for (int trial = 0; trial < 50; ++trial) {
        const auto draw = gen::linear_model(rng, 2 + gen::index(rng, 5));
        const auto cert = certify(draw.model, Norm::L2);
        REQUIRE(cert.frobenius_bound);
        CHECK(*cert.frobenius_bound == doctest::Approx(oracle::frobenius(draw.a)).epsilon(1e-12));
        CHECK(cert.kappa <= *cert.frobenius_bound + 1e-12);
        if (draw.a.size() == 2) CHECK(cert.kappa == doctest::Approx(oracle::spectral_norm_2x2(draw.a)).epsilon(1e-7));
    }
}

TEST_CASE("user assertion") {
    const auto cert = user_asserted(0.9, Norm::L2);
    CHECK(cert.method == CertMethod::UserAsserted);
    CHECK_FALSE(cert.is_certified);
    CHECK(cert.supports_simplicity());
    CHECK_FALSE(user_asserted(1.2, Norm::L2).supports_simplicity());
    CHECK(to_string(CertMethod::UserAsserted) == "user-asserted");
}

TEST_CASE("kappa after intervention") {
    ContractionCertificate cert;
    cert.kappa = 0.6403;
    cert.is_certified = true;
    const auto small = kappa_after_intervention(cert, Intervention::shift_scale(0, 0.8, 1.0));
    CHECK_FALSE(small.scaled);
    CHECK(small.certificate.kappa == doctest::Approx(0.6403));
    CHECK(small.simple_guaranteed);

    const auto mid = kappa_after_intervention(cert, Intervention::shift_scale(0, 1.5, 0.0));
    CHECK(mid.scaled);
    CHECK(mid.certificate.kappa == doctest::Approx(0.96045));
    CHECK(mid.simple_guaranteed);

    const auto big = kappa_after_intervention(cert, Intervention::shift_scale(0, 1.6, 0.0));
    CHECK(big.certificate.kappa == doctest::Approx(1.02448));
    CHECK_FALSE(big.simple_guaranteed);
}
