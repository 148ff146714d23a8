#include <cmath>

#include "cyscm/contraction.hpp"
#include "cyscm/errors.hpp"
#include "cyscm/interventions.hpp"
#include "cyscm/model.hpp"
#include "doctest.h"
#include "generators.hpp"
#include "oracles.hpp"

using namespace cyscm;

namespace {

ScmModel toy() {
    Matrix a(2, 2);
    a(0, 1) = 0.5;
    a(1, 0) = 0.4;
    const std::vector<double> b{1.0, 0.5}, gains{1.0, 1.0}, means{0.0, 0.0}, vars{0.04, 0.04};
    return make_linear_model(a, b, gains, means, vars, {"C", "I"});
}

double max_eval_gap(const ScmModel& a, const ScmModel& b, gen::Rng& rng) {
    double gap = 0.0;
    const std::size_t n = a.size();
    for (int s = 0; s < 20; ++s) {
        std::vector<double> x(n), e(n);
        for (auto& v : x) v = gen::uniform(rng, -3, 3);
        for (auto& v : e) v = gen::uniform(rng, -3, 3);
        const Vector fa = evaluate(a, x, e);
        const Vector fb = evaluate(b, x, e);
        for (std::size_t i = 0; i < n; ++i) gap = std::max(gap, std::abs(fa[i] - fb[i]));
    }
    return gap;
}

}  // namespace

TEST_CASE("shift-scale on the toy investment equation") {
    const ScmModel out = apply_shift_scale(toy(), Intervention::shift_scale(1, 0.8, 1.0));
    const LinearParts p = linear_parts(out);
    CHECK(p.coefficients(0, 1) == doctest::Approx(0.5));
    CHECK(p.coefficients(1, 0) == doctest::Approx(0.32));
    CHECK(p.offsets[0] == doctest::Approx(1.0));
    CHECK(p.offsets[1] == doctest::Approx(1.4));
    CHECK(p.noise_gains[1] == doctest::Approx(0.8));
    CHECK(frobenius_norm(p.coefficients) == doctest::Approx(0.5936).epsilon(1e-4));
}

TEST_CASE("hard intervention fixes the value") {
    const ScmModel out = do_intervention(toy(), 0, 2.0);
    const std::vector<double> x{9.0, 9.0}, e{5.0, 5.0};
    CHECK(evaluate(out, x, e)[0] == 2.0);
    const auto sym = SymbolTable::for_variables(out.endogenous_names);
    ScmModel expr = toy();
    expr.mechanisms[1] = ExprMechanism{parse_expr("0.4*C + 0.5 + e_I", sym)};
    const ScmModel fixed = do_intervention(expr, 1, -3.0);
    CHECK(evaluate(fixed, x, e)[1] == -3.0);
    CHECK(syntactic_parents(fixed)[1].endogenous.empty());
}

TEST_CASE("identity intervention leaves expressions untouched") {
    ScmModel m = toy();
    const auto sym = SymbolTable::for_variables(m.endogenous_names);
    m.mechanisms[0] = ExprMechanism{parse_expr("tanh(I) + e_C", sym)};
    CHECK(apply_shift_scale(m, Intervention::shift_scale(0, 1.0, 0.0)) == m);
    CHECK(apply_shift_scale(m, Intervention{}) == m);
}

TEST_CASE("compose folds stages in order") {
    const std::vector<Intervention> stages{Intervention::shift_scale(1, 0.5, 1.0), Intervention::shift_scale(1, 0.8, 2.0)};
    const Intervention c = compose(stages);
    REQUIRE(c.targets().size() == 1);
    const auto expected = oracle::fold_stages({{0.5, 1.0}, {0.8, 2.0}});
    CHECK(c.targets()[0].scale == doctest::Approx(expected[0]));
    CHECK(c.targets()[0].shift == doctest::Approx(expected[1]));
    CHECK(c.targets()[0].scale == doctest::Approx(0.4));
    CHECK(c.targets()[0].shift == doctest::Approx(2.8));
}

TEST_CASE("hard intervention followed by shift-scale") {
    const std::vector<Intervention> stages{Intervention::hard(0, 2.0), Intervention::shift_scale(0, 3.0, 1.0)};
    const Intervention c = compose(stages);
    CHECK(c.targets()[0].scale == 0.0);
    CHECK(c.targets()[0].shift == doctest::Approx(7.0));
}

TEST_CASE("invalid interventions") {
    CHECK_THROWS_AS(Intervention({{0, 1.0, 0.0}, {0, 2.0, 0.0}}), InvalidIntervention);
    CHECK_THROWS_AS(apply_shift_scale(toy(), Intervention::shift_scale(5, 1.0, 0.0)), InvalidIntervention);
    CHECK_THROWS_AS(compose(std::vector<Intervention>{}), std::invalid_argument);
}

TEST_CASE("composition report") {
    const std::vector<Intervention> ok{Intervention::shift_scale(0, 0.5, 1.0), Intervention::shift_scale(0, -0.9, 0.0)};
    const auto r = check_composition_bound(ok);
    CHECK(r.guarantee_applies);
    CHECK_FALSE(r.needs_kappa_max);
    CHECK(r.coordinates[0].max_stage_scale == doctest::Approx(0.9));

    const std::vector<Intervention> wide{Intervention::shift_scale(0, 2.0, 0.0), Intervention::shift_scale(0, 0.25, 0.0)};
    const auto w = check_composition_bound(wide);
    CHECK(w.coordinates[0].a_comp == doctest::Approx(0.5));
    CHECK_FALSE(w.guarantee_applies);
    CHECK(w.needs_kappa_max);
}

TEST_CASE("compose then apply equals sequential application") {
    gen::Rng rng(31);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = 2 + gen::index(rng, 4);
        const bool linear = trial % 2 == 0;
        const ScmModel m = linear ? gen::linear_model(rng, n).model : gen::tanh_model(rng, n).model;
        const auto stages = gen::stages(rng, n, 4, 1.0);
        ScmModel seq = m;
        for (const auto& s : stages) seq = apply_shift_scale(seq, s);
        const ScmModel once = apply_shift_scale(m, compose(stages));
        CHECK(max_eval_gap(seq, once, rng) < 1e-10);

        const double before = certify(m, Norm::L2).kappa;
        const double after = certify(once, Norm::L2).kappa;
        CHECK(after <= before * (1.0 + 1e-9) + 1e-12);
    }
}
