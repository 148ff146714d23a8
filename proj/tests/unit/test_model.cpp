#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "cyscm/errors.hpp"
#include "cyscm/model.hpp"
#include "cyscm/model_io.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace cyscm;

namespace {

const char* kToy = R"({
  "variables": ["C", "I"],
  "mechanisms": [
    {"type": "linear", "coefficients": [0.0, 0.5], "offset": 1.0},
    {"type": "expr", "formula": "0.4*C + 0.5 + e_I"}
  ],
  "noise": {"means": [0.0, 0.0], "variances": [0.04, 0.04]}
})";

bool has_code(const ValidationReport& report, const std::string& code) {
    for (const auto& v : report)
        if (v.code == code) return true;
    return false;
}

std::string schema_field(const std::string& text) {
    try {
        parse_model(text);
    } catch (const SchemaError& err) {
        return err.field();
    }
    return "<no error>";
}

ScmModel random_model(gen::Rng& rng) {
    const std::size_t n = 1 + gen::index(rng, 5);
    ScmModel m;
    m.endogenous_names = gen::names(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (gen::coin(rng)) {
            LinearRow row;
            for (std::size_t k = 0; k < n; ++k) row.coefficients.push_back(gen::uniform(rng, -1.0, 1.0));
            row.offset = gen::uniform(rng, -1e3, 1e3);
            row.noise_coefficient = gen::uniform(rng, -2.0, 2.0);
            m.mechanisms.push_back(row);
        } else {
            m.mechanisms.push_back(ExprMechanism{gen::expr_tree(rng, n, 4)});
        }
        m.noise.means.push_back(gen::uniform(rng, -1.0, 1.0));
        m.noise.variances.push_back(gen::uniform(rng, 0.0, 3.0));
    }
    return m;
}

}  // namespace

TEST_CASE("toy model file parses with defaults") {
    const ScmModel m = parse_model(kToy);
    REQUIRE(m.size() == 2);
    const auto& row = std::get<LinearRow>(m.mechanisms[0]);
    CHECK(row.coefficients == std::vector<double>{0.0, 0.5});
    CHECK(row.offset == 1.0);
    CHECK(row.noise_coefficient == 1.0);
    CHECK(m.noise_name(1) == "e_I");
    CHECK(*m.index_of("I") == 1);
    CHECK_FALSE(m.index_of("Q"));
    CHECK_FALSE(is_linear(m));
    const std::vector<double> x{1.5625, 1.125};
    const std::vector<double> e{0.0, 0.0};
    const Vector fx = evaluate(m, x, e);
    CHECK(fx[0] == doctest::Approx(1.5625));
    CHECK(fx[1] == doctest::Approx(1.125));
}

TEST_CASE("malformed JSON reports line and column") {
    try {
        parse_model("{\n  \"variables\": [\"C\",\n  ]\n}");
        FAIL("expected a parse error");
    } catch (const ParseError& err) {
        CHECK(err.line() == 3);
        CHECK(err.column() >= 1);
    }
    CHECK_THROWS_AS(parse_model(""), ParseError);
}

TEST_CASE("schema errors name the field") {
    CHECK(schema_field(R"({"mechanisms": [], "noise": {"means": [], "variances": []}})") == "<root>");
    CHECK(schema_field(R"({"variables": ["C", "I"], "mechanisms": [
        {"type": "linear", "coefficients": [0, 0.5]},
        {"type": "expr", "formula": "0.4*C +"}],
        "noise": {"means": [0, 0], "variances": [1, 1]}})") == "mechanisms[1].formula");
    CHECK(schema_field(R"({"variables": ["C", "I"], "mechanisms": [
        {"type": "linear", "coefficients": [0, 0.5]}],
        "noise": {"means": [0, 0], "variances": [1, 1]}})") == "mechanisms");
    CHECK(schema_field(R"({"variables": ["C"], "mechanisms": [{"type": "quadratic"}],
        "noise": {"means": [0], "variances": [1]}})") == "mechanisms[0].type");
    CHECK(schema_field(R"({"variables": ["C"], "mechanisms": [{"type": "linear", "coefficients": ["a"]}],
        "noise": {"means": [0], "variances": [1]}})") == "mechanisms[0].coefficients[0]");
    CHECK(schema_field(R"({"variables": ["C"], "mechanisms": [{"type": "linear", "coefficients": [0]}],
        "noise": {"means": [0], "variances": [-1]}})") == "model");
}

TEST_CASE("validation codes") {
    ScmModel m = parse_model(kToy);
    CHECK(validate_model(m).empty());

    ScmModel dup = m;
    dup.endogenous_names[1] = "C";
    CHECK(has_code(validate_model(dup), "duplicate name"));

    ScmModel count = m;
    count.mechanisms.pop_back();
    CHECK(has_code(validate_model(count), "mechanism count mismatch"));

    ScmModel noise = m;
    noise.noise.variances.push_back(1.0);
    CHECK(has_code(validate_model(noise), "noise dimension mismatch"));

    ScmModel neg = m;
    neg.noise.variances[0] = -0.1;
    CHECK(has_code(validate_model(neg), "negative variance"));

    ScmModel nan = m;
    std::get<LinearRow>(nan.mechanisms[0]).coefficients[1] = std::numeric_limits<double>::quiet_NaN();
    CHECK(has_code(validate_model(nan), "non-finite value"));

    ScmModel len = m;
    std::get<LinearRow>(len.mechanisms[0]).coefficients.push_back(1.0);
    CHECK(has_code(validate_model(len), "coefficient length mismatch"));

    ScmModel renamed = m;
    renamed.endogenous_names[0] = "K";  // the formula still says C
    CHECK(has_code(validate_model(renamed), "unresolved symbol"));

    ScmModel empty = m;
    empty.mechanisms[1] = ExprMechanism{};
    CHECK(has_code(validate_model(empty), "empty expression"));

    ScmModel ambiguous;
    ambiguous.endogenous_names = {"x", "e_x"};
    ambiguous.mechanisms = {LinearRow{{0, 0}}, LinearRow{{0, 0}}};
    ambiguous.noise = {{0, 0}, {1, 1}};
    CHECK(has_code(validate_model(ambiguous), "ambiguous name"));

    CHECK_THROWS_AS(require_valid(dup), SchemaError);
}

TEST_CASE("serialization round-trips random models") {
    gen::Rng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const ScmModel m = random_model(rng);
        REQUIRE(validate_model(m).empty());
        const std::string text = serialize_model(m);
        const ScmModel back = parse_model(text);
        CHECK(back == m);
        CHECK(serialize_model(back) == text);
        CHECK(model_digest(back) == model_digest(m));
    }
}

TEST_CASE("digest changes with the model") {
    ScmModel a = parse_model(kToy);
    ScmModel b = a;
    b.noise.variances[0] = 0.05;
    CHECK(model_digest(a) != model_digest(b));
    CHECK(model_digest(a).size() == 16);
}

TEST_CASE("save and load") {
    const auto path = std::filesystem::temp_directory_path() / "cyscm_model_roundtrip.json";
    const ScmModel m = parse_model(kToy);
    save_model(m, path);
    CHECK(load_model(path) == m);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_model(path), Error);
}

TEST_CASE("shipped model files load") {
    for (const char* name : {"toy", "toy_expr", "tanh_cycle", "divergent", "division", "chain"}) {
        INFO(name);
        CHECK_NOTHROW(load_model(std::filesystem::path(CYSCM_DATA_DIR) / "models" / (std::string(name) + ".json")));
    }
}

TEST_CASE("syntactic parents") {
    const ScmModel m = parse_model(R"({"variables": ["a", "b", "c"], "mechanisms": [
        {"type": "linear", "coefficients": [0, 0, 0], "noise_coefficient": 0},
        {"type": "linear", "coefficients": [0.5, 0, 0.1]},
        {"type": "expr", "formula": "tanh(b) + 0*a + e_a"}],
        "noise": {"means": [0, 0, 0], "variances": [1, 1, 1]}})");
    const ParentSet parents = syntactic_parents(m);
    CHECK(parents[0].endogenous.empty());
    CHECK(parents[0].exogenous.empty());
    CHECK(parents[1].endogenous == std::vector<std::size_t>{0, 2});
    CHECK(parents[1].exogenous == std::vector<std::size_t>{1});
    CHECK(parents[2].endogenous == std::vector<std::size_t>{0, 1});
    CHECK(parents[2].exogenous == std::vector<std::size_t>{0});
}

TEST_CASE("linear parts") {
    const ScmModel toy = parse_model(R"({"variables": ["C", "I"], "mechanisms": [
        {"type": "linear", "coefficients": [0, 0.5], "offset": 1},
        {"type": "linear", "coefficients": [0.4, 0], "offset": 0.5, "noise_coefficient": 0.8}],
        "noise": {"means": [0, 0], "variances": [0.04, 0.04]}})");
    const LinearParts parts = linear_parts(toy);
    CHECK(parts.coefficients(0, 1) == 0.5);
    CHECK(parts.coefficients(1, 0) == 0.4);
    CHECK(parts.offsets == Vector{1.0, 0.5});
    CHECK(parts.noise_gains == Vector{1.0, 0.8});
    CHECK_THROWS_AS(linear_parts(parse_model(kToy)), NonLinearModel);
}
