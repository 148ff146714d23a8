#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "cyscm/model_io.hpp"
#include "doctest.h"
#include "json.hpp"

using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

std::string model(const char* name) {
    return (std::filesystem::path(CYSCM_DATA_DIR) / "models" / (std::string(name) + ".json")).string();
}

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cyscm::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args, int expected_code = 0) {
    args.insert(args.begin(), "--json");
    const Result r = run(args);
    CHECK(r.code == expected_code);
    return json::parse(r.out);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path temp(const char* name) { return std::filesystem::temp_directory_path() / name; }

}  // namespace

TEST_CASE("certify verdicts") {
    const Result toy = run({"certify", model("toy"), "--p", "2"});
    CHECK(toy.code == 0);
    CHECK(toy.out.find("simple: yes") != std::string::npos);
    const json j = run_json({"certify", model("toy")});
    CHECK(j["certificate"]["kappa"].get<double>() <= 0.6403);
    CHECK(j["certificate"]["is_certified"] == true);
    CHECK(j["certificate"]["p"] == "2");

    const Result bad = run({"certify", model("divergent")});
    CHECK(bad.code == 2);
    CHECK(bad.out.find("simple: no") != std::string::npos);

    const Result div = run({"certify", model("division")});
    CHECK(div.code == 2);
    CHECK(div.out.find("simple: unknown") != std::string::npos);
    CHECK(div.out.find("--samples") != std::string::npos);

    const json sampled = run_json({"--seed", "3", "certify", model("division"), "--samples", "200"}, 2);
    CHECK(sampled["payload"]["sampled_estimate"]["is_certified"] == false);
    CHECK(sampled["seed"] == 3);
}

TEST_CASE("certify input errors") {
    CHECK(run({"certify", "/nonexistent/model.json"}).code == 1);
    CHECK(run({"certify", model("toy"), "--p", "7"}).code == 1);
    CHECK(run({"certify"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"--help"}).code == 0);
    const auto bad = temp("cyscm_cli_bad.json");
    std::ofstream(bad) << "{\"variables\": [";
    const Result r = run({"certify", bad.string()});
    CHECK(r.code == 1);
    CHECK(r.err.find("line") != std::string::npos);
    std::filesystem::remove(bad);
}

TEST_CASE("solve") {
    const json toy = run_json({"solve", model("toy"), "--zero-noise"});
    CHECK(std::abs(toy["payload"]["x_star"]["C"].get<double>() - 1.5625) < 1e-9);
    CHECK(std::abs(toy["payload"]["x_star"]["I"].get<double>() - 1.125) < 1e-9);

    const json chain = run_json({"solve", model("chain"), "--noise", "0.1,0.2,0.3"});
    CHECK(chain["payload"]["iterations"].get<int>() <= 4);

    CHECK(run({"solve", model("divergent"), "--zero-noise"}).code == 3);
    CHECK(run({"solve", model("toy"), "--noise", "1"}).code == 1);
    CHECK(run({"solve", model("toy")}).code == 1);
    CHECK(run({"--max-iter", "3", "solve", model("toy"), "--zero-noise"}).code == 3);
}

TEST_CASE("intervene writes the intervened model") {
    const auto out = temp("cyscm_cli_intervened.json");
    const Result r = run({"intervene", model("toy"), "--ss", "I:0.8:1.0", "--out", out.string()});
    CHECK(r.code == 0);
    const auto m = cyscm::load_model(out);
    const auto parts = cyscm::linear_parts(m);
    CHECK(parts.coefficients(1, 0) == doctest::Approx(0.32));
    CHECK(parts.coefficients(0, 1) == doctest::Approx(0.5));
    CHECK(parts.offsets[1] == doctest::Approx(1.4));
    CHECK(parts.offsets[0] == doctest::Approx(1.0));
    std::filesystem::remove(out);

    CHECK(run({"intervene", model("toy"), "--ss", "Q:1:1"}).code == 1);
    CHECK(run({"intervene", model("toy"), "--ss", "I:0.8"}).code == 1);
    CHECK(run({"intervene", model("toy"), "--do", "C:abc"}).code == 1);
}

TEST_CASE("flags compose in command-line order") {
    const json j = run_json({"compose", model("toy"), "--ss", "I:0.5:1", "--ss", "I:0.8:2"});
    const auto& c = j["payload"]["composition"]["coordinates"][0];
    CHECK(c["variable"] == "I");
    CHECK(c["a"].get<double>() == doctest::Approx(0.4));
    CHECK(c["b"].get<double>() == doctest::Approx(2.8));

    const json rev = run_json({"compose", model("toy"), "--ss", "I:0.8:2", "--ss", "I:0.5:1"});
    CHECK(rev["payload"]["composition"]["coordinates"][0]["b"].get<double>() == doctest::Approx(2.0));

    const json mixed = run_json({"compose", model("toy"), "--ss", "C:3:1", "--do", "C:2", "--ss", "C:0.5:1"});
    CHECK(mixed["payload"]["composition"]["coordinates"][0]["a"].get<double>() == 0.0);
    CHECK(mixed["payload"]["composition"]["coordinates"][0]["b"].get<double>() == doctest::Approx(2.0));
    CHECK(mixed["payload"]["composition"]["needs_kappa_max"] == true);

    const json hard = run_json({"intervene", model("toy"), "--do", "C:2"});
    CHECK(hard["payload"]["composition"]["coordinates"][0]["a"].get<double>() == 0.0);
    CHECK(hard["payload"]["composition"]["coordinates"][0]["b"].get<double>() == 2.0);
}

TEST_CASE("counterfactual queries") {
    const json j = run_json({"counterfactual", model("toy"), "--obs", "1.5625,1.125", "--ss", "I:0.8:1.0"});
    CHECK(j["payload"]["counterfactual"]["C"].get<double>() == doctest::Approx(2.0238).epsilon(1e-4));
    CHECK(j["payload"]["counterfactual"]["I"].get<double>() == doctest::Approx(2.0476).epsilon(1e-4));
    CHECK(j["payload"]["response_map"]["offset"][1].get<double>() == doctest::Approx(25.0 / 21.0));

    const json same = run_json({"counterfactual", model("toy"), "--obs", "0.5,-1"});
    CHECK(same["payload"]["counterfactual"]["C"].get<double>() == doctest::Approx(0.5));
    CHECK(same["payload"]["counterfactual"]["I"].get<double>() == doctest::Approx(-1.0));

    CHECK(run({"counterfactual", model("toy_expr"), "--obs", "1,1"}).code == 4);
    CHECK(run({"counterfactual", model("toy"), "--obs", "1"}).code == 1);

    const json mc = run_json({"--seed", "5", "counterfactual", model("toy"), "--ss", "I:0.8:1.0", "--samples", "20000"});
    CHECK(mc["payload"]["mean"]["C'"].get<double>() == doctest::Approx(2.0238).epsilon(0.01));
}

TEST_CASE("degenerate noise exits with the abduction code") {
    auto m = cyscm::load_model(model("toy"));
    std::get<cyscm::LinearRow>(m.mechanisms[0]).noise_coefficient = 0.0;
    const auto path = temp("cyscm_cli_degenerate.json");
    cyscm::save_model(m, path);
    const Result r = run({"counterfactual", path.string(), "--obs", "1,1"});
    CHECK(r.code == 4);
    CHECK(r.out.find("abduction failed") != std::string::npos);
    std::filesystem::remove(path);
}

TEST_CASE("tailcheck") {
    const auto csv = temp("cyscm_cli_tail.csv");
    const json j = run_json({"tailcheck", model("toy"), "--ss", "I:0.8:1.0", "--h", "proj:C'", "--n", "50000", "--csv",
                             csv.string()});
    CHECK(j["payload"]["pass"] == true);
    CHECK(j["payload"]["rows"].size() == 4);
    CHECK(slurp(csv).rfind("t,empirical,bound\n", 0) == 0);
    std::filesystem::remove(csv);

    CHECK(run({"tailcheck", model("toy"), "--t-grid", "0,0.2"}).code == 1);
    CHECK(run({"tailcheck", model("toy"), "--h", "proj:Z"}).code == 1);
    CHECK(run({"tailcheck", model("division"), "--n", "100"}).code == 2);
    CHECK(run({"tailcheck", model("toy"), "--ss", "I:1.5:0", "--n", "100"}).code == 2);
    CHECK(run({"tailcheck", model("toy"), "--ss", "I:1.5:0", "--n", "100", "--allow-kappa-max"}).code == 0);

    const json asserted = run_json({"tailcheck", model("division"), "--assert-kappa", "0.9", "--n", "1000"});
    CHECK(asserted["certificate"]["method"] == "user-asserted");
    CHECK(asserted["payload"]["user_asserted"] == true);
}

TEST_CASE("sample output is deterministic") {
    const auto a = temp("cyscm_cli_a.csv");
    const auto b = temp("cyscm_cli_b.csv");
    CHECK(run({"--seed", "11", "sample", model("toy"), "--n", "500", "--out", a.string()}).code == 0);
    CHECK(run({"--seed", "11", "sample", model("toy"), "--n", "500", "--out", b.string()}).code == 0);
    CHECK(slurp(a) == slurp(b));
    CHECK(slurp(a).rfind("C,I\n", 0) == 0);

    CHECK(run({"sample", model("toy"), "--n", "1", "--out", a.string()}).code == 0);
    const std::string one = slurp(a);
    CHECK(std::count(one.begin(), one.end(), '\n') == 2);
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST_CASE("json mode prints one object and nothing else") {
    const Result r = run({"--json", "sample", model("toy"), "--n", "10"});
    CHECK(r.code == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 1);
    const json j = json::parse(r.out);
    for (const char* key : {"command", "model_digest", "seed", "certificate", "payload", "timing"})
        CHECK(j.contains(key));
    CHECK(j["command"]["name"] == "sample");

    const Result fail = run({"--json", "solve", model("divergent"), "--zero-noise"});
    CHECK(fail.code == 3);
    CHECK(json::accept(fail.out));
}
