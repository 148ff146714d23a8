#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cyscm/concentration.hpp"
#include "cyscm/contraction.hpp"
#include "cyscm/errors.hpp"
#include "cyscm/interventions.hpp"
#include "cyscm/model_io.hpp"
#include "cyscm/sample.hpp"
#include "cyscm/solver.hpp"
#include "cyscm/twin.hpp"
#include "json.hpp"

namespace cyscm::cli {

namespace {

using Json = nlohmann::ordered_json;

// Bad command-line input detected after CLI11 has accepted the syntax.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A command that ran to completion but reports a non-zero verdict.
struct Outcome {
    int code = kOk;
};

struct Globals {
    bool json = false;
    std::uint64_t seed = 0;
    double tol = 1e-10;
    std::size_t max_iter = 10'000;
};

struct Context {
    Globals globals;
    std::ostringstream text;  // human-readable output
    Json report;
};

double parse_number(const std::string& token, const std::string& what) {
    double value = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || token.empty())
        throw UsageError("invalid number '" + token + "' in " + what);
    return value;
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = text.find(',', start);
        std::string token = text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        token.erase(0, token.find_first_not_of(" \t"));
        token.erase(token.find_last_not_of(" \t") + 1);
        out.push_back(parse_number(token, what));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::size_t variable_index(const ScmModel& model, const std::string& name) {
    const auto index = model.index_of(name);
    if (!index) throw UsageError("unknown variable '" + name + "'");
    return *index;
}

// One stage per --ss/--do occurrence, in command-line order.
std::vector<Intervention> intervention_stages(const CLI::App& command, const CLI::Option* ss_opt,
                                              const CLI::Option* do_opt, const std::vector<std::string>& ss_values,
                                              const std::vector<std::string>& do_values, const ScmModel& model) {
    std::vector<Intervention> stages;
    std::size_t next_ss = 0;
    std::size_t next_do = 0;
    for (const CLI::Option* opt : command.parse_order()) {
        if (opt == ss_opt) {
            const std::string& spec = ss_values.at(next_ss++);
            const auto second = spec.rfind(':');
            const auto first = second == std::string::npos || second == 0 ? std::string::npos : spec.rfind(':', second - 1);
            if (first == std::string::npos) throw UsageError("--ss expects NAME:a:b, got '" + spec + "'");
            const std::size_t j = variable_index(model, spec.substr(0, first));
            const double a = parse_number(spec.substr(first + 1, second - first - 1), "--ss " + spec);
            const double b = parse_number(spec.substr(second + 1), "--ss " + spec);
            stages.push_back(Intervention::shift_scale(j, a, b));
        } else if (opt == do_opt) {
            const std::string& spec = do_values.at(next_do++);
            const auto colon = spec.rfind(':');
            if (colon == std::string::npos || colon == 0) throw UsageError("--do expects NAME:value, got '" + spec + "'");
            const std::size_t j = variable_index(model, spec.substr(0, colon));
            stages.push_back(Intervention::hard(j, parse_number(spec.substr(colon + 1), "--do " + spec)));
        }
    }
    return stages;
}

Intervention compose_or_identity(const std::vector<Intervention>& stages) {
    if (stages.empty()) return Intervention{};
    return compose(stages);
}

Json certificate_json(const ContractionCertificate& cert) {
    Json j;
    j["p"] = std::string(to_string(cert.p));
    j["kappa"] = cert.kappa;
    j["method"] = std::string(to_string(cert.method));
    j["is_certified"] = cert.is_certified;
    if (cert.frobenius_bound) j["frobenius_bound"] = *cert.frobenius_bound;
    return j;
}

std::optional<ContractionCertificate> try_certify(const ScmModel& model, Norm p) {
    try {
        return certify(model, p);
    } catch (const Uncertifiable&) {
        return std::nullopt;
    }
}

Json vector_json(std::span<const double> v) { return Json(std::vector<double>(v.begin(), v.end())); }

Json matrix_json(const Matrix& m) {
    Json rows = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(vector_json(m.row(r)));
    return rows;
}

Json named_json(const std::vector<std::string>& names, std::span<const double> v) {
    Json j;
    for (std::size_t i = 0; i < names.size(); ++i) j[names[i]] = v[i];
    return j;
}

std::string named_text(const std::vector<std::string>& names, std::span<const double> v) {
    std::string s;
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (i) s += "  ";
        s += names[i] + "=" + format_double(v[i]);
    }
    return s;
}

void print_matrix(std::ostream& os, const std::vector<std::string>& names, const Matrix& m) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        os << "  " << names[r] << ":";
        for (std::size_t c = 0; c < m.cols(); ++c) os << ' ' << format_double(m(r, c));
        os << '\n';
    }
}

// "y = c0 + c1*x1 + ..." with zero slopes kept so every input is visible.
std::string affine_text(const std::string& lhs, double offset, std::span<const double> slopes,
                        const std::vector<std::string>& inputs) {
    std::string s = lhs + " = " + format_double(offset);
    for (std::size_t k = 0; k < slopes.size(); ++k) {
        const double c = slopes[k];
        s += (std::signbit(c) ? " - " : " + ") + format_double(std::abs(c)) + "*" + inputs[k];
    }
    return s;
}

SolveOptions solve_options(const Globals& g, Norm p) {
    SolveOptions o;
    o.p = p;
    o.tol = g.tol;
    o.max_iter = g.max_iter;
    return o;
}

Json composition_json(const CompositionReport& rep, const ScmModel& model) {
    Json coords = Json::array();
    for (const auto& c : rep.coordinates) {
        Json j;
        j["variable"] = model.endogenous_names[c.index];
        j["a"] = c.a_comp;
        j["b"] = c.b_comp;
        j["max_stage_scale"] = c.max_stage_scale;
        coords.push_back(std::move(j));
    }
    Json out;
    out["coordinates"] = std::move(coords);
    out["guarantee_applies"] = rep.guarantee_applies;
    out["needs_kappa_max"] = rep.needs_kappa_max;
    return out;
}

// Prints the composed (a, b) per coordinate and the contraction verdict after
// the intervention. Returns the intervention-adjusted constant when known.
std::optional<InterventionKappa> report_composition(Context& ctx, const ScmModel& model,
                                                    const std::vector<Intervention>& stages, Norm p) {
    auto& os = ctx.text;
    const Intervention composed = compose_or_identity(stages);
    if (!stages.empty()) {
        const CompositionReport rep = check_composition_bound(stages);
        ctx.report["payload"]["composition"] = composition_json(rep, model);
        for (const auto& c : rep.coordinates)
            os << model.endogenous_names[c.index] << ": a=" << format_double(c.a_comp)
               << " b=" << format_double(c.b_comp) << '\n';
    } else {
        ctx.report["payload"]["composition"] = nullptr;
    }
    const auto cert = try_certify(model, p);
    if (!cert) {
        os << "kappa_max: unknown (model is not certifiable)\n";
        ctx.report["payload"]["kappa_after"] = nullptr;
        return std::nullopt;
    }
    const InterventionKappa after = kappa_after_intervention(*cert, composed);
    Json j;
    j["a_max"] = after.a_max;
    j["kappa"] = after.certificate.kappa;
    j["scaled"] = after.scaled;
    j["simple_guaranteed"] = after.simple_guaranteed;
    ctx.report["payload"]["kappa_after"] = std::move(j);
    os << "kappa: " << format_double(cert->kappa) << " (" << to_string(cert->method) << ", p=" << to_string(p) << ")\n";
    if (after.scaled)
        os << "kappa_max: " << format_double(after.certificate.kappa) << " = " << format_double(after.a_max)
           << " * kappa\n";
    else
        os << "kappa_max: " << format_double(after.certificate.kappa) << " (all |a| <= 1, contraction preserved)\n";
    os << "simple after intervention: " << (after.simple_guaranteed ? "yes" : "not guaranteed") << '\n';
    return after;
}

// ---- commands ---------------------------------------------------------------

struct ModelArgs {
    std::string path;
    std::string p = "2";
};

ScmModel load_into(Context& ctx, const std::string& path) {
    ScmModel model = load_model(path);
    ctx.report["model"] = path;
    ctx.report["model_digest"] = model_digest(model);
    return model;
}

Norm norm_arg(const std::string& text) {
    try {
        return parse_norm(text);
    } catch (const std::exception&) {
        throw UsageError("--p must be 1, 2 or inf, got '" + text + "'");
    }
}

struct CertifyArgs {
    ModelArgs m;
    std::size_t samples = 0;
    std::optional<double> assert_kappa;
};

Outcome cmd_certify(Context& ctx, const CertifyArgs& a) {
    const ScmModel model = load_into(ctx, a.m.path);
    const Norm p = norm_arg(a.m.p);
    auto& os = ctx.text;
    Json& payload = ctx.report["payload"];

    std::optional<ContractionCertificate> cert;
    std::string uncertifiable_reason;
    try {
        cert = certify(model, p);
    } catch (const Uncertifiable& err) {
        uncertifiable_reason = err.what();
    }

    if (a.samples > 0) {
        const auto estimate = estimate_kappa_sampled(model, p, a.samples, ctx.globals.seed);
        payload["sampled_estimate"] = certificate_json(estimate);
        os << "sampled kappa estimate: " << format_double(estimate.kappa) << " over " << a.samples
           << " pairs (lower estimate, not a certificate)\n";
    }

    if (cert) {
        ctx.report["certificate"] = certificate_json(*cert);
        os << "kappa: " << format_double(cert->kappa) << '\n'
           << "method: " << to_string(cert->method) << '\n'
           << "p: " << to_string(p) << '\n';
        if (cert->frobenius_bound) os << "frobenius bound: " << format_double(*cert->frobenius_bound) << '\n';
        const bool simple = cert->supports_simplicity();
        payload["verdict"] = simple ? "yes" : "no";
        os << "simple: " << (simple ? "yes" : "no") << '\n';
        return {simple ? kOk : kCertificationFailure};
    }

    os << "not certifiable: " << uncertifiable_reason << '\n';
    payload["reason"] = uncertifiable_reason;
    if (a.assert_kappa) {
        const auto asserted = user_asserted(*a.assert_kappa, p);
        ctx.report["certificate"] = certificate_json(asserted);
        const bool simple = asserted.supports_simplicity();
        payload["verdict"] = simple ? "yes" : "no";
        os << "kappa: " << format_double(asserted.kappa) << " (user-asserted)\n"
           << "simple: " << (simple ? "yes" : "no") << " (user-asserted)\n";
        return {simple ? kOk : kCertificationFailure};
    }
    ctx.report["certificate"] = nullptr;
    payload["verdict"] = "unknown";
    os << "simple: unknown\n";
    if (a.samples == 0) os << "hint: rerun with --samples N for a sampled estimate, or --assert-kappa K\n";
    return {kCertificationFailure};
}

struct SolveArgs {
    ModelArgs m;
    std::string noise;
    bool zero_noise = false;
};

Outcome cmd_solve(Context& ctx, const SolveArgs& a) {
    const ScmModel model = load_into(ctx, a.m.path);
    const Norm p = norm_arg(a.m.p);
    if (a.noise.empty() == !a.zero_noise) throw UsageError("give exactly one of --noise and --zero-noise");
    const Vector e = a.zero_noise ? Vector(model.size(), 0.0) : parse_list(a.noise, "--noise");
    if (e.size() != model.size())
        throw UsageError("--noise has " + std::to_string(e.size()) + " values for " + std::to_string(model.size()) +
                         " variables");

    SolveOptions opts = solve_options(ctx.globals, p);
    const auto cert = try_certify(model, p);
    ctx.report["certificate"] = cert ? certificate_json(*cert) : Json(nullptr);
    if (cert && cert->supports_simplicity()) opts.kappa = cert->kappa;

    Json& payload = ctx.report["payload"];
    payload["noise"] = vector_json(e);
    auto& os = ctx.text;
    try {
        const SolveReport rep = picard_solve(model, e, {}, opts);
        payload["x_star"] = named_json(model.endogenous_names, rep.x_star);
        payload["iterations"] = rep.iterations;
        payload["residual"] = rep.residual;
        payload["converged"] = rep.converged;
        os << "x*: " << named_text(model.endogenous_names, rep.x_star) << '\n'
           << "iterations: " << rep.iterations << '\n'
           << "residual: " << format_double(rep.residual) << '\n';
        return {kOk};
    } catch (const Diverged& err) {
        payload["iterations"] = err.report().iterations;
        payload["converged"] = false;
        payload["error"] = err.what();
        os << "diverged: " << err.what() << '\n';
        return {kDivergence};
    } catch (const MaxIterExceeded& err) {
        payload["iterations"] = err.report().iterations;
        payload["residual"] = err.report().residual;
        payload["converged"] = false;
        payload["error"] = err.what();
        os << "not converged: " << err.what() << '\n';
        return {kDivergence};
    }
}

struct SampleArgs {
    ModelArgs m;
    std::size_t n = 1000;
    std::string out;
};

void moments_payload(Json& payload, Context& ctx, const SampleMatrix& samples) {
    const Vector mean = samples.column_means();
    payload["n"] = samples.rows();
    payload["mean"] = named_json(samples.columns(), mean);
    auto& os = ctx.text;
    os << "n: " << samples.rows() << '\n' << "mean: " << named_text(samples.columns(), mean) << '\n';
    if (samples.rows() > 1) {
        const Matrix cov = samples.covariance();
        payload["covariance"] = matrix_json(cov);
        os << "covariance:\n";
        print_matrix(os, samples.columns(), cov);
    }
}

Outcome cmd_sample(Context& ctx, const SampleArgs& a) {
    const ScmModel model = load_into(ctx, a.m.path);
    const Norm p = norm_arg(a.m.p);
    if (a.n == 0) throw UsageError("--n must be positive");
    const auto cert = try_certify(model, p);
    ctx.report["certificate"] = cert ? certificate_json(*cert) : Json(nullptr);
    SolveOptions opts = solve_options(ctx.globals, p);
    if (cert && cert->supports_simplicity()) opts.kappa = cert->kappa;

    Json& payload = ctx.report["payload"];
    SampleMatrix samples;
    try {
        samples = sample_observational(model, a.n, ctx.globals.seed, opts);
    } catch (const SamplingError& err) {
        payload["failed_row"] = err.row();
        payload["error"] = err.what();
        ctx.text << "sampling failed: " << err.what() << '\n';
        return {kDivergence};
    }
    if (!a.out.empty()) {
        std::ofstream file(a.out, std::ios::binary | std::ios::trunc);
        if (!file) throw Error("cannot write '" + a.out + "'");
        write_csv(samples, file);
        payload["csv"] = a.out;
        ctx.text << "wrote " << a.out << '\n';
    }
    moments_payload(payload, ctx, samples);
    return {kOk};
}

struct InterveneArgs {
    ModelArgs m;
    std::string out;
    std::vector<std::string> ss;
    std::vector<std::string> dos;
    const CLI::App* command = nullptr;
    const CLI::Option* ss_opt = nullptr;
    const CLI::Option* do_opt = nullptr;
};

std::vector<Intervention> stages_of(const InterveneArgs& a, const ScmModel& model) {
    return intervention_stages(*a.command, a.ss_opt, a.do_opt, a.ss, a.dos, model);
}

Outcome cmd_intervene(Context& ctx, const InterveneArgs& a) {
    const ScmModel model = load_into(ctx, a.m.path);
    const Norm p = norm_arg(a.m.p);
    const auto stages = stages_of(a, model);
    const ScmModel result = apply_shift_scale(model, compose_or_identity(stages));
    const auto cert = try_certify(model, p);
    ctx.report["certificate"] = cert ? certificate_json(*cert) : Json(nullptr);
    report_composition(ctx, model, stages, p);
    ctx.report["payload"]["intervened_digest"] = model_digest(result);
    ctx.report["payload"]["model"] = Json::parse(serialize_model(result));
    if (!a.out.empty()) {
        save_model(result, a.out);
        ctx.report["payload"]["out"] = a.out;
        ctx.text << "wrote " << a.out << '\n';
    } else {
        ctx.text << serialize_model(result);
    }
    return {kOk};
}

Outcome cmd_compose(Context& ctx, const InterveneArgs& a) {
    const ScmModel model = load_into(ctx, a.m.path);
    const Norm p = norm_arg(a.m.p);
    const auto stages = stages_of(a, model);
    if (stages.empty()) throw UsageError("compose needs at least one --ss or --do");
    const auto cert = try_certify(model, p);
    ctx.report["certificate"] = cert ? certificate_json(*cert) : Json(nullptr);
    ctx.report["payload"]["stages"] = stages.size();
    report_composition(ctx, model, stages, p);
    return {kOk};
}

struct CounterfactualArgs {
    InterveneArgs iv;
    std::string obs;
    std::size_t samples = 0;
};

Outcome cmd_counterfactual(Context& ctx, const CounterfactualArgs& a) {
    const ScmModel model = load_into(ctx, a.iv.m.path);
    const Norm p = norm_arg(a.iv.m.p);
    const Intervention iv = compose_or_identity(stages_of(a.iv, model));
    const auto cert = try_certify(model, p);
    ctx.report["certificate"] = cert ? certificate_json(*cert) : Json(nullptr);
    Json& payload = ctx.report["payload"];
    auto& os = ctx.text;
    const auto& names = model.endogenous_names;

    if (a.samples > 0) {
        SolveOptions opts = solve_options(ctx.globals, p);
        if (cert && cert->supports_simplicity()) opts.kappa = cert->kappa;
        const TwinModel twin = intervene_twin(build_twin(model), Intervention{}, iv);
        SampleMatrix samples;
        try {
            samples = counterfactual_sample(twin, a.samples, ctx.globals.seed, opts);
        } catch (const SamplingError& err) {
            payload["failed_row"] = err.row();
            payload["error"] = err.what();
            os << "sampling failed: " << err.what() << '\n';
            return {kDivergence};
        }
        payload["mode"] = "sample";
        moments_payload(payload, ctx, samples);
        return {kOk};
    }

    if (a.obs.empty()) throw UsageError("exact mode needs --obs (or use --samples N)");
    const Vector x_obs = parse_list(a.obs, "--obs");
    if (x_obs.size() != model.size())
        throw UsageError("--obs has " + std::to_string(x_obs.size()) + " values for " + std::to_string(model.size()) +
                         " variables");
    payload["mode"] = "exact";
    try {
        const Vector e = abduct_noise_linear(model, x_obs);
        const CounterfactualMap map = counterfactual_map_linear(model, iv);
        const Vector cf = map.apply(x_obs);
        payload["observation"] = named_json(names, x_obs);
        payload["abducted_noise"] = vector_json(e);
        payload["counterfactual"] = named_json(names, cf);
        payload["response_map"] = {{"matrix", matrix_json(map.matrix)}, {"offset", vector_json(map.offset)}};
        std::vector<std::string> noise_names;
        for (std::size_t i = 0; i < names.size(); ++i) noise_names.push_back(model.noise_name(i));
        os << "abducted noise: " << named_text(noise_names, e) << '\n'
           << "counterfactual: " << named_text(names, cf) << '\n'
           << "response map:\n";
        for (std::size_t i = 0; i < names.size(); ++i)
            os << "  " << affine_text(primed(names[i]), map.offset[i], map.matrix.row(i), names) << '\n';
        return {kOk};
    } catch (const NonLinearModel& err) {
        payload["error"] = err.what();
        os << "abduction failed: exact counterfactuals need an all-linear model (" << err.what()
           << "); use --samples N for the joint law\n";
        return {kAbductionFailure};
    } catch (const DegenerateNoise& err) {
        payload["error"] = err.what();
        os << "abduction failed: " << err.what() << '\n';
        return {kAbductionFailure};
    }
}

struct TailArgs {
    InterveneArgs iv;
    std::string h = "mean";
    std::string t_grid = "0.2,0.4,0.6,0.8";
    std::size_t n = 100'000;
    bool allow_kappa_max = false;
    std::optional<double> assert_kappa;
    std::string csv;
    bool two_sided = false;
};

LipschitzFunctional parse_functional(const std::string& text, const ScmModel& model) {
    if (text == "mean") return LipschitzFunctional::scaled_mean();
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw UsageError("--h must be proj:NAME, diff:NAME or mean");
    const std::string kind = text.substr(0, colon);
    std::string name = text.substr(colon + 1);
    const std::size_t n = model.size();
    if (kind == "proj") {
        const bool is_primed = !name.empty() && name.back() == '\'';
        if (is_primed) name.pop_back();
        const std::size_t j = variable_index(model, name);
        return LipschitzFunctional::projection(is_primed ? n + j : j);
    }
    if (kind == "diff") return LipschitzFunctional::scaled_difference(variable_index(model, name));
    throw UsageError("--h must be proj:NAME, diff:NAME or mean");
}

Outcome cmd_tailcheck(Context& ctx, const TailArgs& a) {
    const ScmModel model = load_into(ctx, a.iv.m.path);
    const Norm p = norm_arg(a.iv.m.p);
    const Intervention iv = compose_or_identity(stages_of(a.iv, model));
    const std::vector<double> grid = parse_list(a.t_grid, "--t-grid");
    for (double t : grid)
        if (!(t > 0.0)) throw UsageError("--t-grid values must be positive, got " + format_double(t));
    if (a.n < 2) throw UsageError("--n must be at least 2");
    const LipschitzFunctional h = parse_functional(a.h, model);

    Json& payload = ctx.report["payload"];
    auto& os = ctx.text;

    std::optional<ContractionCertificate> cert;
    try {
        cert = certify(model, p);
    } catch (const Uncertifiable& err) {
        if (!a.assert_kappa) {
            ctx.report["certificate"] = nullptr;
            payload["error"] = err.what();
            os << "not certifiable: " << err.what() << "\nhint: pass --assert-kappa K to run with a user-asserted kappa\n";
            return {kCertificationFailure};
        }
    }
    if (a.assert_kappa && (!cert || !cert->supports_simplicity())) {
        cert = user_asserted(*a.assert_kappa, p);
        payload["user_asserted"] = true;
        os << "kappa: " << format_double(cert->kappa) << " (user-asserted)\n";
    }
    ctx.report["certificate"] = certificate_json(*cert);
    if (!cert->supports_simplicity()) {
        os << "kappa " << format_double(cert->kappa) << " is not below one; no tail guarantee\n";
        return {kCertificationFailure};
    }

    const InterventionKappa after = kappa_after_intervention(*cert, iv);
    if (after.scaled && !a.allow_kappa_max) {
        payload["a_max"] = after.a_max;
        os << "intervention scales a mechanism by |a| = " << format_double(after.a_max)
           << " > 1; pass --allow-kappa-max to use kappa_max = " << format_double(after.certificate.kappa) << '\n';
        return {kCertificationFailure};
    }
    if (!(after.certificate.kappa < 1.0)) {
        payload["kappa_max"] = after.certificate.kappa;
        os << "kappa_max = " << format_double(after.certificate.kappa) << " is not below one; no tail guarantee\n";
        return {kCertificationFailure};
    }

    const TwinModel twin = intervene_twin(build_twin(model), Intervention{}, iv);
    TailBoundSpec spec;
    spec.kappa = after.certificate.kappa;
    spec.sigma2 = noise_sigma2(StructuralSystem(model));
    spec.p = p;
    spec.d = model.size();

    const TailCheckReport rep = empirical_tail_check(twin, h, spec, grid, a.n, ctx.globals.seed, a.two_sided);
    const auto names = twin.names();

    payload["functional"] = h.describe(names);
    payload["kappa"] = spec.kappa;
    payload["sigma2"] = spec.sigma2;
    payload["proxy"] = rep.proxy;
    payload["n"] = rep.n;
    payload["sample_mean"] = rep.sample_mean;
    payload["two_sided"] = a.two_sided;
    Json rows = Json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"t", r.t}, {"empirical", r.empirical}, {"bound", r.bound}, {"slack", r.slack}, {"pass", r.pass}});
    payload["rows"] = std::move(rows);
    payload["pass"] = rep.pass;

    os << "h: " << h.describe(names) << '\n'
       << "kappa: " << format_double(spec.kappa) << "  sigma^2: " << format_double(spec.sigma2)
       << "  proxy: " << format_double(rep.proxy) << "  n: " << rep.n << '\n'
       << "t\tempirical\tbound\tpass\n";
    for (const auto& r : rep.rows)
        os << format_double(r.t) << '\t' << format_double(r.empirical) << '\t' << format_double(r.bound) << '\t'
           << (r.pass ? "yes" : "no") << '\n';
    os << "tail check: " << (rep.pass ? "pass" : "fail") << '\n';

    if (!a.csv.empty()) {
        std::ofstream file(a.csv, std::ios::binary | std::ios::trunc);
        if (!file) throw Error("cannot write '" + a.csv + "'");
        write_tail_csv(rep, file);
        payload["csv"] = a.csv;
    }
    return {rep.pass ? kOk : kTailCheckFailure};
}

// ---- wiring -----------------------------------------------------------------

void add_model_args(CLI::App* cmd, ModelArgs& m) {
    cmd->add_option("model", m.path, "model file (JSON)")->required();
    cmd->add_option("--p", m.p, "norm: 1, 2 or inf")->capture_default_str();
}

void add_intervention_args(CLI::App* cmd, InterveneArgs& a) {
    a.command = cmd;
    a.ss_opt = cmd->add_option("--ss", a.ss, "shift-scale NAME:a:b (repeatable, applied in order)")
                   ->allow_extra_args(false);
    a.do_opt = cmd->add_option("--do", a.dos, "hard intervention NAME:value (repeatable)")->allow_extra_args(false);
}

Json command_echo(const std::string& name, const std::vector<std::string>& args) {
    Json j;
    j["name"] = name;
    j["args"] = args;
    return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Counterfactual inference in cyclic structural causal models", "cyscm"};
    app.require_subcommand(1);
    app.fallthrough();

    Context ctx;
    Globals& g = ctx.globals;
    app.add_flag("--json", g.json, "emit the run report as one JSON object");
    app.add_option("--seed", g.seed, "random seed")->capture_default_str();
    app.add_option("--tol", g.tol, "solver tolerance")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--max-iter", g.max_iter, "solver iteration cap")->capture_default_str()->check(CLI::PositiveNumber);

    CertifyArgs certify_args;
    auto* certify_cmd = app.add_subcommand("certify", "certify global contraction and report simplicity");
    add_model_args(certify_cmd, certify_args.m);
    certify_cmd->add_option("--samples", certify_args.samples, "also estimate kappa from N sampled pairs");
    certify_cmd->add_option("--assert-kappa", certify_args.assert_kappa, "user-asserted kappa for uncertifiable models");

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "solve x = f(x, e) by fixed-point iteration");
    add_model_args(solve_cmd, solve_args.m);
    auto* noise_opt = solve_cmd->add_option("--noise", solve_args.noise, "noise values v1,v2,...");
    solve_cmd->add_flag("--zero-noise", solve_args.zero_noise, "solve at e = 0")->excludes(noise_opt);

    SampleArgs sample_args;
    auto* sample_cmd = app.add_subcommand("sample", "draw observational samples");
    add_model_args(sample_cmd, sample_args.m);
    sample_cmd->add_option("--n", sample_args.n, "number of samples")->capture_default_str();
    sample_cmd->add_option("--out", sample_args.out, "CSV output path");

    InterveneArgs intervene_args;
    auto* intervene_cmd = app.add_subcommand("intervene", "apply composed interventions and write the model");
    add_model_args(intervene_cmd, intervene_args.m);
    add_intervention_args(intervene_cmd, intervene_args);
    intervene_cmd->add_option("--out", intervene_args.out, "output model path");

    InterveneArgs compose_args;
    auto* compose_cmd = app.add_subcommand("compose", "fold a sequence of interventions into one");
    add_model_args(compose_cmd, compose_args.m);
    add_intervention_args(compose_cmd, compose_args);

    CounterfactualArgs cf_args;
    auto* cf_cmd = app.add_subcommand("counterfactual", "counterfactual query by abduction, action and prediction");
    add_model_args(cf_cmd, cf_args.iv.m);
    add_intervention_args(cf_cmd, cf_args.iv);
    cf_cmd->add_option("--obs", cf_args.obs, "observed values v1,v2,...");
    cf_cmd->add_option("--samples", cf_args.samples, "Monte Carlo joint law of (X, X') with N draws");

    TailArgs tail_args;
    auto* tail_cmd = app.add_subcommand("tailcheck", "compare counterfactual tails with the sub-Gaussian bound");
    tail_cmd->set_help_flag("--help", "print this help message and exit");
    add_model_args(tail_cmd, tail_args.iv.m);
    add_intervention_args(tail_cmd, tail_args.iv);
    tail_cmd->add_option("--h", tail_args.h, "functional: proj:NAME, diff:NAME or mean")->capture_default_str();
    tail_cmd->add_option("--t-grid", tail_args.t_grid, "comma-separated positive thresholds")->capture_default_str();
    tail_cmd->add_option("--n", tail_args.n, "number of samples")->capture_default_str();
    tail_cmd->add_flag("--allow-kappa-max", tail_args.allow_kappa_max, "accept |a| > 1 using kappa_max");
    tail_cmd->add_option("--assert-kappa", tail_args.assert_kappa, "user-asserted kappa for uncertifiable models");
    tail_cmd->add_option("--csv", tail_args.csv, "write t,empirical,bound rows");
    tail_cmd->add_flag("--two-sided", tail_args.two_sided, "check both tails");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    CLI::App* chosen = app.get_subcommands().front();
    ctx.report["command"] = command_echo(chosen->get_name(), args);
    ctx.report["model_digest"] = nullptr;
    ctx.report["seed"] = g.seed;
    ctx.report["certificate"] = nullptr;
    ctx.report["payload"] = Json::object();

    const auto start = std::chrono::steady_clock::now();
    int code = kOk;
    try {
        Outcome outcome;
        if (chosen == certify_cmd) outcome = cmd_certify(ctx, certify_args);
        else if (chosen == solve_cmd) outcome = cmd_solve(ctx, solve_args);
        else if (chosen == sample_cmd) outcome = cmd_sample(ctx, sample_args);
        else if (chosen == intervene_cmd) outcome = cmd_intervene(ctx, intervene_args);
        else if (chosen == compose_cmd) outcome = cmd_compose(ctx, compose_args);
        else if (chosen == cf_cmd) outcome = cmd_counterfactual(ctx, cf_args);
        else outcome = cmd_tailcheck(ctx, tail_args);
        code = outcome.code;
    } catch (const Diverged& e) {
        code = kDivergence;
        ctx.report["error"] = e.what();
    } catch (const MaxIterExceeded& e) {
        code = kDivergence;
        ctx.report["error"] = e.what();
    } catch (const SamplingError& e) {
        code = kDivergence;
        ctx.report["error"] = e.what();
    } catch (const SingularSystem& e) {
        code = kDivergence;
        ctx.report["error"] = e.what();
    } catch (const KappaNotContractive& e) {
        code = kCertificationFailure;
        ctx.report["error"] = e.what();
    } catch (const std::exception& e) {
        code = kInputError;
        ctx.report["error"] = e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ctx.report["timing"] = {{"seconds", seconds}};
    ctx.report["exit_code"] = code;

    if (ctx.report.contains("error")) err << "error: " << ctx.report["error"].get<std::string>() << '\n';
    if (g.json) out << ctx.report.dump() << '\n';
    else out << ctx.text.str();
    return code;
}

}  // namespace cyscm::cli
