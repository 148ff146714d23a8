#include "cyscm/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "cyscm/errors.hpp"
#include "cyscm/rng.hpp"
#include "cyscm/solver.hpp"

namespace cyscm {

double TailBoundSpec::correction() const {
    // ||I||_{2->p}: 1 for p >= 2, d^(1/p - 1/2) below
    if (p == Norm::L1) return std::pow(static_cast<double>(d), 0.5);
    return 1.0;
}

double TailBoundSpec::proxy() const {
    const double c = correction();
    return sigma2 * c * c / ((1.0 - kappa) * (1.0 - kappa));
}

void TailBoundSpec::validate() const {
    if (!(kappa >= 0.0 && kappa < 1.0)) throw InvalidSpec("tail bound needs 0 <= kappa < 1");
    if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw InvalidSpec("tail bound needs sigma^2 > 0");
    if (d < 1) throw InvalidSpec("tail bound needs a positive exogenous dimension");
}

double tail_bound(const TailBoundSpec& spec, double t) {
    spec.validate();
    if (!(t > 0.0)) throw std::invalid_argument("tail bound needs t > 0");
    return std::exp(-t * t / (2.0 * spec.proxy()));
}

double lipschitz_constant_solution_map(double kappa) {
    if (!(kappa >= 0.0 && kappa < 1.0)) throw KappaNotContractive("solution map is Lipschitz only for 0 <= kappa < 1");
    return 1.0 / (1.0 - kappa);
}

double LipschitzFunctional::operator()(std::span<const double> stacked) const {
    switch (kind_) {
    case Kind::Projection: return stacked[index_];
    case Kind::ScaledDifference: {
        const std::size_t n = stacked.size() / 2;
        return (stacked[index_] - stacked[n + index_]) / std::sqrt(2.0);
    }
    case Kind::ScaledMean: {
        double s = 0.0;
        for (double v : stacked) s += v;
        return s / std::sqrt(static_cast<double>(stacked.size()));
    }
    }
    return 0.0;
}

std::string LipschitzFunctional::describe(std::span<const std::string> stacked_names) const {
    switch (kind_) {
    case Kind::Projection: return "proj:" + stacked_names[index_];
    case Kind::ScaledDifference: return "diff:" + stacked_names[index_];
    case Kind::ScaledMean: return "mean";
    }
    return "?";
}

double noise_sigma2(const StructuralSystem& system) {
    const NoiseSpec& noise = system.noise();
    const double max_var = noise.sigma_proxy();
    if (!system.is_linear()) return max_var;
    const LinearForm form = system.linear_form();
    double best = 0.0;
    for (std::size_t i = 0; i < form.noise_gains.rows(); ++i)
        for (std::size_t j = 0; j < form.noise_gains.cols(); ++j) {
            const double g = form.noise_gains(i, j);
            best = std::max(best, g * g * noise.variances[j]);
        }
    return best;
}

NoiseLipschitzCheck verify_noise_lipschitz_linear(const ScmModel& model) {
    const LinearParts parts = linear_parts(model);
    NoiseLipschitzCheck out;
    for (std::size_t i = 0; i < parts.noise_gains.size(); ++i) {
        const double g = std::abs(parts.noise_gains[i]);
        out.max_gain = std::max(out.max_gain, g);
        if (g > 1.0 && !out.offending) {
            out.offending = i;
            out.pass = false;
        }
    }
    return out;
}

TailCheckReport tail_check_samples(const SampleMatrix& samples, const LipschitzFunctional& h, const TailBoundSpec& spec,
                                   std::span<const double> t_grid, bool two_sided) {
    spec.validate();
    for (double t : t_grid)
        if (!(t > 0.0)) throw std::invalid_argument("tail check grid values must be positive");

    TailCheckReport report;
    report.n = samples.rows();
    report.proxy = spec.proxy();
    if (report.n == 0) throw std::invalid_argument("tail check needs at least one sample");

    std::vector<double> values(report.n);
    double sum = 0.0;
    for (std::size_t r = 0; r < report.n; ++r) {
        values[r] = h(samples.row(r));
        sum += values[r];
    }
    report.sample_mean = sum / static_cast<double>(report.n);

    const double count = static_cast<double>(report.n);
    report.pass = true;
    for (double t : t_grid) {
        std::size_t upper = 0;
        std::size_t lower = 0;
        for (double v : values) {
            const double dev = v - report.sample_mean;
            if (dev >= t) ++upper;
            if (-dev >= t) ++lower;
        }
        const std::size_t hits = two_sided ? std::max(upper, lower) : upper;
        TailRow row;
        row.t = t;
        row.empirical = static_cast<double>(hits) / count;
        row.bound = tail_bound(spec, t);
        row.slack = 3.0 * std::sqrt(row.empirical * (1.0 - row.empirical) / count);
        row.pass = row.empirical <= row.bound + row.slack;
        report.pass = report.pass && row.pass;
        report.rows.push_back(row);
    }
    return report;
}

TailCheckReport empirical_tail_check(const TwinModel& twin, const LipschitzFunctional& h, const TailBoundSpec& spec,
                                     std::span<const double> t_grid, std::size_t n, std::uint64_t seed,
                                     bool two_sided) {
    spec.validate();
    const SampleMatrix samples = counterfactual_sample(twin, n, seed);
    return tail_check_samples(samples, h, spec, t_grid, two_sided);
}

void write_tail_csv(const TailCheckReport& report, std::ostream& out) {
    out << "t,empirical,bound\n";
    for (const auto& row : report.rows)
        out << format_double(row.t) << ',' << format_double(row.empirical) << ',' << format_double(row.bound) << '\n';
}

SolutionMapLipschitzReport check_solution_map_lipschitz(const StructuralSystem& system, double kappa,
                                                        std::size_t n_pairs, std::uint64_t seed) {
    SolutionMapLipschitzReport report;
    report.bound = lipschitz_constant_solution_map(kappa);
    SolveOptions options;
    options.kappa = kappa;
    options.tol = 1e-12;
    const SolutionMap phi(system, options);
    const std::size_t d = system.noise_dim();
    Vector e1(d), e2(d), de(d), dx(system.dim());
    report.pass = true;
    for (std::size_t k = 0; k < n_pairs; ++k) {
        NormalStream rng(seed, k);
        for (std::size_t j = 0; j < d; ++j) {
            e1[j] = rng.normal();
            e2[j] = rng.normal();
            de[j] = e1[j] - e2[j];
        }
        const Vector x1 = phi(e1);
        const Vector x2 = phi(e2);
        for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = x1[i] - x2[i];
        const double num = vector_norm(dx, Norm::L2);
        const double den = vector_norm(de, Norm::L2);
        if (den == 0.0) continue;
        report.max_ratio = std::max(report.max_ratio, num / den);
        const double slack = 1e-9 * std::max(1.0, vector_norm(x1, Norm::L2) + vector_norm(x2, Norm::L2));
        if (num > report.bound * den + slack) report.pass = false;
        ++report.pairs;
    }
    return report;
}

}  // namespace cyscm
