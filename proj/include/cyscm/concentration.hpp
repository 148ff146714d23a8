#pragma once

// Sub-Gaussian tails of counterfactual functionals. With a kappa-contractive
// mechanism, noise entering 1-Lipschitz, and Gaussian noise with
// Sigma <= sigma^2 I, every 1-Lipschitz h of the twin solution satisfies
//
//   P(h - E h >= t) <= exp(-t^2 / (2 (1 - kappa)^-2 sigma^2 c_p^2)),
//
// where c_p = ||I||_{2->p} is 1 for p >= 2 and d^(1/p - 1/2) for p < 2.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cyscm/linalg.hpp"
#include "cyscm/model.hpp"
#include "cyscm/sample.hpp"
#include "cyscm/system.hpp"
#include "cyscm/twin.hpp"

namespace cyscm {

struct TailBoundSpec {
    double kappa = 0.0;
    double sigma2 = 0.0;
    Norm p = Norm::L2;
    std::size_t d = 1;  // exogenous dimension

    double correction() const;  // ||I||_{2->p}
    double proxy() const;       // (1 - kappa)^-2 sigma2 correction^2
    // Throws InvalidSpec unless 0 <= kappa < 1, sigma2 > 0 and d >= 1.
    void validate() const;
};

// Throws InvalidSpec for a bad spec and std::invalid_argument for t <= 0.
double tail_bound(const TailBoundSpec& spec, double t);

// 1 / (1 - kappa). Throws KappaNotContractive.
double lipschitz_constant_solution_map(double kappa);

// Built-in functionals on a stacked twin state (x, x') of length 2n, each
// 1-Lipschitz in l2.
class LipschitzFunctional {
public:
    enum class Kind { Projection, ScaledDifference, ScaledMean };

    static LipschitzFunctional projection(std::size_t stacked_index) { return {Kind::Projection, stacked_index}; }
    static LipschitzFunctional scaled_difference(std::size_t index) { return {Kind::ScaledDifference, index}; }
    static LipschitzFunctional scaled_mean() { return {Kind::ScaledMean, 0}; }

    Kind kind() const noexcept { return kind_; }
    std::size_t index() const noexcept { return index_; }

    double operator()(std::span<const double> stacked) const;
    std::string describe(std::span<const std::string> stacked_names) const;

private:
    LipschitzFunctional(Kind kind, std::size_t index) : kind_(kind), index_(index) {}

    Kind kind_;
    std::size_t index_;
};

// max over coordinates of gain^2 * var of the noise term it reads (gain 1
// assumed for expression mechanisms), so the effective covariance is below
// sigma^2 I.
double noise_sigma2(const StructuralSystem& system);

struct NoiseLipschitzCheck {
    bool pass = true;
    std::optional<std::size_t> offending;  // first coordinate with |gain| > 1
    double max_gain = 0.0;
};

// Noise enters coordinate-wise with the row gains, so the mechanism is
// 1-Lipschitz in e iff every |gain| <= 1. Throws NonLinearModel.
NoiseLipschitzCheck verify_noise_lipschitz_linear(const ScmModel& model);

struct TailRow {
    double t = 0.0;
    double empirical = 0.0;
    double bound = 0.0;
    double slack = 0.0;
    bool pass = false;
};

struct TailCheckReport {
    std::vector<TailRow> rows;
    double sample_mean = 0.0;
    std::size_t n = 0;
    double proxy = 0.0;
    bool pass = false;
};

// Compares exceedance frequencies of h - mean(h) (plus a 3 sqrt(p(1-p)/n)
// slack) with tail_bound at each t. With two_sided, -h is checked too and the
// larger frequency is reported.
TailCheckReport tail_check_samples(const SampleMatrix& samples, const LipschitzFunctional& h, const TailBoundSpec& spec,
                                   std::span<const double> t_grid, bool two_sided = false);

// Draws n counterfactual samples of the twin and runs tail_check_samples.
TailCheckReport empirical_tail_check(const TwinModel& twin, const LipschitzFunctional& h, const TailBoundSpec& spec,
                                     std::span<const double> t_grid, std::size_t n, std::uint64_t seed,
                                     bool two_sided = false);

void write_tail_csv(const TailCheckReport& report, std::ostream& out);

struct SolutionMapLipschitzReport {
    std::size_t pairs = 0;
    double max_ratio = 0.0;  // max ||Phi(e1) - Phi(e2)||_2 / ||e1 - e2||_2
    double bound = 0.0;      // 1 / (1 - kappa)
    bool pass = false;
};

// Checks ||Phi(e1) - Phi(e2)||_2 <= ||e1 - e2||_2 / (1 - kappa) on seeded
// standard-normal noise pairs, with a 1e-9 relative slack for rounding.
SolutionMapLipschitzReport check_solution_map_lipschitz(const StructuralSystem& system, double kappa,
                                                        std::size_t n_pairs, std::uint64_t seed);

}  // namespace cyscm
