#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "cyscm/expr.hpp"
#include "cyscm/linalg.hpp"

namespace cyscm {

// x_i = sum_k coefficients[k] x_k + offset + noise_coefficient * e_i
struct LinearRow {
    std::vector<double> coefficients;
    double offset = 0.0;
    double noise_coefficient = 1.0;

    friend bool operator==(const LinearRow&, const LinearRow&) = default;
};

// x_i = root(x, e)
struct ExprMechanism {
    ExprPtr root;

    friend bool operator==(const ExprMechanism& a, const ExprMechanism& b) {
        if (!a.root || !b.root) return a.root == b.root;
        return structurally_equal(*a.root, *b.root);
    }
};

using Mechanism = std::variant<LinearRow, ExprMechanism>;

// Independent Gaussian exogenous terms, one per endogenous variable.
struct NoiseSpec {
    std::vector<double> means;
    std::vector<double> variances;

    // Tightest sigma^2 with diag(variances) <= sigma^2 I.
    double sigma_proxy() const;

    friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

// Structural causal model over the real line with one exogenous term per
// endogenous variable. Plain data: construct freely, check with validate_model.
struct ScmModel {
    std::vector<std::string> endogenous_names;
    std::vector<Mechanism> mechanisms;
    NoiseSpec noise;

    std::size_t size() const noexcept { return endogenous_names.size(); }
    std::string noise_name(std::size_t i) const { return "e_" + endogenous_names.at(i); }
    std::optional<std::size_t> index_of(std::string_view name) const;

    friend bool operator==(const ScmModel&, const ScmModel&) = default;
};

struct Violation {
    std::string code;     // e.g. "mechanism count mismatch", "unresolved symbol"
    std::string message;  // human readable detail
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_model(const ScmModel& model);

// Throws SchemaError listing the first violation when the model is invalid.
void require_valid(const ScmModel& model);

struct Parents {
    std::vector<std::size_t> endogenous;  // sorted
    std::vector<std::size_t> exogenous;   // sorted

    friend bool operator==(const Parents&, const Parents&) = default;
};

// One entry per endogenous coordinate.
using ParentSet = std::vector<Parents>;

ParentSet syntactic_parents(const ScmModel& model);

bool is_linear(const ScmModel& model);

// Value of mechanism i at state x and noise e (both of length n).
double evaluate_mechanism(const Mechanism& mech, std::size_t own_index, std::span<const double> x,
                          std::span<const double> e);

// f(x, e) for the whole model.
Vector evaluate(const ScmModel& model, std::span<const double> x, std::span<const double> e);

// Matrix form x = A x + b + D e of an all-linear model; D is diagonal.
struct LinearParts {
    Matrix coefficients;  // A
    Vector offsets;       // b
    Vector noise_gains;   // diagonal of D
};

// Throws NonLinearModel if any mechanism is an expression.
LinearParts linear_parts(const ScmModel& model);

// Builds an all-linear model from matrix parts (names default to x1..xn).
ScmModel make_linear_model(const Matrix& a, std::span<const double> b, std::span<const double> noise_gains,
                           std::span<const double> noise_means, std::span<const double> noise_variances,
                           std::vector<std::string> names = {});

}  // namespace cyscm
