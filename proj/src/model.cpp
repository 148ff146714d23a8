#include "cyscm/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cyscm/errors.hpp"

namespace cyscm {

double NoiseSpec::sigma_proxy() const {
    double m = 0.0;
    for (double v : variances) m = std::max(m, v);
    return m;
}

std::optional<std::size_t> ScmModel::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < endogenous_names.size(); ++i)
        if (endogenous_names[i] == name) return i;
    return std::nullopt;
}

ValidationReport validate_model(const ScmModel& model) {
    ValidationReport report;
    auto flag = [&](std::string code, std::string message) { report.push_back({std::move(code), std::move(message)}); };

    const std::size_t n = model.size();
    std::set<std::string> seen;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string& name = model.endogenous_names[i];
        if (name.empty()) flag("empty name", "variable " + std::to_string(i) + " has an empty name");
        if (!seen.insert(name).second) flag("duplicate name", "variable name '" + name + "' declared twice");
    }
    for (const auto& name : model.endogenous_names)
        if (seen.count("e_" + name))
            flag("ambiguous name", "variable 'e_" + name + "' collides with the noise symbol of '" + name + "'");

    if (model.mechanisms.size() != n)
        flag("mechanism count mismatch", std::to_string(model.mechanisms.size()) + " mechanisms for " +
                                             std::to_string(n) + " variables");

    if (model.noise.means.size() != n || model.noise.variances.size() != n)
        flag("noise dimension mismatch", "noise means/variances must have one entry per variable");
    for (std::size_t j = 0; j < model.noise.variances.size(); ++j) {
        const double v = model.noise.variances[j];
        if (!std::isfinite(v)) flag("non-finite value", "noise variance " + std::to_string(j) + " is not finite");
        else if (v < 0.0) flag("negative variance", "noise variance " + std::to_string(j) + " is negative");
    }
    for (std::size_t j = 0; j < model.noise.means.size(); ++j)
        if (!std::isfinite(model.noise.means[j]))
            flag("non-finite value", "noise mean " + std::to_string(j) + " is not finite");

    for (std::size_t i = 0; i < model.mechanisms.size(); ++i) {
        const std::string where = "mechanism " + std::to_string(i);
        if (const auto* row = std::get_if<LinearRow>(&model.mechanisms[i])) {
            if (row->coefficients.size() != n)
                flag("coefficient length mismatch", where + " has " + std::to_string(row->coefficients.size()) +
                                                        " coefficients, expected " + std::to_string(n));
            bool finite = std::isfinite(row->offset) && std::isfinite(row->noise_coefficient);
            for (double c : row->coefficients) finite = finite && std::isfinite(c);
            if (!finite) flag("non-finite value", where + " has a non-finite coefficient");
            continue;
        }
        const auto& ex = std::get<ExprMechanism>(model.mechanisms[i]);
        if (!ex.root) {
            flag("empty expression", where + " has no expression");
            continue;
        }
        for_each_reference(*ex.root, [&](const VarRef* v, const NoiseRef* e) {
            if (v && (v->index >= n || model.endogenous_names[v->index] != v->name))
                flag("unresolved symbol", where + " references undeclared symbol '" + v->name + "'");
            if (e && (e->index >= n || model.noise_name(e->index) != e->name))
                flag("unresolved symbol", where + " references undeclared symbol '" + e->name + "'");
        });
        bool finite = true;
        std::function<void(const ExprNode&)> scan = [&](const ExprNode& node) {
            if (const auto* c = std::get_if<Constant>(&node.node)) finite = finite && std::isfinite(c->value);
            else if (const auto* u = std::get_if<Unary>(&node.node)) scan(*u->child);
            else if (const auto* b = std::get_if<Binary>(&node.node)) {
                scan(*b->lhs);
                scan(*b->rhs);
            }
        };
        scan(*ex.root);
        if (!finite) flag("non-finite value", where + " contains a non-finite constant");
    }
    return report;
}

void require_valid(const ScmModel& model) {
    const auto report = validate_model(model);
    if (!report.empty()) throw SchemaError("model", report.front().code + ": " + report.front().message);
}

ParentSet syntactic_parents(const ScmModel& model) {
    ParentSet parents(model.mechanisms.size());
    for (std::size_t i = 0; i < model.mechanisms.size(); ++i) {
        if (const auto* row = std::get_if<LinearRow>(&model.mechanisms[i])) {
            for (std::size_t k = 0; k < row->coefficients.size(); ++k)
                if (row->coefficients[k] != 0.0) parents[i].endogenous.push_back(k);
            if (row->noise_coefficient != 0.0) parents[i].exogenous.push_back(i);
        } else {
            const auto refs = collect_references(*std::get<ExprMechanism>(model.mechanisms[i]).root);
            parents[i] = {refs.variables, refs.noises};
        }
    }
    return parents;
}

bool is_linear(const ScmModel& model) {
    return std::all_of(model.mechanisms.begin(), model.mechanisms.end(),
                       [](const Mechanism& m) { return std::holds_alternative<LinearRow>(m); });
}

double evaluate_mechanism(const Mechanism& mech, std::size_t own_index, std::span<const double> x,
                          std::span<const double> e) {
    if (const auto* row = std::get_if<LinearRow>(&mech)) {
        double s = row->offset;
        for (std::size_t k = 0; k < row->coefficients.size(); ++k) s += row->coefficients[k] * x[k];
        if (row->noise_coefficient != 0.0) s += row->noise_coefficient * e[own_index];
        return s;
    }
    return eval_expr(*std::get<ExprMechanism>(mech).root, x, e);
}

Vector evaluate(const ScmModel& model, std::span<const double> x, std::span<const double> e) {
    Vector out(model.mechanisms.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = evaluate_mechanism(model.mechanisms[i], i, x, e);
    return out;
}

LinearParts linear_parts(const ScmModel& model) {
    const std::size_t n = model.size();
    LinearParts parts{Matrix(n, n), Vector(n, 0.0), Vector(n, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const auto* row = std::get_if<LinearRow>(&model.mechanisms.at(i));
        if (!row) throw NonLinearModel("mechanism for '" + model.endogenous_names[i] + "' is not linear");
        for (std::size_t k = 0; k < n; ++k) parts.coefficients(i, k) = row->coefficients.at(k);
        parts.offsets[i] = row->offset;
        parts.noise_gains[i] = row->noise_coefficient;
    }
    return parts;
}

ScmModel make_linear_model(const Matrix& a, std::span<const double> b, std::span<const double> noise_gains,
                           std::span<const double> noise_means, std::span<const double> noise_variances,
                           std::vector<std::string> names) {
    const std::size_t n = a.rows();
    ScmModel model;
    if (names.empty())
        for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i + 1));
    model.endogenous_names = std::move(names);
    for (std::size_t i = 0; i < n; ++i) {
        LinearRow row;
        row.coefficients.assign(a.row(i).begin(), a.row(i).end());
        row.offset = b[i];
        row.noise_coefficient = noise_gains[i];
        model.mechanisms.emplace_back(std::move(row));
    }
    model.noise.means.assign(noise_means.begin(), noise_means.end());
    model.noise.variances.assign(noise_variances.begin(), noise_variances.end());
    return model;
}

}  // namespace cyscm
