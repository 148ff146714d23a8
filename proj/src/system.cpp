#include "cyscm/system.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cyscm/errors.hpp"

namespace cyscm {

StructuralSystem::StructuralSystem(const ScmModel& model)
    : names_(model.endogenous_names), noise_(model.noise), block_(model.size()), noise_dim_(model.size()) {
    if (model.mechanisms.size() != model.size()) throw SchemaError("mechanisms", "mechanism count mismatch");
    for (std::size_t i = 0; i < model.size(); ++i) equations_.push_back({model.mechanisms[i], 0, i});
}

StructuralSystem StructuralSystem::stacked(std::span<const ScmModel* const> copies, std::vector<std::string> names) {
    if (copies.empty()) throw std::invalid_argument("stacked system needs at least one copy");
    StructuralSystem sys;
    sys.block_ = copies.front()->size();
    sys.noise_dim_ = sys.block_;
    sys.noise_ = copies.front()->noise;
    for (std::size_t c = 0; c < copies.size(); ++c) {
        const ScmModel& m = *copies[c];
        if (m.size() != sys.block_ || m.mechanisms.size() != sys.block_)
            throw std::invalid_argument("stacked copies must have the same variables");
        for (std::size_t i = 0; i < sys.block_; ++i) sys.equations_.push_back({m.mechanisms[i], c * sys.block_, i});
    }
    if (names.size() != sys.equations_.size()) throw std::invalid_argument("stacked system: wrong number of names");
    sys.names_ = std::move(names);
    return sys;
}

double StructuralSystem::evaluate(std::size_t i, std::span<const double> x, std::span<const double> e) const {
    const Equation& eq = equations_[i];
    return evaluate_mechanism(eq.mechanism, eq.local_index, x.subspan(eq.block_offset, block_), e);
}

void StructuralSystem::evaluate(std::span<const double> x, std::span<const double> e, std::span<double> out) const {
    if (x.size() != dim() || e.size() != noise_dim() || out.size() != dim())
        throw std::invalid_argument("StructuralSystem::evaluate: dimension mismatch");
    for (std::size_t i = 0; i < equations_.size(); ++i) out[i] = evaluate(i, x, e);
}

Vector StructuralSystem::evaluate(std::span<const double> x, std::span<const double> e) const {
    Vector out(dim());
    evaluate(x, e, out);
    return out;
}

bool StructuralSystem::is_linear() const {
    return std::all_of(equations_.begin(), equations_.end(),
                       [](const Equation& eq) { return std::holds_alternative<LinearRow>(eq.mechanism); });
}

LinearForm StructuralSystem::linear_form() const {
    LinearForm form{Matrix(dim(), dim()), Vector(dim(), 0.0), Matrix(dim(), noise_dim())};
    for (std::size_t i = 0; i < equations_.size(); ++i) {
        const Equation& eq = equations_[i];
        const auto* row = std::get_if<LinearRow>(&eq.mechanism);
        if (!row) throw NonLinearModel("mechanism for '" + names_[i] + "' is not linear");
        for (std::size_t k = 0; k < block_; ++k) form.coefficients(i, eq.block_offset + k) = row->coefficients.at(k);
        form.offsets[i] = row->offset;
        form.noise_gains(i, eq.local_index) = row->noise_coefficient;
    }
    return form;
}

std::vector<double> StructuralSystem::derivative_bound_row(std::size_t i) const {
    const Equation& eq = equations_[i];
    std::vector<double> local;
    if (const auto* row = std::get_if<LinearRow>(&eq.mechanism)) {
        for (double c : row->coefficients) local.push_back(std::abs(c));
    } else {
        const auto& ex = std::get<ExprMechanism>(eq.mechanism);
        local = derivative_bounds(*ex.root, block_);
    }
    std::vector<double> full(dim(), 0.0);
    for (std::size_t k = 0; k < block_; ++k) full[eq.block_offset + k] = local[k];
    return full;
}

}  // namespace cyscm
