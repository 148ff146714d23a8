#include "cyscm/interventions.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "cyscm/errors.hpp"

namespace cyscm {

Intervention::Intervention(std::vector<ShiftScale> targets) {
    for (const auto& t : targets) add(t);
}

Intervention Intervention::shift_scale(std::size_t index, double scale, double shift) {
    return Intervention({ShiftScale{index, scale, shift}});
}

Intervention Intervention::hard(std::size_t index, double value) { return shift_scale(index, 0.0, value); }

void Intervention::add(ShiftScale target) {
    if (find(target.index))
        throw InvalidIntervention("coordinate " + std::to_string(target.index) + " targeted twice in one intervention");
    targets_.push_back(target);
}

const ShiftScale* Intervention::find(std::size_t index) const {
    auto it = std::find_if(targets_.begin(), targets_.end(), [&](const ShiftScale& t) { return t.index == index; });
    return it == targets_.end() ? nullptr : &*it;
}

double Intervention::a_max() const {
    double m = 0.0;
    for (const auto& t : targets_) m = std::max(m, std::abs(t.scale));
    return m;
}

void Intervention::check_range(std::size_t n) const {
    for (const auto& t : targets_)
        if (t.index >= n)
            throw InvalidIntervention("intervention target " + std::to_string(t.index) + " out of range for " +
                                      std::to_string(n) + " variables");
}

namespace {

Mechanism scaled(const Mechanism& mech, double a, double b) {
    if (const auto* row = std::get_if<LinearRow>(&mech)) {
        LinearRow out = *row;
        for (double& c : out.coefficients) c *= a;
        out.noise_coefficient *= a;
        out.offset = a * out.offset + b;
        return out;
    }
    const ExprPtr& root = std::get<ExprMechanism>(mech).root;
    if (a == 0.0) return ExprMechanism{make_constant(b)};
    if (a == 1.0 && b == 0.0) return mech;
    ExprPtr body = a == 1.0 ? root : make_binary(BinaryOp::Mul, make_constant(a), root);
    if (b == 0.0) return ExprMechanism{body};
    return ExprMechanism{make_binary(BinaryOp::Add, std::move(body), make_constant(b))};
}

}  // namespace

ScmModel apply_shift_scale(const ScmModel& model, const Intervention& iv) {
    iv.check_range(model.size());
    ScmModel out = model;
    for (const auto& t : iv.targets()) out.mechanisms.at(t.index) = scaled(model.mechanisms.at(t.index), t.scale, t.shift);
    return out;
}

ScmModel do_intervention(const ScmModel& model, std::size_t index, double value) {
    return apply_shift_scale(model, Intervention::hard(index, value));
}

Intervention compose(std::span<const Intervention> stages) {
    if (stages.empty()) throw std::invalid_argument("compose needs at least one intervention");
    std::vector<std::size_t> order;
    std::map<std::size_t, std::pair<double, double>> folded;
    for (const auto& stage : stages) {
        for (const auto& t : stage.targets()) {
            auto [it, inserted] = folded.try_emplace(t.index, 1.0, 0.0);
            if (inserted) order.push_back(t.index);
            auto& [a, b] = it->second;
            a = t.scale * a;
            b = t.scale * b + t.shift;
        }
    }
    Intervention out;
    for (std::size_t j : order) out.add({j, folded[j].first, folded[j].second});
    return out;
}

CompositionReport check_composition_bound(std::span<const Intervention> stages) {
    CompositionReport report;
    if (stages.empty()) return report;
    const Intervention composed = compose(stages);
    for (const auto& t : composed.targets()) {
        double max_stage = 0.0;
        for (const auto& stage : stages)
            if (const auto* s = stage.find(t.index)) max_stage = std::max(max_stage, std::abs(s->scale));
        report.coordinates.push_back({t.index, t.scale, t.shift, max_stage});
        if (max_stage > 1.0) report.guarantee_applies = false;
    }
    report.needs_kappa_max = !report.guarantee_applies;
    return report;
}

}  // namespace cyscm
