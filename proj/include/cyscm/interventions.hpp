#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cyscm/model.hpp"

namespace cyscm {

// Replaces mechanism f_j by scale * f_j + shift.
struct ShiftScale {
    std::size_t index;
    double scale = 1.0;
    double shift = 0.0;

    friend bool operator==(const ShiftScale&, const ShiftScale&) = default;
};

class Intervention {
public:
    Intervention() = default;
    // Throws InvalidIntervention on a repeated coordinate.
    explicit Intervention(std::vector<ShiftScale> targets);

    static Intervention shift_scale(std::size_t index, double scale, double shift);
    static Intervention hard(std::size_t index, double value);

    // Throws InvalidIntervention if the coordinate is already targeted.
    void add(ShiftScale target);

    const std::vector<ShiftScale>& targets() const noexcept { return targets_; }
    bool empty() const noexcept { return targets_.empty(); }
    const ShiftScale* find(std::size_t index) const;

    // max |a_j| over targets; 0 for the empty intervention.
    double a_max() const;

    // Throws InvalidIntervention if any target is outside [0, n).
    void check_range(std::size_t n) const;

    friend bool operator==(const Intervention&, const Intervention&) = default;

private:
    std::vector<ShiftScale> targets_;
};

// New model with f_j <- a_j f_j + b_j on every target. Linear rows stay linear
// (coefficients and noise gain scale with a_j); expressions get wrapped, and a
// zero scale replaces the mechanism by the constant b_j.
ScmModel apply_shift_scale(const ScmModel& model, const Intervention& iv);

// do(x_j := value), i.e. scale 0 and shift value.
ScmModel do_intervention(const ScmModel& model, std::size_t index, double value);

// Single intervention equivalent to applying `stages` left to right. Per
// coordinate (a, b) folds from (1, 0) via (a, b) <- (a_r a, a_r b + b_r).
// Throws std::invalid_argument on an empty list.
Intervention compose(std::span<const Intervention> stages);

struct CoordinateComposition {
    std::size_t index;
    double a_comp;
    double b_comp;
    double max_stage_scale;  // max over stages of |a_j^(r)|
};

struct CompositionReport {
    std::vector<CoordinateComposition> coordinates;
    // Every stage-wise |a| <= 1, so |a_comp| <= 1 and the contraction constant is preserved.
    bool guarantee_applies = true;
    // Some stage scales beyond one: the scaled constant (max|a|) kappa must be checked instead.
    bool needs_kappa_max = false;
};

CompositionReport check_composition_bound(std::span<const Intervention> stages);

}  // namespace cyscm
