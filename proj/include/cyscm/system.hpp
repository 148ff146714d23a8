#pragma once

// A flat view x = F(x, e) over one or more stacked copies of a model's
// mechanisms. Every copy reads its own block of the state vector and the
// shared noise vector; a single model is the one-block case, a twin model is
// the two-block case.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cyscm/linalg.hpp"
#include "cyscm/model.hpp"

namespace cyscm {

// Matrix form x = A x + b + N e. N is dim x noise_dim.
struct LinearForm {
    Matrix coefficients;
    Vector offsets;
    Matrix noise_gains;
};

class StructuralSystem {
public:
    explicit StructuralSystem(const ScmModel& model);

    // Copies of models with identical variable sets sharing one noise vector
    // (taken from the first copy).
    static StructuralSystem stacked(std::span<const ScmModel* const> copies, std::vector<std::string> names);

    std::size_t dim() const noexcept { return equations_.size(); }
    std::size_t noise_dim() const noexcept { return noise_dim_; }
    std::size_t block_size() const noexcept { return block_; }
    const std::vector<std::string>& names() const noexcept { return names_; }
    const NoiseSpec& noise() const noexcept { return noise_; }

    double evaluate(std::size_t i, std::span<const double> x, std::span<const double> e) const;
    void evaluate(std::span<const double> x, std::span<const double> e, std::span<double> out) const;
    Vector evaluate(std::span<const double> x, std::span<const double> e) const;

    bool is_linear() const;
    // Throws NonLinearModel.
    LinearForm linear_form() const;

    // Row i of the bound matrix B with B[i][k] >= sup |dF_i/dx_k|, in full-state coordinates.
    // Throws Uncertifiable.
    std::vector<double> derivative_bound_row(std::size_t i) const;

private:
    StructuralSystem() = default;

    struct Equation {
        Mechanism mechanism;
        std::size_t block_offset;  // start of the state block this equation reads
        std::size_t local_index;   // coordinate within its block (selects the noise term of a linear row)
    };

    std::vector<Equation> equations_;
    std::vector<std::string> names_;
    NoiseSpec noise_;
    std::size_t block_ = 0;
    std::size_t noise_dim_ = 0;
};

}  // namespace cyscm
