#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cyscm/linalg.hpp"

namespace cyscm {

// Row-major table of Monte Carlo draws with named columns.
class SampleMatrix {
public:
    SampleMatrix() = default;
    SampleMatrix(std::vector<std::string> columns, std::size_t rows)
        : columns_(std::move(columns)), rows_(rows), values_(rows_ * columns_.size(), 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return columns_.size(); }
    const std::vector<std::string>& columns() const noexcept { return columns_; }

    std::span<double> row(std::size_t r) { return {values_.data() + r * cols(), cols()}; }
    std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols(), cols()}; }
    double operator()(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

    Vector column_means() const;
    // Unbiased (n - 1) sample covariance.
    Matrix covariance() const;

    friend bool operator==(const SampleMatrix&, const SampleMatrix&) = default;

private:
    std::vector<std::string> columns_;
    std::size_t rows_ = 0;
    std::vector<double> values_;
};

// Header line of column names, then one line per row; numbers in shortest round-trip form.
void write_csv(const SampleMatrix& samples, std::ostream& out);

std::string format_double(double v);

}  // namespace cyscm
