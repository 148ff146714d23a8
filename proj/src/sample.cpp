#include "cyscm/sample.hpp"

#include <array>
#include <charconv>

namespace cyscm {

Vector SampleMatrix::column_means() const {
    Vector mean(cols(), 0.0);
    if (rows_ == 0) return mean;
    for (std::size_t r = 0; r < rows_; ++r) {
        const auto x = row(r);
        for (std::size_t c = 0; c < cols(); ++c) mean[c] += x[c];
    }
    for (double& m : mean) m /= static_cast<double>(rows_);
    return mean;
}

Matrix SampleMatrix::covariance() const {
    const std::size_t d = cols();
    Matrix cov(d, d);
    if (rows_ < 2) return cov;
    const Vector mean = column_means();
    Vector centered(d);
    for (std::size_t r = 0; r < rows_; ++r) {
        const auto x = row(r);
        for (std::size_t c = 0; c < d; ++c) centered[c] = x[c] - mean[c];
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i; j < d; ++j) cov(i, j) += centered[i] * centered[j];
    }
    const double scale = 1.0 / static_cast<double>(rows_ - 1);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i; j < d; ++j) {
            cov(i, j) *= scale;
            cov(j, i) = cov(i, j);
        }
    return cov;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), ptr);
}

void write_csv(const SampleMatrix& samples, std::ostream& out) {
    for (std::size_t c = 0; c < samples.cols(); ++c) {
        if (c) out << ',';
        out << samples.columns()[c];
    }
    out << '\n';
    std::string line;
    for (std::size_t r = 0; r < samples.rows(); ++r) {
        line.clear();
        const auto x = samples.row(r);
        for (std::size_t c = 0; c < x.size(); ++c) {
            if (c) line += ',';
            line += format_double(x[c]);
        }
        line += '\n';
        out << line;
    }
}

}  // namespace cyscm
