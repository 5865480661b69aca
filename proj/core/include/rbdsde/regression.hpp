#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace rbdsde {

/// Polynomial regression basis: all monomials of total degree <= degree in
/// the (standardized) state, optionally augmented by the obstacle value.
struct RegressionBasis {
    std::size_t degree = 3;
    bool obstacle_column = true;
    double ridge = 1e-8;  // penalty is ridge * n_samples on non-constant terms
};

/// Least-squares conditional expectation estimator for one cross-section of
/// samples. Columns are centered, so the constant term is unpenalized and the
/// fitted values always average to the target average; a constant target is
/// reproduced exactly up to rounding.
class ConditionalExpectation {
public:
    /// `x` is n x d row-major. `extra` is empty or holds one extra regressor
    /// per sample. Coordinates without spread are dropped from the basis.
    ConditionalExpectation(const RegressionBasis& basis, std::span<const double> x,
                           std::size_t dim, std::span<const double> extra = {});

    std::size_t n_samples() const noexcept { return n_; }
    /// Number of basis functions, including the constant.
    std::size_t n_terms() const noexcept { return static_cast<std::size_t>(design_.cols()) + 1; }
    double condition_number() const noexcept { return condition_; }

    /// Fitted values at the sample points; writes into `out` (size n).
    void fit(std::span<const double> target, std::span<double> out) const;
    std::vector<double> fit(std::span<const double> target) const;

private:
    std::size_t n_;
    Eigen::MatrixXd design_;  // centered non-constant columns
    Eigen::LDLT<Eigen::MatrixXd> solver_;
    double condition_ = 1.0;
};

}  // namespace rbdsde
