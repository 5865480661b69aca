#include "rbdsde/regression.hpp"

#include "rbdsde/errors.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace rbdsde {
namespace {

constexpr double kMaxCondition = 1e13;

// Exponent vectors of all monomials of total degree 1..degree in `vars`
// variables.
void monomials(std::size_t vars, std::size_t degree, std::vector<std::vector<std::size_t>>& out) {
    std::vector<std::size_t> cur(vars, 0);
    auto rec = [&](auto&& self, std::size_t var, std::size_t left) -> void {
        if (var == vars) {
            const std::size_t total = std::accumulate(cur.begin(), cur.end(), std::size_t{0});
            if (total > 0) out.push_back(cur);
            return;
        }
        for (std::size_t e = 0; e <= left; ++e) {
            cur[var] = e;
            self(self, var + 1, left - e);
        }
        cur[var] = 0;
    };
    rec(rec, 0, degree);
}

// Mean and standard deviation of a column; returns false when the column has
// no usable spread.
bool moments(const Eigen::Ref<const Eigen::VectorXd>& col, double& mean, double& sd) {
    const double n = static_cast<double>(col.size());
    mean = col.sum() / n;
    sd = std::sqrt((col.array() - mean).square().sum() / n);
    return sd > 1e-12 * (1.0 + std::abs(mean));
}

}  // namespace

ConditionalExpectation::ConditionalExpectation(const RegressionBasis& basis,
                                               std::span<const double> x, std::size_t dim,
                                               std::span<const double> extra)
    : n_(dim == 0 ? 0 : x.size() / dim) {
    if (dim == 0 || x.size() != n_ * dim || n_ == 0) {
        throw ValidationError("regression: state array does not match dimension");
    }
    if (!extra.empty() && extra.size() != n_) {
        throw ValidationError("regression: extra regressor has wrong length");
    }

    // Standardized coordinates with spread.
    std::vector<Eigen::VectorXd> vars;
    for (std::size_t k = 0; k < dim; ++k) {
        Eigen::VectorXd col(static_cast<Eigen::Index>(n_));
        for (std::size_t p = 0; p < n_; ++p) col[static_cast<Eigen::Index>(p)] = x[p * dim + k];
        double m = 0.0, s = 0.0;
        if (moments(col, m, s)) vars.emplace_back((col.array() - m) / s);
    }

    std::vector<Eigen::VectorXd> columns;
    if (!vars.empty() && basis.degree > 0) {
        std::vector<std::vector<std::size_t>> exps;
        monomials(vars.size(), basis.degree, exps);
        for (const auto& e : exps) {
            Eigen::VectorXd col = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n_));
            for (std::size_t v = 0; v < vars.size(); ++v) {
                for (std::size_t r = 0; r < e[v]; ++r) col.array() *= vars[v].array();
            }
            columns.push_back(std::move(col));
        }
    }
    if (!extra.empty()) {
        Eigen::VectorXd col(static_cast<Eigen::Index>(n_));
        for (std::size_t p = 0; p < n_; ++p) col[static_cast<Eigen::Index>(p)] = extra[p];
        columns.push_back(std::move(col));
    }

    std::vector<Eigen::VectorXd> kept;
    for (auto& col : columns) {
        double m = 0.0, s = 0.0;
        if (moments(col, m, s)) kept.emplace_back((col.array() - m) / s);
    }
    design_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t j = 0; j < kept.size(); ++j) design_.col(static_cast<Eigen::Index>(j)) = kept[j];

    if (design_.cols() > 0) {
        Eigen::MatrixXd gram = design_.transpose() * design_;
        gram.diagonal().array() += basis.ridge * static_cast<double>(n_);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        condition_ = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
        if (!(condition_ < kMaxCondition)) {
            throw NumericalError("regression: rank-deficient normal equations (condition number " +
                                 std::to_string(condition_) + ")");
        }
        solver_.compute(gram);
    }
}

void ConditionalExpectation::fit(std::span<const double> target, std::span<double> out) const {
    if (target.size() != n_ || out.size() != n_) {
        throw ValidationError("regression: target has wrong length");
    }
    const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(n_));
    const double mean = y.sum() / static_cast<double>(n_);
    Eigen::Map<Eigen::VectorXd> fitted(out.data(), static_cast<Eigen::Index>(n_));
    if (design_.cols() == 0) {
        fitted.setConstant(mean);
        return;
    }
    const Eigen::VectorXd rhs = design_.transpose() * (y.array() - mean).matrix();
    const Eigen::VectorXd coef = solver_.solve(rhs);
    fitted = (design_ * coef).array() + mean;
    if (!fitted.allFinite()) throw NumericalError("regression produced non-finite values");
}

std::vector<double> ConditionalExpectation::fit(std::span<const double> target) const {
    std::vector<double> out(n_);
    fit(target, out);
    return out;
}

}  // namespace rbdsde
