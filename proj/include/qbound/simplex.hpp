#pragma once

// Dense two-phase tableau simplex with Bland's rule.
//
// Works on the standard form   maximize c^T x  s.t.  A x (<=|>=) b, x >= 0
// with b >= 0.  Slack, surplus and artificial columns are appended by the
// tableau itself; equality rows must already be split by the caller.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace qbound::detail {

enum class SimplexOutcome { optimal, unbounded, infeasible, pivot_limit };

template <typename Scalar>
struct SimplexResult {
    SimplexOutcome outcome;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> x;
    Scalar objective;
    std::size_t pivots;
};

template <typename Scalar>
class DenseSimplex {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    // `is_ge[i]` marks row i as ">=", otherwise "<=".  Requires b >= 0.
    DenseSimplex(const Matrix& a, const Vector& b, const std::vector<bool>& is_ge, Scalar tol)
        : m_(a.rows()), n_(a.cols()), tol_(tol) {
        Eigen::Index ge = 0;
        for (bool g : is_ge) ge += g;
        n_slack_ = m_;
        n_art_ = ge;
        const Eigen::Index cols = n_ + n_slack_ + n_art_;
        t_ = Matrix::Zero(m_, cols + 1);
        basis_.resize(m_);
        t_.block(0, 0, m_, n_) = a;
        Eigen::Index art = n_ + n_slack_;
        for (Eigen::Index i = 0; i < m_; ++i) {
            t_(i, cols) = b(i);
            if (is_ge[i]) {
                t_(i, n_ + i) = Scalar(-1);
                t_(i, art) = Scalar(1);
                basis_[i] = art++;
            } else {
                t_(i, n_ + i) = Scalar(1);
                basis_[i] = n_ + i;
            }
        }
        active_rows_.assign(m_, true);
    }

    SimplexResult<Scalar> run(const Vector& c, std::size_t pivot_limit) {
        const Eigen::Index cols = n_ + n_slack_ + n_art_;
        std::size_t pivots = 0;

        if (n_art_ > 0) {
            // Phase 1: maximize -sum(artificials).
            Vector cost = Vector::Zero(cols);
            cost.tail(n_art_).setConstant(Scalar(-1));
            auto out = iterate(cost, cols, pivot_limit, pivots);
            if (out == SimplexOutcome::pivot_limit) return {out, Vector(), Scalar(0), pivots};
            if (-objective_value(cost) > tol_ * Scalar(10)) return {SimplexOutcome::infeasible, Vector(), Scalar(0), pivots};
            drive_out_artificials(pivots);
        }

        Vector cost = Vector::Zero(cols);
        cost.head(n_) = c;
        // Artificial columns are barred from entering in phase 2.
        auto out = iterate(cost, n_ + n_slack_, pivot_limit, pivots);
        if (out != SimplexOutcome::optimal) return {out, Vector(), Scalar(0), pivots};

        Vector x = Vector::Zero(n_);
        for (Eigen::Index i = 0; i < m_; ++i)
            if (active_rows_[i] && basis_[i] < n_) x(basis_[i]) = t_(i, cols);
        return {SimplexOutcome::optimal, x, c.dot(x), pivots};
    }

private:
    Scalar objective_value(const Vector& cost) const {
        const Eigen::Index rhs = t_.cols() - 1;
        Scalar v(0);
        for (Eigen::Index i = 0; i < m_; ++i)
            if (active_rows_[i]) v += cost(basis_[i]) * t_(i, rhs);
        return v;
    }

    // Bland's rule: lowest-index improving column, ties in the ratio test
    // broken by lowest basic variable index.
    SimplexOutcome iterate(const Vector& cost, Eigen::Index enterable, std::size_t limit, std::size_t& pivots) {
        const Eigen::Index rhs = t_.cols() - 1;
        for (;;) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < enterable && enter < 0; ++j) {
                Scalar reduced = cost(j);
                for (Eigen::Index i = 0; i < m_; ++i)
                    if (active_rows_[i]) reduced -= cost(basis_[i]) * t_(i, j);
                if (reduced > tol_) enter = j;
            }
            if (enter < 0) return SimplexOutcome::optimal;

            bool bounded = false;
            Scalar best_ratio(0);
            for (Eigen::Index i = 0; i < m_; ++i) {
                if (!active_rows_[i] || t_(i, enter) <= tol_) continue;
                Scalar ratio = t_(i, rhs) / t_(i, enter);
                if (!bounded || ratio < best_ratio) best_ratio = ratio;
                bounded = true;
            }
            if (!bounded) return SimplexOutcome::unbounded;
            Eigen::Index leave = -1;
            for (Eigen::Index i = 0; i < m_; ++i) {
                if (!active_rows_[i] || t_(i, enter) <= tol_) continue;
                if (t_(i, rhs) / t_(i, enter) <= best_ratio + tol_ && (leave < 0 || basis_[i] < basis_[leave]))
                    leave = i;
            }
            if (pivots >= limit) return SimplexOutcome::pivot_limit;
            pivot(leave, enter);
            ++pivots;
        }
    }

    void pivot(Eigen::Index row, Eigen::Index col) {
        t_.row(row) /= t_(row, col);
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (i == row || !active_rows_[i]) continue;
            Scalar f = t_(i, col);
            if (f != Scalar(0)) t_.row(i) -= f * t_.row(row);
        }
        basis_[row] = col;
    }

    void drive_out_artificials(std::size_t& pivots) {
        const Eigen::Index first_art = n_ + n_slack_;
        for (Eigen::Index i = 0; i < m_; ++i) {
            if (basis_[i] < first_art) continue;
            Eigen::Index col = -1;
            for (Eigen::Index j = 0; j < first_art && col < 0; ++j)
                if (std::abs(t_(i, j)) > tol_) col = j;
            if (col >= 0) {
                pivot(i, col);
                ++pivots;
            } else {
                active_rows_[i] = false;  // redundant row
            }
        }
    }

    Eigen::Index m_, n_, n_slack_ = 0, n_art_ = 0;
    Scalar tol_;
    Matrix t_;
    std::vector<Eigen::Index> basis_;
    std::vector<bool> active_rows_;
};

}  // namespace qbound::detail
