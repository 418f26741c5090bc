// SPDX-License-Identifier: Apache-2.0
#include "rssqp/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rssqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tableau state. Columns: structural [0, n), slacks [n, n+m), artificials [n+m, n+2m).
// Every row owns one slack and one artificial column; an artificial that is
// never basic stays fixed at zero.
class Tableau {
 public:
  Tableau(const LinearProgram& lp, const SimplexOptions& opts) : lp_(lp), opts_(opts) {
    n_ = static_cast<int>(lp.cost.size());
    m_ = static_cast<int>(lp.b.size());
    total_ = n_ + 2 * m_;
    lower_.resize(total_);
    upper_.resize(total_);
    x_.resize(total_);
    for (int j = 0; j < n_; ++j) {
      lower_[j] = lp.lower[j];
      upper_[j] = lp.upper[j];
      if (std::isfinite(lower_[j])) {
        x_[j] = lower_[j];
      } else if (std::isfinite(upper_[j])) {
        x_[j] = upper_[j];
      } else {
        x_[j] = 0.0;
      }
    }
    T_ = Matrix::Zero(m_, total_);
    basis_.assign(m_, -1);
    art_sign_ = Vector::Ones(m_);
    for (int i = 0; i < m_; ++i) {
      const int s = n_ + i;
      const int a = n_ + m_ + i;
      lower_[s] = 0.0;
      upper_[s] = lp.sense[i] == RowSense::Equal ? 0.0 : kInf;
      x_[s] = 0.0;
      double r = lp.b[i];
      for (int j = 0; j < n_; ++j) r -= lp.A(i, j) * x_[j];
      if (lp.sense[i] == RowSense::LessEqual && r >= 0.0) {
        basis_[i] = s;
        x_[s] = r;
        lower_[a] = upper_[a] = 0.0;
        x_[a] = 0.0;
        T_.row(i).head(n_) = lp.A.row(i);
        T_(i, s) = 1.0;
      } else {
        art_sign_[i] = r >= 0.0 ? 1.0 : -1.0;
        basis_[i] = a;
        lower_[a] = 0.0;
        upper_[a] = kInf;
        x_[a] = std::abs(r);
        // Row i of B^{-1}[A | I | diag(sign)] with B_ii = sign.
        T_.row(i).head(n_) = lp.A.row(i) * art_sign_[i];
        T_(i, s) = art_sign_[i];
        T_(i, a) = 1.0;
      }
    }
  }

  bool needs_phase_one() const {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= n_ + m_) return true;
    }
    return false;
  }

  // Runs simplex iterations on the given cost. Returns Optimal, Unbounded or MaxIterations.
  SolveStatus run(const Vector& cost, int& iterations, int max_iterations) {
    std::vector<char> is_basic(total_, 0);
    for (int b : basis_) is_basic[b] = 1;
    const double cscale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    while (true) {
      if (iterations >= max_iterations) return SolveStatus::MaxIterations;
      // Bland entering choice: lowest index with an improving reduced cost.
      int enter = -1;
      double dir = 0.0;
      for (int j = 0; j < total_; ++j) {
        if (is_basic[j] || lower_[j] == upper_[j]) continue;
        double d = cost[j];
        for (int i = 0; i < m_; ++i) d -= cost[basis_[i]] * T_(i, j);
        const double tol = opts_.optimality_tol * cscale;
        if (d < -tol && x_[j] < upper_[j]) {
          enter = j;
          dir = 1.0;
          break;
        }
        if (d > tol && x_[j] > lower_[j]) {
          enter = j;
          dir = -1.0;
          break;
        }
      }
      if (enter < 0) return SolveStatus::Optimal;

      // Ratio test; ties go to the lowest variable index (the entering
      // variable itself for a bound flip).
      double step = kInf;
      int leave_row = -1;
      int leave_var = std::numeric_limits<int>::max();
      if (std::isfinite(lower_[enter]) && std::isfinite(upper_[enter])) {
        step = upper_[enter] - lower_[enter];
        leave_var = enter;
      }
      for (int i = 0; i < m_; ++i) {
        const double t = T_(i, enter);
        if (std::abs(t) <= opts_.pivot_tol) continue;
        const int b = basis_[i];
        const double delta = -dir * t;  // rate of change of x_b
        double limit = kInf;
        if (delta < 0.0 && std::isfinite(lower_[b])) {
          limit = std::max(0.0, x_[b] - lower_[b]) / -delta;
        } else if (delta > 0.0 && std::isfinite(upper_[b])) {
          limit = std::max(0.0, upper_[b] - x_[b]) / delta;
        }
        if (!std::isfinite(limit)) continue;
        const double tie = 1e-12 * std::max(1.0, std::abs(step));
        if (limit < step - tie || (limit <= step + tie && b < leave_var)) {
          step = limit;
          leave_row = i;
          leave_var = b;
        }
      }
      if (!std::isfinite(step)) return SolveStatus::Unbounded;
      ++iterations;

      for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * step * T_(i, enter);
      x_[enter] += dir * step;

      if (leave_row < 0) {
        // Bound flip: snap to the opposite bound.
        x_[enter] = dir > 0.0 ? upper_[enter] : lower_[enter];
        continue;
      }
      const int b = basis_[leave_row];
      const double delta = -dir * T_(leave_row, enter);
      x_[b] = delta < 0.0 ? lower_[b] : upper_[b];

      const double piv = T_(leave_row, enter);
      T_.row(leave_row) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        const double f = T_(i, enter);
        if (f != 0.0) T_.row(i) -= f * T_.row(leave_row);
      }
      is_basic[b] = 0;
      is_basic[enter] = 1;
      basis_[leave_row] = enter;
    }
  }

  double artificial_sum() const {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += x_[n_ + m_ + i];
    return s;
  }

  void fix_artificials() {
    for (int i = 0; i < m_; ++i) {
      const int a = n_ + m_ + i;
      lower_[a] = upper_[a] = 0.0;
      if (std::find(basis_.begin(), basis_.end(), a) == basis_.end()) x_[a] = 0.0;
    }
  }

  // Recomputes basic values from the original data so the returned point does not
  // carry accumulated tableau round-off.
  bool refine() {
    if (m_ == 0) return true;
    Matrix B(m_, m_);
    Vector rhs = lp_.b;
    for (int i = 0; i < m_; ++i) B.col(i) = column(basis_[i]);
    std::vector<char> is_basic(total_, 0);
    for (int b : basis_) is_basic[b] = 1;
    for (int j = 0; j < total_; ++j) {
      if (!is_basic[j] && x_[j] != 0.0) rhs -= column(j) * x_[j];
    }
    Eigen::FullPivLU<Matrix> lu(B);
    if (!lu.isInvertible()) return false;
    const Vector xb = lu.solve(rhs);
    for (int i = 0; i < m_; ++i) x_[basis_[i]] = xb[i];
    return true;
  }

  Vector structural() const { return x_.head(n_); }
  int total() const { return total_; }
  int n() const { return n_; }
  int m() const { return m_; }

 private:
  Vector column(int j) const {
    if (j < n_) return lp_.A.col(j);
    Vector e = Vector::Zero(m_);
    if (j < n_ + m_) {
      e[j - n_] = 1.0;
    } else {
      e[j - n_ - m_] = art_sign_[j - n_ - m_];
    }
    return e;
  }

  const LinearProgram& lp_;
  const SimplexOptions& opts_;
  int n_ = 0;
  int m_ = 0;
  int total_ = 0;
  Matrix T_;
  Vector lower_;
  Vector upper_;
  Vector x_;
  Vector art_sign_;
  std::vector<int> basis_;
};

void check_lp(const LinearProgram& lp) {
  const auto n = lp.cost.size();
  const auto m = lp.b.size();
  if (lp.A.rows() != m || (m > 0 && lp.A.cols() != n) || static_cast<Eigen::Index>(lp.sense.size()) != m ||
      lp.lower.size() != n || lp.upper.size() != n) {
    throw InvalidArgument("solve_lp: inconsistent dimensions");
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lp.lower[j] > lp.upper[j]) throw InvalidArgument("solve_lp: lower bound exceeds upper bound");
  }
}

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opts) {
  check_lp(lp);
  LpResult res;
  Tableau tab(lp, opts);
  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 100 * (tab.total() + 10);

  if (tab.needs_phase_one()) {
    Vector c1 = Vector::Zero(tab.total());
    c1.tail(tab.m()).setOnes();
    const SolveStatus s = tab.run(c1, res.iterations, max_it);
    if (s == SolveStatus::MaxIterations) {
      res.status = s;
      return res;
    }
    const double scale = std::max(1.0, lp.b.size() > 0 ? lp.b.cwiseAbs().maxCoeff() : 0.0);
    if (s != SolveStatus::Optimal || tab.artificial_sum() > opts.feasibility_tol * scale) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
  }
  tab.fix_artificials();

  Vector c2 = Vector::Zero(tab.total());
  c2.head(tab.n()) = lp.cost;
  const SolveStatus s = tab.run(c2, res.iterations, max_it);
  if (s != SolveStatus::Optimal) {
    res.status = s;
    return res;
  }
  if (!tab.refine()) {
    res.status = SolveStatus::NumericalFailure;
    return res;
  }
  res.x = tab.structural();
  res.objective = lp.cost.dot(res.x);
  res.status = std::isfinite(res.objective) ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
  return res;
}

}  // namespace rssqp
