#include "ctsg/matrix_game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ctsg/errors.hpp"

namespace ctsg {

namespace {

constexpr double kPivotTol = 1e-12;

// Clamps tiny negatives from round-off and rescales to a probability vector.
void normalize(std::vector<double>& p) {
  double sum = 0.0;
  for (double& v : p) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
    return;
  }
  for (double& v : p) v /= sum;
}

}  // namespace

std::string to_string(LpStatus status) {
  return status == LpStatus::kOptimal ? "optimal" : "degenerate-optimal";
}

MatrixGameSolution solve_matrix_game(const Matrix& c) {
  const std::size_t m = c.rows();
  const std::size_t n = c.cols();
  if (m == 0 || n == 0) throw PreconditionError("matrix game needs at least one row and column");
  for (double v : c.data())
    if (!std::isfinite(v)) throw PreconditionError("matrix game entry is not finite");

  MatrixGameSolution sol;
  if (m == 1 && n == 1) {
    sol.value = c(0, 0);
    sol.strategy_p1 = {1.0};
    sol.strategy_p2 = {1.0};
    return sol;
  }

  const double shift = std::max(0.0, -c.min()) + 1.0;

  // Tableau for  max sum(y)  s.t.  (C + shift) y <= 1, y >= 0.
  // Columns 0..n-1 are y, n..n+m-1 slacks; last column is the right-hand side.
  const std::size_t width = n + m + 1;
  const std::size_t rhs = n + m;
  std::vector<double> t(m * width, 0.0);
  auto at = [&](std::size_t i, std::size_t j) -> double& { return t[i * width + j]; };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) at(i, j) = c(i, j) + shift;
    at(i, n + i) = 1.0;
    at(i, rhs) = 1.0;
  }
  std::vector<double> obj(width, 0.0);  // reduced costs; obj[rhs] = current objective
  for (std::size_t j = 0; j < n; ++j) obj[j] = -1.0;
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  for (;;) {
    std::size_t enter = width;
    for (std::size_t j = 0; j < n + m; ++j) {
      if (obj[j] < -kPivotTol) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;

    std::size_t leave = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const double a = at(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = at(i, rhs) / a;
      if (ratio < best || (ratio == best && basis[i] < basis[leave])) {
        best = ratio;
        leave = i;
      }
    }
    // Bounded by construction: every column of C + shift is positive.
    if (leave == m) throw Error("matrix game LP unbounded (internal error)");

    const double pivot = at(leave, enter);
    for (std::size_t j = 0; j < width; ++j) at(leave, j) /= pivot;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave) continue;
      const double f = at(i, enter);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width; ++j) at(i, j) -= f * at(leave, j);
    }
    const double f = obj[enter];
    for (std::size_t j = 0; j < width; ++j) obj[j] -= f * at(leave, j);
    basis[leave] = enter;
  }

  std::vector<double> y(n, 0.0);
  bool degenerate = false;
  for (std::size_t i = 0; i < m; ++i) {
    if (basis[i] < n) y[basis[i]] = at(i, rhs);
    if (std::abs(at(i, rhs)) <= kPivotTol) degenerate = true;
  }
  std::vector<bool> is_basic(n + m, false);
  for (std::size_t b : basis) is_basic[b] = true;
  for (std::size_t j = 0; j < n + m; ++j)
    if (!is_basic[j] && std::abs(obj[j]) <= kPivotTol) degenerate = true;

  std::vector<double> u(obj.begin() + static_cast<std::ptrdiff_t>(n),
                        obj.begin() + static_cast<std::ptrdiff_t>(n + m));
  const double z = obj[rhs];

  sol.value = 1.0 / z - shift;
  sol.strategy_p2 = std::move(y);
  sol.strategy_p1 = std::move(u);
  normalize(sol.strategy_p1);
  normalize(sol.strategy_p2);
  sol.status = degenerate ? LpStatus::kDegenerateOptimal : LpStatus::kOptimal;
  return sol;
}

double bilinear(const Matrix& c, const std::vector<double>& phi, const std::vector<double>& psi) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < c.cols(); ++j) row += c(i, j) * psi[j];
    s += phi[i] * row;
  }
  return s;
}

double saddle_gap(const Matrix& c, const MatrixGameSolution& sol) {
  double gap = 0.0;
  for (std::size_t j = 0; j < c.cols(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < c.rows(); ++i) col += sol.strategy_p1[i] * c(i, j);
    gap = std::max(gap, sol.value - col);
  }
  for (std::size_t i = 0; i < c.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < c.cols(); ++j) row += c(i, j) * sol.strategy_p2[j];
    gap = std::max(gap, row - sol.value);
  }
  return gap;
}

}  // namespace ctsg
