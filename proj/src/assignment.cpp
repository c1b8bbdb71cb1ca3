#include "levelset/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levelset/error.hpp"

namespace levelset {
namespace {

// Shortest augmenting path with potentials; a is r x c with r <= c.
// Returns the optimal total and row -> column matching.
double hungarian(const std::vector<std::vector<double>>& a, std::vector<std::size_t>* match) {
  const std::size_t r = a.size();
  if (r == 0) return 0.0;
  const std::size_t c = a[0].size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(r + 1, 0.0), v(c + 1, 0.0);
  std::vector<std::size_t> p(c + 1, 0), way(c + 1, 0);
  for (std::size_t i = 1; i <= r; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(c + 1, inf);
    std::vector<char> used(c + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= c; ++j) {
        if (used[j]) continue;
        const double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= c; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  if (match) match->assign(r, 0);
  for (std::size_t j = 1; j <= c; ++j) {
    if (p[j] == 0) continue;
    total += a[p[j] - 1][j - 1];
    if (match) (*match)[p[j] - 1] = j - 1;
  }
  return total;
}

bool same_cost(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
  if (rows.empty() || cols.empty()) return 0.0;
  std::vector<std::vector<double>> sub;
  if (rows.size() <= cols.size()) {
    sub.assign(rows.size(), std::vector<double>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      for (std::size_t j = 0; j < cols.size(); ++j) sub[i][j] = cost[rows[i]][cols[j]];
  } else {
    sub.assign(cols.size(), std::vector<double>(rows.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t i = 0; i < rows.size(); ++i) sub[j][i] = cost[rows[i]][cols[j]];
  }
  return hungarian(sub, nullptr);
}

std::vector<std::pair<std::size_t, std::size_t>> solve_assignment(
    const std::vector<std::vector<double>>& cost) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const std::size_t rows = cost.size();
  if (rows == 0) return pairs;
  const std::size_t cols = cost[0].size();
  for (const auto& row : cost) {
    if (row.size() != cols) throw Error(ErrorCode::InvalidArgument, "ragged cost matrix");
    for (double x : row) {
      if (!std::isfinite(x)) throw Error(ErrorCode::InvalidArgument, "non-finite assignment cost");
    }
  }
  if (cols == 0) return pairs;

  std::vector<std::size_t> free_rows(rows), free_cols(cols);
  for (std::size_t i = 0; i < rows; ++i) free_rows[i] = i;
  for (std::size_t j = 0; j < cols; ++j) free_cols[j] = j;
  const double optimum = assignment_cost(cost, free_rows, free_cols);
  const std::size_t target = std::min(rows, cols);

  // Fix pairs greedily in (row, col) order while the remainder stays optimal.
  double fixed = 0.0;
  for (std::size_t i = 0; i < rows && pairs.size() < target; ++i) {
    std::vector<std::size_t> rest_rows;
    for (std::size_t r : free_rows) {
      if (r != i) rest_rows.push_back(r);
    }
    for (std::size_t j : free_cols) {
      std::vector<std::size_t> rest_cols;
      for (std::size_t c : free_cols) {
        if (c != j) rest_cols.push_back(c);
      }
      const double total = fixed + cost[i][j] + assignment_cost(cost, rest_rows, rest_cols);
      if (same_cost(total, optimum)) {
        pairs.emplace_back(i, j);
        fixed += cost[i][j];
        free_cols = std::move(rest_cols);
        break;
      }
    }
    free_rows = std::move(rest_rows);
  }
  return pairs;
}

}  // namespace levelset
