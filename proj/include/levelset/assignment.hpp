#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace levelset {

/// Minimum-cost rectangular assignment. cost[i][j] is the cost of pairing row i
/// with column j; min(rows, cols) pairs are formed. Among optimal assignments
/// the lexicographically smallest list of (row, col) pairs is returned.
std::vector<std::pair<std::size_t, std::size_t>> solve_assignment(
    const std::vector<std::vector<double>>& cost);

/// Optimal total cost over the given row and column subsets (full cardinality).
double assignment_cost(const std::vector<std::vector<double>>& cost,
                       const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols);

}  // namespace levelset
