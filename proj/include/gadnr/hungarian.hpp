#pragma once
#include <vector>

#include "gadnr/matrix.hpp"

namespace gadnr {

struct Assignment {
  std::vector<int> col_of_row;  // row i is matched to column col_of_row[i]
  double total;
};

// Minimum-cost perfect matching on a square cost matrix via shortest
// augmenting paths with potentials. O(d^3) in the matrix dimension.
Assignment hungarian_min_cost(const Matrix& cost);

}  // namespace gadnr
