#include "gadnr/hungarian.hpp"

#include <cmath>
#include <limits>

#include "gadnr/errors.hpp"

namespace gadnr {

Assignment hungarian_min_cost(const Matrix& cost) {
  if (cost.rows != cost.cols) throw NumericError("hungarian_min_cost: matrix not square");
  if (!all_finite(cost)) throw NumericError("hungarian_min_cost: non-finite cost entry");
  const int n = cost.rows;
  const double inf = std::numeric_limits<double>::infinity();

  // 1-indexed potentials and matching; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0);  // match[j] = row assigned to column j
  std::vector<int> way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  Assignment out;
  out.col_of_row.assign(n, -1);
  out.total = 0.0;
  for (int j = 1; j <= n; ++j) {
    out.col_of_row[match[j] - 1] = j - 1;
    out.total += cost(match[j] - 1, j - 1);
  }
  return out;
}

}  // namespace gadnr
