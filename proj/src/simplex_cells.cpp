#include "nlmc/detail/simplex_cells.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "nlmc/errors.hpp"

namespace nlmc::detail {

// Points of the lattice are mapped to partial sums z_k = n_0 + ... + n_{k-1},
// k = 1..m-1, which fill the ordered region 0 <= z_1 <= ... <= z_{m-1} <= D.
// That region is a union of Kuhn simplices of the unit cube lattice.
KuhnCells kuhn_cells(const std::vector<std::vector<int>>& lattice, std::size_t denominator) {
  KuhnCells cells;
  if (lattice.empty()) return cells;
  const std::size_t m = lattice.front().size();
  const std::size_t dim = m - 1;
  cells.vertices_per_cell = m;
  if (dim == 0) {
    cells.vertex_index.push_back(0);
    return cells;
  }
  const int D = static_cast<int>(denominator);

  std::map<std::vector<int>, std::size_t> index_of;
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    std::vector<int> z(dim);
    int acc = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      acc += lattice[i][k];
      z[k] = acc;
    }
    index_of.emplace(std::move(z), i);
  }

  std::vector<std::size_t> perm(dim);
  std::vector<int> corner(dim, 0), v(dim);
  std::vector<std::size_t> ids(m);
  // Iterate over cube corners with nondecreasing coordinates in [0, D-1].
  while (true) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      v = corner;
      bool inside = true;
      auto it = index_of.find(v);
      if (it == index_of.end()) inside = false;
      else ids[0] = it->second;
      for (std::size_t s = 0; inside && s < dim; ++s) {
        v[perm[s]] += 1;
        it = index_of.find(v);
        if (it == index_of.end()) inside = false;
        else ids[s + 1] = it->second;
      }
      if (inside) cells.vertex_index.insert(cells.vertex_index.end(), ids.begin(), ids.end());
    } while (std::next_permutation(perm.begin(), perm.end()));

    // Next nondecreasing corner.
    std::size_t pos = dim;
    while (pos > 0) {
      --pos;
      if (corner[pos] < D - 1) {
        ++corner[pos];
        for (std::size_t q = pos + 1; q < dim; ++q) corner[q] = corner[pos];
        break;
      }
      if (pos == 0) return cells;
    }
  }
}

}  // namespace nlmc::detail
