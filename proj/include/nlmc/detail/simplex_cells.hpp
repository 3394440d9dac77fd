#pragma once

#include <cstddef>
#include <vector>

namespace nlmc::detail {

/// Kuhn (Freudenthal) triangulation of the simplex lattice with a given
/// denominator. Every cell is a full-dimensional simplex whose vertices are
/// lattice points; the cells tile the probability simplex.
struct KuhnCells {
  std::size_t vertices_per_cell = 0;
  std::vector<std::size_t> vertex_index;  // cells * vertices_per_cell, indices into the lattice

  std::size_t size() const { return vertices_per_cell ? vertex_index.size() / vertices_per_cell : 0; }
  const std::size_t* cell(std::size_t c) const { return vertex_index.data() + c * vertices_per_cell; }
};

/// `lattice` must be the output of simplex_lattice(space, denominator).
KuhnCells kuhn_cells(const std::vector<std::vector<int>>& lattice, std::size_t denominator);

}  // namespace nlmc::detail
