#pragma once

#include <Eigen/SparseCore>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "kacl/model.hpp"

namespace kl {

// Vacant interior nodes of a uniform lattice over an open box.
// Interior nodes sit at box.lo + k*h (k >= 1 componentwise) strictly inside
// the box; a node is removed iff its center lies in some closed ball B(y,a).
struct GridDomain {
  Box box;
  double h = 0.0;
  int d = 0;
  std::vector<std::int64_t> shape;    // interior lattice extent per dim
  std::vector<std::uint8_t> active;   // lexicographic over shape
  std::vector<std::int64_t> nodes;    // active index -> full lattice index
  std::vector<std::int64_t> index;    // full lattice index -> active index or -1
  std::int64_t n_active = 0;

  std::int64_t full_size() const;
  // Coordinates of a full lattice index (lexicographic, last dim fastest).
  std::vector<double> node_coord(std::int64_t full) const;
  void coord_of_active(std::int64_t act, double* out) const;
};

// Discrete -1/2 Laplacian with Dirichlet conditions on the masked nodes:
// diagonal d/h^2, off-diagonal -1/(2 h^2) for active grid neighbors.
struct SparseOperator {
  Eigen::SparseMatrix<double> mat;  // n_active x n_active, symmetric
  double h = 0.0;
  int d = 0;
  std::int64_t n() const { return mat.rows(); }
};

GridDomain build_mask(const Box& box, const Cloud& cloud, double a, double h);

SparseOperator assemble_half_laplacian(const GridDomain& domain);  // throws empty_domain_error

// Partition of active nodes under grid adjacency; labels[i] in [0, count).
struct Components {
  std::vector<std::int32_t> labels;
  std::int32_t count = 0;
};
Components connected_components(const GridDomain& domain);

// Default spacing rule: resolve the obstacle radius and the clearing scale
// R0 (log ell)^{1/d}.
double default_spacing(const ModelParams& params, double ell);

// Run-length-encoded mask in a binary container with a JSON header.
void write_grid_rle(std::ostream& os, const GridDomain& domain);
// MatrixMarket coordinate text format.
void write_matrix_market(std::ostream& os, const SparseOperator& op);

}  // namespace kl
