#include "kacl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <ostream>
#include <unordered_map>

#include "kacl/errors.hpp"

namespace kl {

std::int64_t GridDomain::full_size() const {
  std::int64_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

std::vector<double> GridDomain::node_coord(std::int64_t full) const {
  std::vector<double> x(d);
  for (int k = d - 1; k >= 0; --k) {
    const std::int64_t i = full % shape[k];
    full /= shape[k];
    x[k] = box.lo[k] + (i + 1) * h;
  }
  return x;
}

void GridDomain::coord_of_active(std::int64_t act, double* out) const {
  std::int64_t full = nodes[act];
  for (int k = d - 1; k >= 0; --k) {
    const std::int64_t i = full % shape[k];
    full /= shape[k];
    out[k] = box.lo[k] + (i + 1) * h;
  }
}

namespace {

// Uniform bins of size 'cell' over the cloud, for O(1) closed-ball queries.
class PointBins {
 public:
  PointBins(const Cloud& cloud, double cell) : cloud_(cloud), cell_(cell) {
    const int d = cloud.d;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      bins_[key(cloud.point(i).data(), d)].push_back(i);
  }

  // Any cloud point within closed distance a of x?
  bool covered(const double* x, int d, double a) const {
    const double a2 = a * a;
    const int reach = static_cast<int>(std::ceil(a / cell_));
    std::vector<std::int64_t> base(d);
    for (int k = 0; k < d; ++k)
      base[k] = static_cast<std::int64_t>(std::floor(x[k] / cell_));
    std::vector<int> off(d, -reach);
    for (;;) {
      std::int64_t kk = 1469598103934665603ll;
      for (int k = 0; k < d; ++k)
        kk = kk * 1099511628211ll + (base[k] + off[k]);
      auto it = bins_.find(kk);
      if (it != bins_.end()) {
        for (auto i : it->second) {
          double r2 = 0.0;
          for (int k = 0; k < d; ++k) {
            const double dx = x[k] - cloud_.pts[i * d + k];
            r2 += dx * dx;
          }
          if (r2 <= a2) return true;
        }
      }
      int k = d - 1;
      while (k >= 0 && ++off[k] > reach) off[k--] = -reach;
      if (k < 0) break;
    }
    return false;
  }

 private:
  std::int64_t key(const double* x, int d) const {
    std::int64_t kk = 1469598103934665603ll;
    for (int k = 0; k < d; ++k)
      kk = kk * 1099511628211ll +
           static_cast<std::int64_t>(std::floor(x[k] / cell_));
    return kk;
  }
  const Cloud& cloud_;
  double cell_;
  std::unordered_map<std::int64_t, std::vector<std::size_t>> bins_;
};

}  // namespace

GridDomain build_mask(const Box& box, const Cloud& cloud, double a, double h) {
  if (!(h > 0.0)) throw invalid_parameter("build_mask: spacing h must be > 0");
  GridDomain g;
  g.box = box;
  g.h = h;
  g.d = box.dim();
  g.shape.resize(g.d);
  for (int k = 0; k < g.d; ++k) {
    // Interior nodes lo + i*h, i = 1..m with lo + m*h strictly below hi;
    // a ratio within 1e-9 of an integer is treated as exact.
    const double m = box.side(k) / h;
    g.shape[k] = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::floor(m - 1e-9)));
  }
  for (auto s : g.shape)
    if (s <= 0) {
      g.n_active = 0;
      return g;
    }

  const std::int64_t n_full = g.full_size();
  g.active.assign(n_full, 0);
  g.index.assign(n_full, -1);

  PointBins bins(cloud, std::max(a, h));
  std::vector<double> x(g.d);
  std::vector<std::int64_t> idx(g.d, 0);
  for (std::int64_t full = 0; full < n_full; ++full) {
    for (int k = 0; k < g.d; ++k) x[k] = box.lo[k] + (idx[k] + 1) * h;
    const bool vacant = cloud.size() == 0 || !bins.covered(x.data(), g.d, a);
    if (vacant) {
      g.active[full] = 1;
      g.index[full] = g.n_active;
      g.nodes.push_back(full);
      ++g.n_active;
    }
    int k = g.d - 1;
    while (k >= 0 && ++idx[k] == g.shape[k]) idx[k--] = 0;
  }
  return g;
}

SparseOperator assemble_half_laplacian(const GridDomain& domain) {
  if (domain.n_active == 0)
    throw empty_domain_error("assemble_half_laplacian: empty domain");
  SparseOperator op;
  op.h = domain.h;
  op.d = domain.d;
  const double diag = domain.d / (domain.h * domain.h);
  const double off = -0.5 / (domain.h * domain.h);

  // Strides of the full lattice, last dim fastest.
  std::vector<std::int64_t> stride(domain.d, 1);
  for (int k = domain.d - 2; k >= 0; --k)
    stride[k] = stride[k + 1] * domain.shape[k + 1];

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(domain.n_active * (2 * domain.d + 1));
  std::vector<std::int64_t> idx(domain.d);
  for (std::int64_t act = 0; act < domain.n_active; ++act) {
    std::int64_t full = domain.nodes[act];
    std::int64_t rem = full;
    for (int k = domain.d - 1; k >= 0; --k) {
      idx[k] = rem % domain.shape[k];
      rem /= domain.shape[k];
    }
    trips.emplace_back(act, act, diag);
    for (int k = 0; k < domain.d; ++k) {
      for (int s = -1; s <= 1; s += 2) {
        const std::int64_t j = idx[k] + s;
        if (j < 0 || j >= domain.shape[k]) continue;
        const std::int64_t nb = full + s * stride[k];
        const std::int64_t nb_act = domain.index[nb];
        if (nb_act >= 0) trips.emplace_back(act, nb_act, off);
      }
    }
  }
  op.mat.resize(domain.n_active, domain.n_active);
  op.mat.setFromTriplets(trips.begin(), trips.end());
  op.mat.makeCompressed();
  return op;
}

Components connected_components(const GridDomain& domain) {
  Components comp;
  comp.labels.assign(domain.n_active, -1);
  std::vector<std::int64_t> stride(domain.d, 1);
  for (int k = domain.d - 2; k >= 0; --k)
    stride[k] = stride[k + 1] * domain.shape[k + 1];

  std::deque<std::int64_t> queue;
  std::vector<std::int64_t> idx(domain.d);
  for (std::int64_t seed = 0; seed < domain.n_active; ++seed) {
    if (comp.labels[seed] >= 0) continue;
    comp.labels[seed] = comp.count;
    queue.push_back(seed);
    while (!queue.empty()) {
      const std::int64_t act = queue.front();
      queue.pop_front();
      std::int64_t full = domain.nodes[act];
      std::int64_t rem = full;
      for (int k = domain.d - 1; k >= 0; --k) {
        idx[k] = rem % domain.shape[k];
        rem /= domain.shape[k];
      }
      for (int k = 0; k < domain.d; ++k) {
        for (int s = -1; s <= 1; s += 2) {
          const std::int64_t j = idx[k] + s;
          if (j < 0 || j >= domain.shape[k]) continue;
          const std::int64_t nb_act = domain.index[full + s * stride[k]];
          if (nb_act >= 0 && comp.labels[nb_act] < 0) {
            comp.labels[nb_act] = comp.count;
            queue.push_back(nb_act);
          }
        }
      }
    }
    ++comp.count;
  }
  return comp;
}

double default_spacing(const ModelParams& params, double ell) {
  const Constants c = constants(params.d, params.nu);
  const double clearing =
      c.R0 * std::pow(std::max(std::log(ell), 1.0), 1.0 / params.d);
  return std::min(params.a / 4.0, clearing / 32.0);
}

void write_grid_rle(std::ostream& os, const GridDomain& domain) {
  char buf[64];
  os << "{\"box\":{\"lo\":[";
  for (int k = 0; k < domain.d; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", domain.box.lo[k]);
    os << (k ? "," : "") << buf;
  }
  os << "],\"hi\":[";
  for (int k = 0; k < domain.d; ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", domain.box.hi[k]);
    os << (k ? "," : "") << buf;
  }
  std::snprintf(buf, sizeof buf, "%.17g", domain.h);
  os << "],\"h\":" << buf << ",\"d\":" << domain.d
     << ",\"n_active\":" << domain.n_active << "}\n";
  // Run lengths alternating inactive/active, starting with inactive.
  std::uint8_t cur = 0;
  std::uint64_t run = 0;
  for (std::int64_t i = 0; i < domain.full_size(); ++i) {
    if (domain.active[i] == cur) {
      ++run;
    } else {
      os.write(reinterpret_cast<const char*>(&run), sizeof run);
      cur = domain.active[i];
      run = 1;
    }
  }
  os.write(reinterpret_cast<const char*>(&run), sizeof run);
}

void write_matrix_market(std::ostream& os, const SparseOperator& op) {
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << op.mat.rows() << " " << op.mat.cols() << " ";
  std::int64_t nnz_lower = 0;
  for (int k = 0; k < op.mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.mat, k); it; ++it)
      if (it.row() >= it.col()) ++nnz_lower;
  os << nnz_lower << "\n";
  char buf[64];
  for (int k = 0; k < op.mat.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.mat, k); it; ++it)
      if (it.row() >= it.col()) {
        std::snprintf(buf, sizeof buf, "%.17g", it.value());
        os << (it.row() + 1) << " " << (it.col() + 1) << " " << buf << "\n";
      }
}

}  // namespace kl
