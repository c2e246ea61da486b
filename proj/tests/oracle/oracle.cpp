#include "oracle.hpp"

#include <algorithm>
#include <complex>
#include <map>
#include <random>
#include <stdexcept>

namespace oracle {

namespace {

int idx(int l, int x, int y) { return ((x % l + l) % l) + l * ((y % l + l) % l); }

using Cd = std::complex<double>;

// op_i (x) op_j on sites i != j, identity elsewhere.
Eigen::MatrixXcd kron_pair(int n, int i, const Eigen::Matrix2cd& op_i, int j, const Eigen::Matrix2cd& op_j) {
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
  // Site 0 is the least significant bit.
  for (int s = n - 1; s >= 0; --s) {
    const Eigen::Matrix2cd m = s == i ? op_i : s == j ? op_j : Eigen::Matrix2cd::Identity();
    Eigen::MatrixXcd next(out.rows() * 2, out.cols() * 2);
    for (int r = 0; r < out.rows(); ++r) {
      for (int c = 0; c < out.cols(); ++c) next.block<2, 2>(2 * r, 2 * c) = out(r, c) * m;
    }
    out = std::move(next);
  }
  return out;
}

Eigen::MatrixXd dense_ss(int n, int i, int j) {
  Eigen::Matrix2cd sx, sy, sz;
  sx << 0, 0.5, 0.5, 0;
  sy << 0, Cd(0, -0.5), Cd(0, 0.5), 0;
  sz << 0.5, 0, 0, -0.5;
  Eigen::MatrixXcd m = kron_pair(n, i, sx, j, sx) + kron_pair(n, i, sy, j, sy) + kron_pair(n, i, sz, j, sz);
  return m.real();
}

// One S.S acting on a sparse vector keyed by config.
using Sparse = std::map<std::uint32_t, double>;

Sparse ss(const Sparse& v, int i, int j) {
  Sparse out;
  for (const auto& [c, a] : v) {
    const int bi = (c >> i) & 1, bj = (c >> j) & 1;
    if (bi == bj) {
      out[c] += 0.25 * a;
    } else {
      out[c] -= 0.25 * a;
      out[c ^ ((1u << i) | (1u << j))] += 0.5 * a;
    }
  }
  return out;
}

Sparse projector(const Sparse& v, const std::array<int, 3>& t) {
  Sparse out;
  for (const auto& [c, a] : v) out[c] += 1.5 * a;
  for (const auto& p : {Pair{t[0], t[1]}, Pair{t[0], t[2]}, Pair{t[1], t[2]}}) {
    for (const auto& [c, a] : ss(v, p.i, p.j)) out[c] += 2.0 * a;
  }
  return out;
}

}  // namespace

SquareModel square_torus(int l) {
  SquareModel m;
  m.l = l;
  for (int y = 0; y < l; ++y) {
    for (int x = 0; x < l; ++x) {
      const int s = idx(l, x, y);
      m.nn.push_back({s, idx(l, x + 1, y)});
      m.nn.push_back({s, idx(l, x, y + 1)});
      m.nnn.push_back({s, idx(l, x + 1, y + 1)});
      m.nnn.push_back({s, idx(l, x + 1, y - 1)});
      // 3 wide, 2 tall and 2 wide, 3 tall rectangles with corner (x, y).
      for (const auto [w, h] : {std::pair{3, 2}, std::pair{2, 3}}) {
        std::array<int, 3> a{}, b{};
        int na = 0, nb = 0;
        for (int dy = 0; dy < h; ++dy) {
          for (int dx = 0; dx < w; ++dx) {
            const int site = idx(l, x + dx, y + dy);
            if ((x + dx + y + dy) % 2 == 0) {
              a[na++] = site;
            } else {
              b[nb++] = site;
            }
          }
        }
        m.plaquettes.push_back({a, b});
      }
    }
  }
  return m;
}

Eigen::MatrixXd dense_exchange(int n_sites, int i, int j) { return dense_ss(n_sites, i, j); }

Eigen::MatrixXd dense_hamiltonian(int n, const std::vector<Pair>& nn, double j1, const std::vector<Pair>& nnn,
                                  double j2, const std::vector<Plaq>& plaquettes, double jp) {
  if (n > 12) throw std::invalid_argument("dense oracle limited to 12 sites");
  const int dim = 1 << n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& p : nn) h += j1 * dense_ss(n, p.i, p.j);
  for (const auto& p : nnn) h += j2 * dense_ss(n, p.i, p.j);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(dim, dim);
  for (const auto& q : plaquettes) {
    Eigen::MatrixXd pa = 1.5 * id, pb = 1.5 * id;
    pa += 2.0 * (dense_ss(n, q.a[0], q.a[1]) + dense_ss(n, q.a[0], q.a[2]) + dense_ss(n, q.a[1], q.a[2]));
    pb += 2.0 * (dense_ss(n, q.b[0], q.b[1]) + dense_ss(n, q.b[0], q.b[2]) + dense_ss(n, q.b[1], q.b[2]));
    h += 0.25 * jp * pa * pb;
  }
  return h;
}

SparseSector sparse_hamiltonian(int n, int n_up, const std::vector<Pair>& nn, double j1, const std::vector<Pair>& nnn,
                                double j2, const std::vector<Plaq>& plaquettes, double jp) {
  SparseSector out;
  for (std::uint32_t c = 0; c < (1u << n); ++c) {
    if (__builtin_popcount(c) == n_up) out.configs.push_back(c);
  }
  const auto dim = static_cast<int>(out.configs.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < dim; ++col) {
    const Sparse v{{out.configs[col], 1.0}};
    Sparse hv;
    for (const auto& p : nn) {
      for (const auto& [c, a] : ss(v, p.i, p.j)) hv[c] += j1 * a;
    }
    for (const auto& p : nnn) {
      for (const auto& [c, a] : ss(v, p.i, p.j)) hv[c] += j2 * a;
    }
    if (jp != 0.0) {
      for (const auto& q : plaquettes) {
        for (const auto& [c, a] : projector(projector(v, q.b), q.a)) hv[c] += 0.25 * jp * a;
      }
    }
    for (const auto& [c, a] : hv) {
      if (a == 0.0) continue;
      const auto it = std::lower_bound(out.configs.begin(), out.configs.end(), c);
      trip.emplace_back(static_cast<int>(it - out.configs.begin()), col, a);
    }
  }
  out.h.resize(dim, dim);
  out.h.setFromTriplets(trip.begin(), trip.end());
  return out;
}

std::vector<double> block_krylov_lowest(const Eigen::SparseMatrix<double>& h, int count, int block, int steps,
                                        unsigned seed) {
  const Eigen::Index n = h.rows();
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  const Eigen::Index cols = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(block) * (steps + 1));
  Eigen::MatrixXd q(n, cols);
  Eigen::Index filled = 0;
  auto add = [&](Eigen::VectorXd v) {
    for (int pass = 0; pass < 2; ++pass) {
      if (filled > 0) v -= q.leftCols(filled) * (q.leftCols(filled).transpose() * v);
    }
    const double nv = v.norm();
    if (nv < 1e-10 || filled == cols) return;
    q.col(filled++) = v / nv;
  };
  for (int b = 0; b < block; ++b) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
    add(v);
  }
  Eigen::Index start = 0;
  while (filled < cols) {
    const Eigen::Index end = filled;
    if (start == end) break;
    for (Eigen::Index c = start; c < end && filled < cols; ++c) add(h * q.col(c));
    start = end;
  }
  const Eigen::MatrixXd basis = q.leftCols(filled);
  const Eigen::MatrixXd t = basis.transpose() * (h * basis);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (t + t.transpose()));
  std::vector<double> out;
  for (int i = 0; i < count && i < solver.eigenvalues().size(); ++i) out.push_back(solver.eigenvalues()[i]);
  return out;
}

}  // namespace oracle

namespace oracle {

double projector_expectation(const std::vector<std::uint32_t>& configs, const Eigen::VectorXcd& psi,
                             const std::array<int, 3>& triple) {
  std::complex<double> acc = 0.0;
  for (std::size_t col = 0; col < configs.size(); ++col) {
    const auto a = psi[static_cast<Eigen::Index>(col)];
    if (a == 0.0) continue;
    for (const auto& [c, w] : projector(Sparse{{configs[col], 1.0}}, triple)) {
      const auto it = std::lower_bound(configs.begin(), configs.end(), c);
      acc += std::conj(psi[it - configs.begin()]) * w * a;
    }
  }
  return acc.real();
}

}  // namespace oracle

namespace oracle {

Eigen::VectorXcd apply_exchange(const std::vector<std::uint32_t>& configs, const Eigen::VectorXcd& psi, int i,
                                int j) {
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  for (std::size_t col = 0; col < configs.size(); ++col) {
    const auto a = psi[static_cast<Eigen::Index>(col)];
    if (a == 0.0) continue;
    for (const auto& [c, w] : ss(Sparse{{configs[col], 1.0}}, i, j)) {
      const auto it = std::lower_bound(configs.begin(), configs.end(), c);
      out[it - configs.begin()] += w * a;
    }
  }
  return out;
}

}  // namespace oracle
