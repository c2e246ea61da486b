#include "plaqed/vbs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace plaqed {

namespace {

bool even(int v) { return v % 2 == 0; }

// Axial distance-2 dimer patterns of the 4x4 cluster that satisfy every
// plaquette. Coordinates are (x, y) pairs; the second pattern is the first
// translated by (1, 0).
struct AxialDimer {
  Vec2 a, b;
};
const std::vector<std::vector<AxialDimer>>& winding_data_16() {
  static const std::vector<std::vector<AxialDimer>> data = {
      {{{0, 0}, {2, 0}}, {{0, 1}, {0, 3}}, {{1, 0}, {1, 2}}, {{1, 1}, {3, 1}},
       {{0, 2}, {2, 2}}, {{2, 1}, {2, 3}}, {{3, 0}, {3, 2}}, {{1, 3}, {3, 3}}},
      {{{1, 0}, {3, 0}}, {{1, 1}, {1, 3}}, {{2, 0}, {2, 2}}, {{2, 1}, {0, 1}},
       {{1, 2}, {3, 2}}, {{3, 1}, {3, 3}}, {{0, 0}, {0, 2}}, {{2, 3}, {0, 3}}},
  };
  return data;
}

}  // namespace

SitePair singlet_order(const Cluster& cluster, SitePair pair) {
  const auto sa = cluster.sublattice(pair.first);
  const auto sb = cluster.sublattice(pair.second);
  if (sa != sb) return sa == Sublattice::A ? pair : SitePair{pair.second, pair.first};
  return unordered(pair);
}

DimerClass classify_dimer(const Cluster& cluster, SitePair pair) {
  const Vec2 d = cluster.minimal_image(cluster.coords(pair.second) - cluster.coords(pair.first));
  const int ax = std::abs(d.x), ay = std::abs(d.y);
  if (ax + ay == 1) return DimerClass::nearest;
  if (ax == 1 && ay == 1) return DimerClass::diagonal;
  if ((ax == 2 && ay == 0) || (ax == 0 && ay == 2)) return DimerClass::axial;
  return DimerClass::other;
}

DimerPattern make_pattern(const Cluster& cluster, std::span<const SitePair> pairs, Vec2 offset) {
  const int n = cluster.n_sites();
  std::vector<int> seen(n, 0);
  DimerPattern p;
  p.offset = offset;
  for (const auto& pair : pairs) {
    if (pair.first < 0 || pair.first >= n || pair.second < 0 || pair.second >= n || pair.first == pair.second) {
      throw std::invalid_argument("dimer site out of range");
    }
    ++seen[pair.first];
    ++seen[pair.second];
    p.dimers.push_back(singlet_order(cluster, pair));
    p.bond_class.push_back(classify_dimer(cluster, pair));
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw std::invalid_argument("dimers do not form a perfect matching");
  }
  return p;
}

DimerPattern ss_pattern(const Cluster& cluster, Vec2 offset) {
  if (offset.x < 0 || offset.x > 1 || offset.y < 0 || offset.y > 1) {
    throw std::invalid_argument("SS offset must lie in {0,1}^2");
  }
  const auto [t1, t2] = cluster.spanning_vectors();
  if (!even(t1.x) || !even(t1.y) || !even(t2.x) || !even(t2.y)) {
    throw std::invalid_argument("cluster incompatible with the period-2 dimer pattern");
  }
  std::vector<SitePair> pairs;
  for (int s = 0; s < cluster.n_sites(); ++s) {
    const Vec2 r = cluster.coords(s);
    const int u = r.x - offset.x, v = r.y - offset.y;
    if (even(u) && even(v)) {
      pairs.push_back({s, cluster.site_at(r + Vec2{1, 1})});
    } else if (!even(u) && !even(v)) {
      pairs.push_back({cluster.site_at(r + Vec2{1, 0}), cluster.site_at(r + Vec2{0, 1})});
    }
  }
  return make_pattern(cluster, pairs, offset);
}

std::vector<DimerPattern> winding_patterns_16(const Cluster& cluster) {
  if (cluster.n_sites() != 16 || !cluster.is_lattice_vector({4, 0}) || !cluster.is_lattice_vector({0, 4})) {
    throw std::invalid_argument("winding patterns exist only on the 4x4 cluster");
  }
  std::vector<DimerPattern> out;
  int label = 0;
  for (const auto& dimers : winding_data_16()) {
    std::vector<SitePair> pairs;
    for (const auto& d : dimers) pairs.push_back({cluster.site_at(d.a), cluster.site_at(d.b)});
    out.push_back(make_pattern(cluster, pairs, {label++, 0}));
  }
  return out;
}

VbsState build_product_state(const Cluster& cluster, const DimerPattern& pattern, const SectorBasis& plain_sz0) {
  const int n = cluster.n_sites();
  if (plain_sz0.is_momentum_sector() || plain_sz0.n_sites() != n || 2 * plain_sz0.n_up() != n) {
    throw std::invalid_argument("product states live in the plain Sz=0 basis of the cluster");
  }
  if (static_cast<int>(pattern.dimers.size()) * 2 != n) throw std::invalid_argument("pattern is not a perfect matching");
  const int n_dimers = n / 2;
  const double magnitude = std::pow(2.0, -0.25 * n);
  VbsState state;
  state.pattern = pattern;
  state.sign_convention = pattern.dimers;
  state.amplitudes = StateVector::Zero(static_cast<Eigen::Index>(plain_sz0.dimension()));
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n_dimers); ++mask) {
    Config c = 0;
    for (int d = 0; d < n_dimers; ++d) {
      const auto& pair = pattern.dimers[d];
      c |= Config{1} << (((mask >> d) & 1U) ? pair.second : pair.first);
    }
    const double sign = (__builtin_popcountll(mask) % 2 == 0) ? 1.0 : -1.0;
    state.amplitudes[static_cast<Eigen::Index>(plain_sz0.lookup(c)->index)] = sign * magnitude;
  }
  return state;
}

VbsState build_ss_state(const Cluster& cluster, Vec2 offset, const SectorBasis& plain_sz0) {
  return build_product_state(cluster, ss_pattern(cluster, offset), plain_sz0);
}

std::vector<VbsState> build_ss_states(const Cluster& cluster, const SectorBasis& plain_sz0) {
  std::vector<VbsState> out;
  for (Vec2 offset : {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}, Vec2{1, 1}}) {
    out.push_back(build_ss_state(cluster, offset, plain_sz0));
  }
  return out;
}

Eigen::MatrixXd gram_matrix(std::span<const VbsState> states) {
  const auto n = static_cast<Eigen::Index>(states.size());
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) g(a, b) = states[a].amplitudes.dot(states[b].amplitudes).real();
  }
  return g;
}

int numerical_rank(const Eigen::MatrixXd& gram, double cutoff) {
  if (gram.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  const double top = solver.eigenvalues().cwiseAbs().maxCoeff();
  return static_cast<int>((solver.eigenvalues().array() > cutoff * top).count());
}

namespace {

// Orthonormal basis for the span of the columns.
Eigen::MatrixXcd orthonormal_span(const Eigen::MatrixXcd& columns, double cutoff = 1e-10) {
  const Eigen::MatrixXcd gram = columns.adjoint() * columns;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
  const double top = solver.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    if (solver.eigenvalues()[i] > cutoff * top) keep.push_back(i);
  }
  Eigen::MatrixXcd out(columns.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) =
        columns * solver.eigenvectors().col(keep[c]) / std::sqrt(solver.eigenvalues()[keep[c]]);
  }
  return out;
}

}  // namespace

GroundSpaceOverlap ground_space_overlap(std::span<const StateVector> ground, std::span<const VbsState> states) {
  if (ground.empty() || states.empty()) throw std::invalid_argument("ground_space_overlap needs vectors on both sides");
  const Eigen::Index rows = ground.front().size();
  Eigen::MatrixXcd g(rows, static_cast<Eigen::Index>(ground.size()));
  for (std::size_t i = 0; i < ground.size(); ++i) {
    if (ground[i].size() != rows) throw std::invalid_argument("ground vectors differ in dimension");
    g.col(static_cast<Eigen::Index>(i)) = ground[i];
  }
  Eigen::MatrixXcd w(rows, static_cast<Eigen::Index>(states.size()));
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].amplitudes.size() != rows) throw std::invalid_argument("VBS state dimension mismatch");
    w.col(static_cast<Eigen::Index>(i)) = states[i].amplitudes;
  }
  const Eigen::MatrixXcd gq = orthonormal_span(g);
  const Eigen::MatrixXcd wq = orthonormal_span(w);
  GroundSpaceOverlap out;
  out.ground_dimension = static_cast<int>(gq.cols());
  out.vbs_rank = static_cast<int>(wq.cols());
  out.dimension_mismatch = out.ground_dimension != out.vbs_rank;
  out.overlap = (wq.adjoint() * gq).squaredNorm() / static_cast<double>(gq.cols());
  return out;
}

std::string pattern_diagram(const Cluster& cluster, const DimerPattern& pattern) {
  int w = 2;
  while (w * w < cluster.n_sites()) w += 2;
  auto linked = [&](Vec2 a, Vec2 b) {
    const SitePair p = unordered({cluster.site_at(a), cluster.site_at(b)});
    for (const auto& d : pattern.dimers) {
      if (unordered(d) == p) return true;
    }
    return false;
  };
  std::ostringstream out;
  for (int y = w - 1; y >= 0; --y) {
    for (int x = 0; x < w; ++x) {
      char buf[8];
      std::snprintf(buf, sizeof(buf), "%3d", cluster.site_at({x, y}));
      out << buf;
      if (x + 1 < w) out << (linked({x, y}, {x + 1, y}) ? " - " : "   ");
    }
    out << "\n";
    if (y == 0) break;
    for (int x = 0; x < w; ++x) {
      out << (linked({x, y - 1}, {x, y}) ? "  |" : "   ");
      if (x + 1 < w) {
        const bool up = linked({x, y - 1}, {x + 1, y});
        const bool down = linked({x + 1, y - 1}, {x, y});
        out << (up && down ? " X " : up ? " / " : down ? " \\ " : "   ");
      }
    }
    out << "\n";
  }
  out << "dimers:";
  for (std::size_t i = 0; i < pattern.dimers.size(); ++i) {
    const auto& d = pattern.dimers[i];
    const char* cls = "?";
    switch (pattern.bond_class[i]) {
      case DimerClass::nearest: cls = "n"; break;
      case DimerClass::diagonal: cls = "d"; break;
      case DimerClass::axial: cls = "a"; break;
      case DimerClass::other: cls = "o"; break;
    }
    out << " " << d.first << "-" << d.second << cls;
  }
  out << "\n";
  return out.str();
}

}  // namespace plaqed
