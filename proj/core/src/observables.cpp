#include "plaqed/observables.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

#include <Eigen/Dense>

#include "plaqed/vbs.hpp"

namespace plaqed {

namespace {

struct PlainState {
  SectorBasis basis;
  StateVector psi;
};

PlainState to_plain(const SectorBasis& basis, const StateVector& state) {
  if (static_cast<std::size_t>(state.size()) != basis.dimension()) {
    throw std::invalid_argument("state does not match the basis dimension");
  }
  if (std::abs(state.norm() - 1.0) > 1e-8) throw std::invalid_argument("state is not normalized");
  if (!basis.is_momentum_sector()) return {basis, state};
  return {SectorBasis::sz_basis(basis.n_sites(), basis.sz()), basis.expand(state)};
}

// (S_i.S_j) psi in the plain basis.
StateVector apply_exchange(const SectorBasis& plain, const StateVector& psi, int i, int j) {
  StateVector out(psi.size());
  for (std::size_t n = 0; n < plain.dimension(); ++n) {
    const Config c = plain.representative(n);
    const auto idx = static_cast<Eigen::Index>(n);
    if (((c >> i) ^ (c >> j)) & 1U) {
      const auto partner = plain.lookup(swap_sites(c, i, j));
      out[idx] = -0.25 * psi[idx] + 0.5 * psi[static_cast<Eigen::Index>(partner->index)];
    } else {
      out[idx] = 0.25 * psi[idx];
    }
  }
  return out;
}

// Midpoint separation on the torus, in half lattice units.
double midpoint_distance(const Cluster& cluster, Vec2 doubled) {
  const auto [t1, t2] = cluster.spanning_vectors();
  double best = std::numeric_limits<double>::infinity();
  for (int a = -2; a <= 2; ++a) {
    for (int b = -2; b <= 2; ++b) {
      const Vec2 d = doubled - 2 * (a * t1 + b * t2);
      best = std::min(best, std::hypot(d.x, d.y));
    }
  }
  return 0.5 * best;
}

}  // namespace

Eigen::MatrixXd spin_correlations(const SectorBasis& basis, const StateVector& state) {
  const auto [plain, psi] = to_plain(basis, state);
  const int n = plain.n_sites();
  Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k < plain.dimension(); ++k) {
    const Config c = plain.representative(k);
    const Complex a = psi[static_cast<Eigen::Index>(k)];
    const double w = std::norm(a);
    if (w == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (((c >> i) ^ (c >> j)) & 1U) {
          const auto partner = plain.lookup(swap_sites(c, i, j));
          corr(i, j) += -0.25 * w + 0.5 * (std::conj(psi[static_cast<Eigen::Index>(partner->index)]) * a).real();
        } else {
          corr(i, j) += 0.25 * w;
        }
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    corr(i, i) = 0.75;
    for (int j = i + 1; j < n; ++j) corr(j, i) = corr(i, j);
  }
  return corr;
}

double structure_factor(const Cluster& cluster, const Eigen::MatrixXd& correlations, const Momentum& q) {
  const int n = cluster.n_sites();
  if (!cluster.is_allowed(q)) throw std::invalid_argument("momentum " + q.to_string() + " not allowed on cluster");
  if (correlations.rows() != n || correlations.cols() != n) throw std::invalid_argument("correlation matrix size");
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      sum += correlations(i, j) * std::cos(q.dot(cluster.coords(j) - cluster.coords(i)));
    }
  }
  return sum / (static_cast<double>(n) * (n + 2));
}

double structure_factor(const Cluster& cluster, const SectorBasis& basis, const StateVector& state,
                        const Momentum& q) {
  if (!cluster.is_allowed(q)) throw std::invalid_argument("momentum " + q.to_string() + " not allowed on cluster");
  return structure_factor(cluster, spin_correlations(basis, state), q);
}

StructureFactorReport structure_factor_report(const Cluster& cluster, const SectorBasis& basis,
                                              const StateVector& state, std::span<const Momentum> qs, int level) {
  for (const auto& q : qs) {
    if (!cluster.is_allowed(q)) throw std::invalid_argument("momentum " + q.to_string() + " not allowed on cluster");
  }
  const Eigen::MatrixXd corr = spin_correlations(basis, state);
  StructureFactorReport report;
  report.sector = SectorLabel{basis.sz(), basis.momentum()}.to_string();
  report.level = level;
  for (const auto& q : qs) report.values.emplace_back(q, structure_factor(cluster, corr, q));
  return report;
}

DimerCorrelationReport dimer_correlations(const Cluster& cluster, const SectorBasis& basis, const StateVector& state,
                                          BondClass bond_class) {
  const auto [plain, psi] = to_plain(basis, state);
  const bool second = bond_class == BondClass::second_neighbor;
  const auto& table = second ? cluster.bonds2() : cluster.bonds1();

  DimerCorrelationReport report;
  report.r1 = second ? Vec2{1, 1} : Vec2{1, 0};
  report.reference = {0, cluster.site_at(report.r1)};

  const StateVector a_psi = apply_exchange(plain, psi, report.reference.first, report.reference.second);
  const double a_mean = psi.dot(a_psi).real();

  std::set<SitePair> ordered;
  if (second) {
    for (const auto& d : ss_pattern(cluster, {0, 0}).dimers) ordered.insert(unordered(d));
  }

  double best = -1.0;
  for (const auto& bond : table) {
    DimerCorrelationEntry e;
    e.bond = {bond.first, bond.second};
    e.r = cluster.minimal_image(cluster.coords(bond.first));
    e.r2 = bond.displacement;
    const StateVector b_psi = apply_exchange(plain, psi, bond.first, bond.second);
    const Complex ab = a_psi.dot(b_psi);
    report.max_imaginary = std::max(report.max_imaginary, std::abs(ab.imag()));
    e.value = ab.real() - a_mean * psi.dot(b_psi).real();
    e.midpoint_distance = midpoint_distance(cluster, 2 * cluster.coords(bond.first) + bond.displacement - report.r1);
    e.overlaps_reference = bond.first == report.reference.first || bond.first == report.reference.second ||
                           bond.second == report.reference.first || bond.second == report.reference.second;

    const bool candidate = !e.overlaps_reference &&
                           (second ? ordered.contains(unordered(e.bond)) : bond.displacement == report.r1);
    if (candidate) {
      const bool better =
          e.midpoint_distance > best + 1e-12 ||
          (std::abs(e.midpoint_distance - best) <= 1e-12 &&
           std::tie(e.r, e.r2) < std::tie(report.entries[*report.farthest].r, report.entries[*report.farthest].r2));
      if (better) {
        best = e.midpoint_distance;
        report.farthest = report.entries.size();
      }
    }
    report.entries.push_back(e);
  }
  if (report.farthest) report.farthest_value = report.entries[*report.farthest].value;
  return report;
}

FssFit fss_extrapolate(std::span<const std::pair<int, double>> points) {
  if (points.size() < 2) throw std::invalid_argument("finite-size scaling needs at least two sizes");
  std::set<int> sizes;
  for (const auto& [n, m2] : points) {
    if (n <= 0) throw std::invalid_argument("cluster size must be positive");
    if (!sizes.insert(n).second) throw std::invalid_argument("duplicate cluster size in finite-size scaling");
  }
  const auto rows = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd x(rows, 2);
  Eigen::VectorXd y(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = 1.0 / std::sqrt(static_cast<double>(points[i].first));
    y[i] = points[i].second;
  }
  const Eigen::Vector2d coef = x.colPivHouseholderQr().solve(y);
  FssFit fit;
  fit.points.assign(points.begin(), points.end());
  fit.m0_squared = 8.0 * coef[0];
  fit.constant = coef[1];
  return fit;
}

std::vector<EnergyDifference> energy_differences(std::span<const SpectrumResult> sz0,
                                                 std::span<const SpectrumResult> sz1, double match_tol) {
  std::vector<EnergyDifference> rows;
  double e0 = std::numeric_limits<double>::infinity();
  for (const auto& s : sz0) {
    for (double e : s.eigenvalues) e0 = std::min(e0, e);
  }
  for (const auto& s : sz0) {
    const SpectrumResult* partner = nullptr;
    for (const auto& t : sz1) {
      if (t.sector.momentum == s.sector.momentum) partner = &t;
    }
    for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
      EnergyDifference row;
      row.sector = s.sector.to_string();
      row.level = static_cast<int>(i);
      row.energy = s.eigenvalues[i];
      row.difference = row.energy - e0;
      if (sz1.empty()) {
        row.spin = "unknown";
      } else {
        bool matched = false;
        if (partner) {
          for (double e : partner->eigenvalues) matched |= std::abs(e - row.energy) <= match_tol * std::max(1.0, std::abs(e));
        }
        // Above the highest computed Sz=1 level a missing match says nothing.
        const bool covered = partner && !partner->eigenvalues.empty() && row.energy <= partner->eigenvalues.back() + match_tol;
        row.spin = matched ? "triplet+" : covered ? "singlet" : "unknown";
      }
      rows.push_back(row);
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const EnergyDifference& a, const EnergyDifference& b) { return a.energy < b.energy; });
  return rows;
}

}  // namespace plaqed
