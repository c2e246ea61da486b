#include "plaqed/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "plaqed/parallel.hpp"

namespace plaqed {

namespace {

constexpr double kDropThreshold = 1e-15;

void require_plain(const SectorBasis& basis, const char* what) {
  if (basis.is_momentum_sector()) {
    throw std::invalid_argument(std::string(what) + " needs the plain Sz basis");
  }
}

void require_size(const SectorBasis& basis, const StateVector& v) {
  if (static_cast<std::size_t>(v.size()) != basis.dimension()) {
    throw std::invalid_argument("state dimension does not match basis");
  }
}

Eigen::Index index_of(const SectorBasis& basis, Config c) {
  return static_cast<Eigen::Index>(basis.lookup(c)->index);
}

// out += coefficient * S_i.S_j v (plain basis)
void add_exchange(SitePair pair, double coefficient, const SectorBasis& basis, const StateVector& v,
                  StateVector& out) {
  for (std::size_t idx = 0; idx < basis.dimension(); ++idx) {
    const Complex amp = v[static_cast<Eigen::Index>(idx)];
    if (amp == Complex{}) continue;
    const Config c = basis.representative(idx);
    if (((c >> pair.first) ^ (c >> pair.second)) & 1U) {
      out[static_cast<Eigen::Index>(idx)] -= 0.25 * coefficient * amp;
      out[index_of(basis, swap_sites(c, pair.first, pair.second))] += 0.5 * coefficient * amp;
    } else {
      out[static_cast<Eigen::Index>(idx)] += 0.25 * coefficient * amp;
    }
  }
}

}  // namespace

void ModelParams::validate() const {
  if (!(j > 0.0)) throw std::invalid_argument("J must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("delta must lie in [0, 1]");
}

std::array<SitePair, 3> triple_transpositions(const std::array<int, 3>& t) {
  return {SitePair{t[0], t[1]}, SitePair{t[0], t[2]}, SitePair{t[1], t[2]}};
}

HamiltonianOperator::HamiltonianOperator(int n_sites, std::vector<BondTerm> bonds,
                                         std::vector<PlaquetteTerm> plaquettes)
    : n_sites_(n_sites), bonds_(std::move(bonds)), plaquettes_(std::move(plaquettes)) {
  if (n_sites <= 0 || n_sites > 64) throw std::invalid_argument("n_sites must be in [1, 64]");
  auto check = [n_sites](SitePair p) {
    if (p.first < 0 || p.second < 0 || p.first >= n_sites || p.second >= n_sites || p.first == p.second) {
      throw std::invalid_argument("term site out of range");
    }
  };
  for (const auto& b : bonds_) check(b.pair);
  for (const auto& p : plaquettes_) {
    for (const auto& t : p.a_transpositions) check(t);
    for (const auto& t : p.b_transpositions) check(t);
  }
}

HamiltonianOperator build_operator(const Cluster& cluster, const ModelParams& params) {
  params.validate();
  std::vector<BondTerm> bonds;
  std::vector<PlaquetteTerm> plaquettes;
  const double c1 = params.nearest_coefficient();
  const double c2 = params.diagonal_coefficient();
  const double c0 = params.plaquette_coefficient();
  if (std::abs(c1) >= kDropThreshold) {
    for (const auto& b : cluster.bonds1()) bonds.push_back({b.pair(), c1});
  }
  if (std::abs(c2) >= kDropThreshold) {
    for (const auto& b : cluster.bonds2()) bonds.push_back({b.pair(), c2});
  }
  if (std::abs(c0) >= kDropThreshold) {
    for (const auto& p : cluster.plaquettes()) {
      plaquettes.push_back({triple_transpositions(p.a_triple), triple_transpositions(p.b_triple), c0});
    }
  }
  return HamiltonianOperator(cluster.n_sites(), std::move(bonds), std::move(plaquettes));
}

StateVector apply(const HamiltonianOperator& op, const SectorBasis& basis, const StateVector& v, int workers) {
  require_size(basis, v);
  if (op.n_sites() != basis.n_sites()) throw std::invalid_argument("operator and basis differ in N");
  StateVector out(v.size());
  parallel_for(basis.dimension(), workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double norm_i = basis.norm(i);
      Complex acc{};
      // (Hv)_i = sum_j conj(H_ji) v_j, with H_ji collected from H|r_i>.
      op.for_each_element(basis.representative(i), [&](Config c, double h) {
        if (const auto rep = basis.lookup(c)) {
          acc += h * std::conj(rep->phase) * (basis.norm(rep->index) / norm_i) *
                 v[static_cast<Eigen::Index>(rep->index)];
        }
      });
      out[static_cast<Eigen::Index>(i)] = acc;
    }
  });
  return out;
}

SectorMatrix SectorMatrix::build(const HamiltonianOperator& op, const SectorBasis& basis, int workers) {
  if (op.n_sites() != basis.n_sites()) throw std::invalid_argument("operator and basis differ in N");
  const std::size_t dim = basis.dimension();
  if (dim > std::numeric_limits<std::uint32_t>::max()) throw std::length_error("sector too large to cache");

  std::vector<std::vector<std::pair<std::uint32_t, Complex>>> rows(dim);
  parallel_for(dim, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<std::pair<std::uint32_t, Complex>> row;
    for (std::size_t i = begin; i < end; ++i) {
      row.clear();
      const double norm_i = basis.norm(i);
      op.for_each_element(basis.representative(i), [&](Config c, double h) {
        if (const auto rep = basis.lookup(c)) {
          row.emplace_back(static_cast<std::uint32_t>(rep->index),
                           h * std::conj(rep->phase) * (basis.norm(rep->index) / norm_i));
        }
      });
      std::sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      auto& merged = rows[i];
      for (const auto& [col, val] : row) {
        if (!merged.empty() && merged.back().first == col) {
          merged.back().second += val;
        } else {
          merged.emplace_back(col, val);
        }
      }
      std::erase_if(merged, [](const auto& e) { return std::abs(e.second) < 1e-14; });
      merged.shrink_to_fit();
    }
  });

  SectorMatrix m;
  m.row_start_.resize(dim + 1, 0);
  for (std::size_t i = 0; i < dim; ++i) m.row_start_[i + 1] = m.row_start_[i] + rows[i].size();
  m.columns_.reserve(m.row_start_.back());
  m.values_.reserve(m.row_start_.back());
  for (auto& row : rows) {
    for (const auto& [col, val] : row) {
      m.columns_.push_back(col);
      m.values_.push_back(val);
    }
    std::vector<std::pair<std::uint32_t, Complex>>().swap(row);
  }
  return m;
}

void SectorMatrix::apply(const StateVector& in, StateVector& out) const {
  const std::size_t dim = dimension();
  if (static_cast<std::size_t>(in.size()) != dim) throw std::invalid_argument("dimension mismatch in SectorMatrix");
  out.resize(in.size());
  for (std::size_t i = 0; i < dim; ++i) {
    Complex acc{};
    for (std::size_t e = row_start_[i]; e < row_start_[i + 1]; ++e) acc += values_[e] * in[columns_[e]];
    out[static_cast<Eigen::Index>(i)] = acc;
  }
}

StateVector apply_projector(const std::array<int, 3>& triple, const SectorBasis& basis, const StateVector& v) {
  require_plain(basis, "apply_projector");
  require_size(basis, v);
  StateVector out = StateVector::Zero(v.size());
  for (std::size_t idx = 0; idx < basis.dimension(); ++idx) {
    const Complex amp = v[static_cast<Eigen::Index>(idx)];
    if (amp == Complex{}) continue;
    const Config c = basis.representative(idx);
    for (const auto& t : triple_transpositions(triple)) {
      out[index_of(basis, swap_sites(c, t.first, t.second))] += amp;
    }
  }
  return out;
}

StateVector apply_projector_exchange_form(const std::array<int, 3>& triple, const SectorBasis& basis,
                                          const StateVector& v) {
  require_plain(basis, "apply_projector_exchange_form");
  require_size(basis, v);
  StateVector out = 1.5 * v;
  for (const auto& t : triple_transpositions(triple)) add_exchange(t, 2.0, basis, v, out);
  return out;
}

StateVector apply_plaquette_exchange_form(const Plaquette& plaquette, double coefficient, const SectorBasis& basis,
                                          const StateVector& v) {
  const StateVector pb = apply_projector_exchange_form(plaquette.b_triple, basis, v);
  return 0.25 * coefficient * apply_projector_exchange_form(plaquette.a_triple, basis, pb);
}

StateVector apply_bonds(std::span<const BondTerm> bonds, const SectorBasis& basis, const StateVector& v) {
  require_plain(basis, "apply_bonds");
  require_size(basis, v);
  StateVector out = StateVector::Zero(v.size());
  for (const auto& b : bonds) add_exchange(b.pair, b.coefficient, basis, v, out);
  return out;
}

StateVector apply_spin_squared(std::span<const int> sites, const SectorBasis& basis, const StateVector& v) {
  require_plain(basis, "apply_spin_squared");
  require_size(basis, v);
  StateVector out = (0.75 * static_cast<double>(sites.size())) * v;
  for (std::size_t a = 0; a < sites.size(); ++a) {
    for (std::size_t b = a + 1; b < sites.size(); ++b) add_exchange({sites[a], sites[b]}, 2.0, basis, v, out);
  }
  return out;
}

std::vector<double> plaquette_expectation(const Cluster& cluster, TripleKind kind, const SectorBasis& basis,
                                          const StateVector& state) {
  require_size(basis, state);
  if (std::abs(state.norm() - 1.0) > 1e-8) throw std::invalid_argument("plaquette_expectation needs a normalized state");
  const StateVector psi = basis.expand(state);
  const SectorBasis plain = basis.is_momentum_sector() ? SectorBasis::sz_basis(basis.n_sites(), basis.sz()) : basis;
  std::vector<double> values;
  values.reserve(cluster.plaquettes().size());
  for (const auto& p : cluster.plaquettes()) {
    const auto& triple = kind == TripleKind::A ? p.a_triple : p.b_triple;
    values.push_back(psi.dot(apply_projector(triple, plain, psi)).real());
  }
  return values;
}

}  // namespace plaqed
