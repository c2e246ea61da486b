#pragma once

#include <array>
#include <span>
#include <vector>

#include "plaqed/hilbert.hpp"
#include "plaqed/lattice.hpp"

namespace plaqed {

/// H = J(1-gamma)(1-delta) sum_<ij> S_i.S_j + J gamma(1-delta) sum_<<ij>> S_i.S_j
///     + J delta sum_plaquettes (1/4) P^A P^B
struct ModelParams {
  double j = 1.0;
  double gamma = 0.0;
  double delta = 0.0;

  /// Throws std::invalid_argument unless j > 0 and gamma, delta lie in [0, 1].
  void validate() const;
  double nearest_coefficient() const { return j * (1.0 - gamma) * (1.0 - delta); }
  double diagonal_coefficient() const { return j * gamma * (1.0 - delta); }
  /// Coefficient multiplying P^A P^B for one plaquette (J delta / 4).
  double plaquette_coefficient() const { return 0.25 * j * delta; }
};

/// coefficient * S_i.S_j
struct BondTerm {
  SitePair pair;
  double coefficient = 0.0;
};

/// coefficient * (T_a1 + T_a2 + T_a3)(T_b1 + T_b2 + T_b3), where T swaps two
/// spins. Each bracket equals the quartet projector |S_i+S_j+S_k|^2 - 3/4 of
/// one sublattice triple.
struct PlaquetteTerm {
  std::array<SitePair, 3> a_transpositions{};
  std::array<SitePair, 3> b_transpositions{};
  double coefficient = 0.0;
};

std::array<SitePair, 3> triple_transpositions(const std::array<int, 3>& triple);

/// Immutable collection of Heisenberg bond terms and plaquette terms.
class HamiltonianOperator {
 public:
  HamiltonianOperator(int n_sites, std::vector<BondTerm> bonds, std::vector<PlaquetteTerm> plaquettes);

  int n_sites() const { return n_sites_; }
  const std::vector<BondTerm>& bonds() const { return bonds_; }
  const std::vector<PlaquetteTerm>& plaquettes() const { return plaquettes_; }

  /// Calls emit(config, amplitude) for every contribution to H|c>. The
  /// diagonal element is emitted once, off-diagonal contributions are not
  /// merged.
  template <class Emit>
  void for_each_element(Config c, Emit&& emit) const {
    double diag = 0.0;
    for (const auto& b : bonds_) {
      if (((c >> b.pair.first) ^ (c >> b.pair.second)) & 1U) {
        diag -= 0.25 * b.coefficient;
        emit(swap_sites(c, b.pair.first, b.pair.second), 0.5 * b.coefficient);
      } else {
        diag += 0.25 * b.coefficient;
      }
    }
    for (const auto& p : plaquettes_) {
      for (const auto& a : p.a_transpositions) {
        const Config ca = swap_sites(c, a.first, a.second);
        for (const auto& b : p.b_transpositions) {
          const Config cab = swap_sites(ca, b.first, b.second);
          if (cab == c) {
            diag += p.coefficient;
          } else {
            emit(cab, p.coefficient);
          }
        }
      }
    }
    if (diag != 0.0) emit(c, diag);
  }

 private:
  int n_sites_;
  std::vector<BondTerm> bonds_;
  std::vector<PlaquetteTerm> plaquettes_;
};

/// Terms with |coefficient| < 1e-15 are dropped.
HamiltonianOperator build_operator(const Cluster& cluster, const ModelParams& params);

/// Matrix-free H v in the given basis. Parallel over output indices.
StateVector apply(const HamiltonianOperator& op, const SectorBasis& basis, const StateVector& v, int workers = 1);

/// Cached CSR form of H restricted to one sector.
class SectorMatrix {
 public:
  static SectorMatrix build(const HamiltonianOperator& op, const SectorBasis& basis, int workers = 1);

  std::size_t dimension() const { return row_start_.empty() ? 0 : row_start_.size() - 1; }
  std::size_t nonzeros() const { return values_.size(); }
  void apply(const StateVector& in, StateVector& out) const;
  StateVector apply(const StateVector& in) const {
    StateVector out;
    apply(in, out);
    return out;
  }

 private:
  std::vector<std::size_t> row_start_;
  std::vector<std::uint32_t> columns_;
  std::vector<Complex> values_;
};

enum class TripleKind { A, B };

/// Quartet projector on three sites, applied as T_ij + T_ik + T_jk. Plain Sz
/// basis only.
StateVector apply_projector(const std::array<int, 3>& triple, const SectorBasis& basis, const StateVector& v);

/// Same projector from its exchange form 2(S_i.S_j + S_i.S_k + S_j.S_k) + 3/2.
StateVector apply_projector_exchange_form(const std::array<int, 3>& triple, const SectorBasis& basis,
                                          const StateVector& v);

/// One plaquette term expanded into two- and four-spin exchange products:
/// c/4 * (2 sum_A S.S + 3/2)(2 sum_B S.S + 3/2). Plain Sz basis only.
StateVector apply_plaquette_exchange_form(const Plaquette& plaquette, double coefficient, const SectorBasis& basis,
                                          const StateVector& v);

/// sum_bonds coefficient * S_i.S_j in the plain Sz basis.
StateVector apply_bonds(std::span<const BondTerm> bonds, const SectorBasis& basis, const StateVector& v);

/// |sum_{s in sites} S_s|^2 in the plain Sz basis.
StateVector apply_spin_squared(std::span<const int> sites, const SectorBasis& basis, const StateVector& v);

/// <P> on the chosen triple of every plaquette. Momentum-basis states are
/// expanded first. Throws std::invalid_argument if the state is not
/// normalized to within 1e-8.
std::vector<double> plaquette_expectation(const Cluster& cluster, TripleKind kind, const SectorBasis& basis,
                                          const StateVector& state);

}  // namespace plaqed
