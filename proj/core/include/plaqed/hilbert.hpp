#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "plaqed/lattice.hpp"

namespace plaqed {

/// Bit s set means spin up at site s.
using Config = std::uint64_t;
using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;

inline int popcount(Config c) { return __builtin_popcountll(c); }

/// Exchanges the spins on sites i and j.
inline Config swap_sites(Config c, int i, int j) {
  const Config bi = (c >> i) & 1U;
  const Config bj = (c >> j) & 1U;
  const Config x = bi ^ bj;
  return c ^ ((x << i) | (x << j));
}

/// Applies a site permutation to configurations with one table lookup per byte.
class SitePermuter {
 public:
  SitePermuter() = default;
  explicit SitePermuter(std::span<const int> permutation);

  Config operator()(Config c) const {
    Config out = 0;
    for (std::size_t b = 0; b < tables_.size(); ++b) out |= tables_[b][(c >> (8 * b)) & 0xFFU];
    return out;
  }

 private:
  std::vector<std::array<Config, 256>> tables_;
};

/// Total-Sz sector, given as the number of up spins.
struct SzSector {
  int n_sites = 0;
  int n_up = 0;

  /// Throws std::invalid_argument unless sz is a half-integer with
  /// |sz| <= N/2 and sz = N/2 (mod 1).
  static SzSector from_sz(int n_sites, double sz);
  double sz() const { return n_up - 0.5 * n_sites; }
};

struct Representative {
  std::size_t index = 0;
  Complex phase{1.0, 0.0};  // e^{-ik.t} for the translation t taking the config to its representative
};

/// Basis of a total-Sz sector, optionally symmetrized into a momentum sector.
///
/// Momentum basis states are |r,k> = (1/norm_r) sum_a e^{-ik.a} T_a |r>, where
/// r is the numerically smallest configuration of its translation orbit and
/// norm_r = sqrt(N * |stabilizer of r|). The plain Sz basis uses every
/// configuration with norm 1, ordered numerically.
class SectorBasis {
 public:
  static SectorBasis sz_basis(int n_sites, double sz);
  static SectorBasis momentum_basis(const Cluster& cluster, double sz, const Momentum& k);

  int n_sites() const { return sector_.n_sites; }
  int n_up() const { return sector_.n_up; }
  double sz() const { return sector_.sz(); }
  const std::optional<Momentum>& momentum() const { return momentum_; }
  bool is_momentum_sector() const { return momentum_.has_value(); }

  std::size_t dimension() const { return representatives_.size(); }
  std::span<const Config> representatives() const { return representatives_; }
  std::span<const double> norms() const { return norms_; }
  Config representative(std::size_t i) const { return representatives_[i]; }
  double norm(std::size_t i) const { return norms_[i]; }

  /// Index of the orbit representative and accumulated phase, or nullopt when
  /// the orbit is incompatible with the momentum. Throws std::invalid_argument
  /// for a configuration outside the Sz sector.
  std::optional<Representative> find_representative(Config c) const;

  /// Same as find_representative without the popcount check.
  std::optional<Representative> lookup(Config c) const;

  /// Expands coefficients in this basis to the plain Sz basis of the same sector.
  StateVector expand(const StateVector& v) const;
  /// Orthogonal projection of a plain-Sz-basis vector onto this sector.
  StateVector project(const StateVector& plain) const;

  /// Writes the representative list to a versioned binary cache file.
  void save(const std::filesystem::path& path) const;
  /// Reads a cache written by save(); throws std::runtime_error if the file
  /// header or key (N, n_up, k, spanning vectors) does not match.
  static SectorBasis load(const std::filesystem::path& path, const Cluster& cluster, double sz,
                          const Momentum& k);

 private:
  struct Translations {
    std::vector<SitePermuter> permuters;
    std::vector<Vec2> vectors;
    std::pair<Vec2, Vec2> spanning;
  };

  SectorBasis() = default;
  void init_translations(const Cluster& cluster);
  std::optional<Representative> lookup_momentum(Config c) const;
  std::size_t plain_rank(Config c) const;

  SzSector sector_;
  std::optional<Momentum> momentum_;
  std::vector<Config> representatives_;
  std::vector<double> norms_;
  std::shared_ptr<const Translations> translations_;
  std::vector<Complex> phases_;  // e^{-ik.a} per translation
  // binomial_[n][k] for plain-basis ranking
  std::vector<std::vector<std::uint64_t>> binomial_;
};

inline SectorBasis build_sz_basis(int n_sites, double sz) { return SectorBasis::sz_basis(n_sites, sz); }
inline SectorBasis build_momentum_basis(const Cluster& cluster, double sz, const Momentum& k) {
  return SectorBasis::momentum_basis(cluster, sz, k);
}
inline std::optional<Representative> find_representative(Config c, const SectorBasis& basis) {
  return basis.find_representative(c);
}

std::uint64_t binomial(int n, int k);

}  // namespace plaqed
