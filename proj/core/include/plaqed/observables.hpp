#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "plaqed/eigensolver.hpp"
#include "plaqed/hilbert.hpp"
#include "plaqed/lattice.hpp"

namespace plaqed {

/// <S_i.S_j> for all site pairs. Momentum-basis states are expanded to the
/// plain Sz basis first. Throws std::invalid_argument if the state is not
/// normalized to within 1e-8.
Eigen::MatrixXd spin_correlations(const SectorBasis& basis, const StateVector& state);

/// M^2(Q) = (1/(N(N+2))) sum_ij C_ij exp(iQ.(r_j - r_i)) from a correlation matrix.
double structure_factor(const Cluster& cluster, const Eigen::MatrixXd& correlations, const Momentum& q);

/// Same, from a state. Throws std::invalid_argument for Q not allowed on the
/// cluster or an unnormalized state.
double structure_factor(const Cluster& cluster, const SectorBasis& basis, const StateVector& state,
                        const Momentum& q);

struct StructureFactorReport {
  std::string sector;
  int level = 0;
  std::vector<std::pair<Momentum, double>> values;
};

StructureFactorReport structure_factor_report(const Cluster& cluster, const SectorBasis& basis,
                                              const StateVector& state, std::span<const Momentum> qs,
                                              int level = 0);

enum class BondClass { first_neighbor, second_neighbor };

struct DimerCorrelationEntry {
  SitePair bond;
  Vec2 r;              // target origin relative to the reference origin, minimal image
  Vec2 r2;             // target bond direction
  double value = 0.0;  // connected correlator
  double midpoint_distance = 0.0;
  bool overlaps_reference = false;
};

struct DimerCorrelationReport {
  SitePair reference;
  Vec2 r1;
  std::vector<DimerCorrelationEntry> entries;
  std::optional<std::size_t> farthest;  // entry index of r_m
  double farthest_value = 0.0;
  double max_imaginary = 0.0;  // largest |Im <AB>| seen; should vanish for eigenstates
};

/// Connected correlations <(S_0.S_r1)(S_r.S_r+r2)> - <S_0.S_r1><S_r.S_r+r2> of
/// the reference bond at site 0 (r1 = (1,1) for the 2nd-neighbor class,
/// (1,0) for the 1st-neighbor class) with every bond of the same class.
///
/// r_m is the largest torus distance between bond midpoints among bonds that
/// do not touch the reference and are ordered like it: the diagonal dimers of
/// the Shastry-Sutherland pattern holding the reference, or the parallel
/// bonds for the 1st-neighbor class. Ties go to the lexicographically
/// smallest (r, r2).
DimerCorrelationReport dimer_correlations(const Cluster& cluster, const SectorBasis& basis, const StateVector& state,
                                          BondClass bond_class);

struct FssFit {
  std::vector<std::pair<int, double>> points;
  double m0_squared = 0.0;
  double constant = 0.0;
  bool order_present() const { return m0_squared > 0.0; }
};

/// Least squares of M^2 = m0^2/8 + const/sqrt(N). Throws std::invalid_argument
/// for fewer than two points or a repeated N.
FssFit fss_extrapolate(std::span<const std::pair<int, double>> points);

struct EnergyDifference {
  std::string sector;
  int level = 0;
  double energy = 0.0;
  double difference = 0.0;  // energy minus the global Sz=0 minimum
  std::string spin;         // "singlet", "triplet+" or "unknown"
};

/// Sz=0 levels relative to the global minimum, ascending. A level is tagged
/// triplet+ when a Sz=1 level of the same momentum matches it to within
/// `match_tol`; singlet otherwise. Without Sz=1 spectra the tag is unknown.
std::vector<EnergyDifference> energy_differences(std::span<const SpectrumResult> sz0,
                                                 std::span<const SpectrumResult> sz1 = {},
                                                 double match_tol = 1e-7);

}  // namespace plaqed
