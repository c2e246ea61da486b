#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "plaqed/hilbert.hpp"
#include "plaqed/lattice.hpp"

namespace plaqed {

enum class DimerClass : std::uint8_t { nearest, diagonal, axial, other };

/// Perfect matching of the cluster sites. Each dimer is stored in singlet
/// sign order: A site first for A-B pairs, the smaller site index first for
/// same-sublattice pairs.
struct DimerPattern {
  std::vector<SitePair> dimers;
  Vec2 offset;  // SS patterns: translation label in {(0,0),(1,0),(0,1),(1,1)}
  std::vector<DimerClass> bond_class;
};

/// Orders the pair for the singlet sign convention and classifies it.
SitePair singlet_order(const Cluster& cluster, SitePair pair);
DimerClass classify_dimer(const Cluster& cluster, SitePair pair);

/// Builds a pattern from arbitrary pairs; throws std::invalid_argument unless
/// the pairs form a perfect matching.
DimerPattern make_pattern(const Cluster& cluster, std::span<const SitePair> pairs, Vec2 offset = {});

/// Shastry-Sutherland arrangement of diagonal dimers translated by `offset`.
/// Throws std::invalid_argument for offsets outside {0,1}^2 or clusters whose
/// spanning vectors have an odd coordinate.
DimerPattern ss_pattern(const Cluster& cluster, Vec2 offset);

/// The two zero-energy axial-dimer patterns that exist only on the 4x4 cluster.
std::vector<DimerPattern> winding_patterns_16(const Cluster& cluster);

/// Normalized product of singlets (|up,down> - |down,up>)/sqrt(2), in the plain Sz=0 basis.
struct VbsState {
  DimerPattern pattern;
  StateVector amplitudes;
  std::vector<SitePair> sign_convention;
};

VbsState build_product_state(const Cluster& cluster, const DimerPattern& pattern, const SectorBasis& plain_sz0);
VbsState build_ss_state(const Cluster& cluster, Vec2 offset, const SectorBasis& plain_sz0);
std::vector<VbsState> build_ss_states(const Cluster& cluster, const SectorBasis& plain_sz0);

/// Overlap matrix <p|q> (real for the singlet convention used).
Eigen::MatrixXd gram_matrix(std::span<const VbsState> states);

/// Numerical rank with relative eigenvalue cutoff.
int numerical_rank(const Eigen::MatrixXd& gram, double cutoff = 1e-10);

struct GroundSpaceOverlap {
  double overlap = 0.0;  // mean squared projection of the ground vectors onto the VBS span
  int ground_dimension = 0;
  int vbs_rank = 0;
  bool dimension_mismatch = false;
};

/// `ground` holds orthonormal ground vectors in the plain Sz=0 basis.
GroundSpaceOverlap ground_space_overlap(std::span<const StateVector> ground, std::span<const VbsState> states);

/// Text drawing of a square window of the lattice with site indices and
/// dimer links, followed by the dimer list.
std::string pattern_diagram(const Cluster& cluster, const DimerPattern& pattern);

}  // namespace plaqed
