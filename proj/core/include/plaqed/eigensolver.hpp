#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plaqed/hamiltonian.hpp"
#include "plaqed/hilbert.hpp"
#include "plaqed/lattice.hpp"

namespace plaqed {

struct LinearOperator {
  std::size_t dimension = 0;
  std::function<void(const StateVector&, StateVector&)> apply;
};

/// Matrix-free operator for sectors too large to cache.
LinearOperator make_operator(const HamiltonianOperator& op, const SectorBasis& basis, int workers = 1);
/// Operator backed by a cached matrix; the matrix must outlive the result.
LinearOperator make_operator(const SectorMatrix& matrix);

struct SolverOptions {
  double tol = 1e-10;             // residual norm ||Hv - lambda v||
  double degeneracy_rel = 1e-8;   // grouping threshold, times max(1, |lambda|)
  int krylov_dim = 200;
  std::uint64_t seed = 20070101;
  std::size_t max_matvecs = 0;    // 0: 500 * (m + 1)
  std::size_t dense_threshold = 256;
  bool keep_vectors = true;
};

struct SectorLabel {
  double sz = 0.0;
  std::optional<Momentum> momentum;
  std::string to_string() const;
};

struct SpectrumResult {
  SectorLabel sector;
  std::vector<double> eigenvalues;       // ascending
  std::vector<StateVector> eigenvectors;  // empty unless keep_vectors
  std::vector<double> residual_norms;
  std::vector<std::string> point_group_labels;
  std::uint64_t seed = 0;
  std::size_t matvecs = 0;
};

/// Thrown when the matvec budget runs out; carries the pairs locked so far.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, SpectrumResult partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const SpectrumResult& partial() const { return partial_; }

 private:
  SpectrumResult partial_;
};

/// The m lowest eigenpairs of a Hermitian operator. If the m-th eigenvalue is
/// degenerate, the remaining copies of its multiplet are returned as well.
/// An empty operator yields an empty result.
SpectrumResult lowest_eigenpairs(const LinearOperator& op, int m, const SolverOptions& options = {});

/// Convenience overload: caches the sector matrix when it fits in memory.
SpectrumResult lowest_eigenpairs(const HamiltonianOperator& op, const SectorBasis& basis, int m,
                                 const SolverOptions& options = {}, int workers = 1);

/// Indices grouped into multiplets of (near-)equal eigenvalues.
std::vector<std::vector<std::size_t>> group_degenerate(std::span<const double> eigenvalues, double rel = 1e-8);

/// Lowest Sz=1 level minus lowest Sz=0 level across the given spectra.
double spin_gap(std::span<const SpectrumResult> sz0, std::span<const SpectrumResult> sz1);

/// Solves the Sz=0 and Sz=1 sectors at the given momenta and returns the gap.
double spin_gap(const HamiltonianOperator& op, const Cluster& cluster, std::span<const Momentum> k_set,
                const SolverOptions& options = {}, int workers = 1);

struct PointGroupLabel {
  std::string label;  // "A1", "A2", "B1", "B2", "E" or a character signature
  std::vector<std::pair<std::string, double>> characters;  // little-group op -> trace
  bool ambiguous = false;
};

/// Characters of a multiplet of eigenvectors (coefficients in `basis`) under
/// the little group of the basis momentum, with rotations about site 0.
PointGroupLabel label_point_group(std::span<const StateVector> multiplet, const SectorBasis& basis,
                                  const Cluster& cluster);

inline PointGroupLabel label_point_group(const StateVector& vec, const SectorBasis& basis, const Cluster& cluster) {
  return label_point_group(std::span<const StateVector>(&vec, 1), basis, cluster);
}

}  // namespace plaqed
