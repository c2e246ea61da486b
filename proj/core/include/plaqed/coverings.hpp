#pragma once

#include <map>
#include <vector>

#include "plaqed/lattice.hpp"
#include "plaqed/vbs.hpp"

namespace plaqed {

/// Perfect matchings over the allowed bonds such that every plaquette holds
/// at least one dimer lying entirely inside its A triple or its B triple.
struct CoveringProblem {
  const Cluster* cluster = nullptr;
  std::vector<SitePair> allowed_bonds;  // unique unordered pairs
  bool admit_nearest = false;
};

/// Allowed bonds are the diagonal (bonds2) and axial (bonds3) pairs; with
/// admit_nearest the nearest-neighbour pairs are added as well.
CoveringProblem make_covering_problem(const Cluster& cluster, bool admit_nearest = false);
/// The problem keeps a pointer to the cluster, so temporaries are refused.
CoveringProblem make_covering_problem(const Cluster&& cluster, bool admit_nearest = false) = delete;

/// All valid coverings, in the deterministic order of a backtracking search
/// that always matches the lowest unmatched site first.
std::vector<DimerPattern> enumerate_valid_coverings(const CoveringProblem& problem);

bool satisfies_plaquette_rule(const Cluster& cluster, const DimerPattern& pattern);

struct CountingReport {
  int n_plaquettes = 0;
  int n_dimers = 0;  // N/2 for any covering
  bool plaquettes_equal_four_dimers = false;
  // containment count -> number of unique pairs with that count
  std::map<int, int> diagonal_containment;
  std::map<int, int> axial_containment;
  bool ok = false;
};

/// Plaquette count versus dimer count, and how many plaquettes contain each
/// diagonal and axial pair inside one of their triples.
CountingReport check_counting_identities(const Cluster& cluster);

/// Number of plaquettes containing the pair inside a triple.
int plaquettes_containing(const Cluster& cluster, SitePair pair);

}  // namespace plaqed
