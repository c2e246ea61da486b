#include "plaqed/coverings.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace plaqed {

namespace {

std::array<SitePair, 6> plaquette_pairs(const Plaquette& p) {
  const auto& a = p.a_triple;
  const auto& b = p.b_triple;
  return {unordered({a[0], a[1]}), unordered({a[0], a[2]}), unordered({a[1], a[2]}),
          unordered({b[0], b[1]}), unordered({b[0], b[2]}), unordered({b[1], b[2]})};
}

class CoveringSearch {
 public:
  explicit CoveringSearch(const CoveringProblem& problem) : cluster_(*problem.cluster) {
    const int n = cluster_.n_sites();
    partner_.assign(n, -1);
    adjacency_.resize(n);
    for (const auto& p : problem.allowed_bonds) {
      adjacency_[p.first].push_back(p.second);
      adjacency_[p.second].push_back(p.first);
    }
    for (auto& adj : adjacency_) {
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
    }
    const auto& plaquettes = cluster_.plaquettes();
    pairs_.reserve(plaquettes.size());
    site_plaquettes_.resize(n);
    for (std::size_t q = 0; q < plaquettes.size(); ++q) {
      pairs_.push_back(plaquette_pairs(plaquettes[q]));
      for (int s : plaquettes[q].sites) site_plaquettes_[s].push_back(q);
    }
  }

  std::vector<DimerPattern> run() {
    search();
    return std::move(results_);
  }

 private:
  // A plaquette is still satisfiable when one of its triple pairs is already a
  // dimer or has both ends unmatched.
  bool viable(std::size_t q) const {
    for (const auto& p : pairs_[q]) {
      if (partner_[p.first] == p.second) return true;
      if (partner_[p.first] < 0 && partner_[p.second] < 0) return true;
    }
    return false;
  }

  void search() {
    const int n = cluster_.n_sites();
    int s = 0;
    while (s < n && partner_[s] >= 0) ++s;
    if (s == n) {
      std::vector<SitePair> dimers;
      for (int i = 0; i < n; ++i) {
        if (i < partner_[i]) dimers.push_back({i, partner_[i]});
      }
      results_.push_back(make_pattern(cluster_, dimers));
      return;
    }
    for (int t : adjacency_[s]) {
      if (partner_[t] >= 0) continue;
      partner_[s] = t;
      partner_[t] = s;
      bool ok = true;
      for (int site : {s, t}) {
        for (std::size_t q : site_plaquettes_[site]) {
          if (!viable(q)) {
            ok = false;
            break;
          }
        }
        if (!ok) break;
      }
      if (ok) search();
      partner_[s] = -1;
      partner_[t] = -1;
    }
  }

  const Cluster& cluster_;
  std::vector<int> partner_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<std::array<SitePair, 6>> pairs_;
  std::vector<std::vector<std::size_t>> site_plaquettes_;
  std::vector<DimerPattern> results_;
};

}  // namespace

CoveringProblem make_covering_problem(const Cluster& cluster, bool admit_nearest) {
  std::set<SitePair> pairs;
  for (const auto& b : cluster.bonds2()) pairs.insert(unordered(b.pair()));
  for (const auto& b : cluster.bonds3()) pairs.insert(unordered(b.pair()));
  if (admit_nearest) {
    for (const auto& b : cluster.bonds1()) pairs.insert(unordered(b.pair()));
  }
  return {&cluster, {pairs.begin(), pairs.end()}, admit_nearest};
}

std::vector<DimerPattern> enumerate_valid_coverings(const CoveringProblem& problem) {
  if (problem.cluster == nullptr) throw std::invalid_argument("covering problem without cluster");
  return CoveringSearch(problem).run();
}

bool satisfies_plaquette_rule(const Cluster& cluster, const DimerPattern& pattern) {
  std::set<SitePair> dimers;
  for (const auto& d : pattern.dimers) dimers.insert(unordered(d));
  return std::all_of(cluster.plaquettes().begin(), cluster.plaquettes().end(), [&](const Plaquette& p) {
    const auto pairs = plaquette_pairs(p);
    return std::any_of(pairs.begin(), pairs.end(), [&](SitePair q) { return dimers.contains(q); });
  });
}

int plaquettes_containing(const Cluster& cluster, SitePair pair) {
  const SitePair key = unordered(pair);
  int count = 0;
  for (const auto& p : cluster.plaquettes()) {
    const auto pairs = plaquette_pairs(p);
    if (std::find(pairs.begin(), pairs.end(), key) != pairs.end()) ++count;
  }
  return count;
}

CountingReport check_counting_identities(const Cluster& cluster) {
  CountingReport report;
  report.n_plaquettes = static_cast<int>(cluster.plaquettes().size());
  report.n_dimers = cluster.n_sites() / 2;
  report.plaquettes_equal_four_dimers =
      report.n_plaquettes == 2 * cluster.n_sites() && report.n_plaquettes == 4 * report.n_dimers;

  std::map<SitePair, int> containment;
  for (const auto& p : cluster.plaquettes()) {
    for (const auto& q : plaquette_pairs(p)) ++containment[q];
  }
  auto tally = [&](const std::vector<Bond>& table, std::map<int, int>& out) {
    std::set<SitePair> seen;
    for (const auto& b : table) {
      const SitePair key = unordered(b.pair());
      if (!seen.insert(key).second) continue;
      const auto it = containment.find(key);
      ++out[it == containment.end() ? 0 : it->second];
    }
  };
  tally(cluster.bonds2(), report.diagonal_containment);
  tally(cluster.bonds3(), report.axial_containment);

  const bool diagonal_four = report.diagonal_containment.size() == 1 && report.diagonal_containment.begin()->first == 4;
  const bool axial_ok = std::all_of(report.axial_containment.begin(), report.axial_containment.end(),
                                    [](const auto& e) { return e.first == 2 || e.first == 4; });
  report.ok = report.plaquettes_equal_four_dimers && diagonal_four && axial_ok;
  return report;
}

}  // namespace plaqed
