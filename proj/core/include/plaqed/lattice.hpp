#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace plaqed {

/// Integer 2-vector in lattice units.
struct Vec2 {
  int x = 0;
  int y = 0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(int s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
  friend constexpr auto operator<=>(Vec2, Vec2) = default;
};

enum class Sublattice : std::uint8_t { A, B };

/// Crystal momentum k = 2*pi*(kx, ky)/n. Components are kept reduced mod n,
/// where n is the number of sites of the cluster the momentum belongs to.
struct Momentum {
  int kx = 0;
  int ky = 0;
  int n = 1;

  double x() const;
  double y() const;
  /// Phase k.r for a lattice vector r, in radians.
  double dot(Vec2 r) const;
  /// Human readable form such as "(pi,pi/2)" or "(0,3pi/5)".
  std::string to_string() const;

  friend bool operator==(const Momentum& a, const Momentum& b);
};

/// Parses "(pi,0)", "pi,pi/2", "0,-pi/2", "(2pi/5,4pi/5)" into a momentum
/// with denominator n. Throws std::invalid_argument when a component is not a
/// multiple of 2*pi/n.
Momentum parse_momentum(std::string_view text, int n);

struct SitePair {
  int first = 0;
  int second = 0;
  friend constexpr bool operator==(SitePair, SitePair) = default;
  friend constexpr auto operator<=>(SitePair, SitePair) = default;
};

/// Pair in ascending site order; used for set semantics on unordered pairs.
constexpr SitePair unordered(SitePair p) {
  return p.first <= p.second ? p : SitePair{p.second, p.first};
}

struct Bond {
  int first = 0;
  int second = 0;
  Vec2 displacement;  // second = first + displacement on the torus
  SitePair pair() const { return {first, second}; }
};

enum class PlaquetteOrientation : std::uint8_t { horizontal, vertical };

/// Six-site rectangle (3x2 horizontal or 2x3 vertical). `sites` lists the
/// A-sublattice triple followed by the B-sublattice triple.
struct Plaquette {
  std::array<int, 6> sites{};
  PlaquetteOrientation orientation = PlaquetteOrientation::horizontal;
  Vec2 anchor;  // lower-left corner
  std::array<int, 3> a_triple{};
  std::array<int, 3> b_triple{};
};

struct PointGroupOp {
  std::string name;
  std::array<int, 4> matrix{};  // row-major 2x2 integer orthogonal matrix
  std::vector<int> permutation;  // site s -> permutation[s], rotation about site 0

  Vec2 act(Vec2 r) const { return {matrix[0] * r.x + matrix[1] * r.y, matrix[2] * r.x + matrix[3] * r.y}; }
};

/// Finite periodic square-lattice cluster spanned by two integer vectors.
///
/// Sites are the canonical representatives of Z^2 modulo the spanning
/// lattice, indexed lexicographically by (x, y). Bond tables hold one entry
/// per (site, displacement) so each has exactly 2N entries; on clusters where
/// a displacement and its negative coincide modulo the torus (the (2,0)
/// bonds of the 4x4 cluster) the same unordered pair appears twice.
/// Instances are immutable after construction.
class Cluster {
 public:
  /// Throws std::invalid_argument for a zero determinant, a spanning vector
  /// with odd coordinate sum, or a torus too small to hold distinct
  /// six-site plaquettes.
  Cluster(Vec2 t1, Vec2 t2);

  int n_sites() const { return n_sites_; }
  std::pair<Vec2, Vec2> spanning_vectors() const { return {t1_, t2_}; }
  const std::vector<Vec2>& site_coords() const { return coords_; }
  Vec2 coords(int site) const { return coords_[site]; }
  Sublattice sublattice(int site) const { return sublattice_[site]; }

  const std::vector<Bond>& bonds1() const { return bonds1_; }
  const std::vector<Bond>& bonds2() const { return bonds2_; }
  const std::vector<Bond>& bonds3() const { return bonds3_; }
  const std::vector<Plaquette>& plaquettes() const { return plaquettes_; }

  /// translations()[t][s] is the image of site s under the shift by coords(t).
  const std::vector<std::vector<int>>& translations() const { return translations_; }
  const std::vector<PointGroupOp>& point_group_ops() const { return point_group_; }

  bool is_lattice_vector(Vec2 r) const;
  Vec2 wrap(Vec2 r) const;
  int site_at(Vec2 r) const;
  int translate(int site, Vec2 shift) const { return site_at(coords_[site] + shift); }
  /// Shortest representative of r modulo the spanning lattice.
  Vec2 minimal_image(Vec2 r) const;
  bool is_allowed(const Momentum& k) const;

 private:
  Vec2 t1_, t2_;
  int n_sites_ = 0;
  // Hermite normal form of the spanning lattice: {(hnf_a_, 0), (hnf_b_, hnf_d_)}.
  int hnf_a_ = 0, hnf_b_ = 0, hnf_d_ = 0;
  std::vector<Vec2> coords_;
  std::vector<int> index_;  // x * hnf_d_ + y -> site
  std::vector<Sublattice> sublattice_;
  std::vector<Bond> bonds1_, bonds2_, bonds3_;
  std::vector<Plaquette> plaquettes_;
  std::vector<std::vector<int>> translations_;
  std::vector<PointGroupOp> point_group_;
};

Cluster build_cluster(Vec2 t1, Vec2 t2);

/// Catalog clusters "16", "20", "32" (and "8" for small checks), or explicit
/// spanning vectors written "x1,y1;x2,y2".
Cluster cluster_by_name(std::string_view name);

std::vector<Plaquette> enumerate_plaquettes(const Cluster& cluster);

/// The N momenta compatible with the cluster's periodicity.
std::vector<Momentum> allowed_momenta(const Cluster& cluster);

/// Image of k under a point-group operation (orthogonal matrices map k like r).
Momentum transform(const PointGroupOp& op, const Momentum& k);

/// Text dump of sites, bond tables and plaquettes.
std::string dump_cluster(const Cluster& cluster);

}  // namespace plaqed
