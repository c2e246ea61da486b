#include "plaqed/lattice.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace plaqed {

namespace {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int mod(int a, int b) {
  int r = a % b;
  return r < 0 ? r + b : r;
}

// Extended Euclid: returns g = gcd(|a|,|b|) >= 0 and u, v with u*a + v*b = g.
int ext_gcd(int a, int b, int& u, int& v) {
  int old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const int q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
    std::tie(old_t, t) = std::make_pair(t, old_t - q * t);
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  u = old_s;
  v = old_t;
  return old_r;
}

std::string fraction_of_pi(int twice_num, int den) {
  // value = twice_num * pi / den, reduced into (-pi, pi].
  if (twice_num == 0) return "0";
  const int g = std::gcd(twice_num, den);
  int num = twice_num / g;
  const int d = den / g;
  std::string out;
  if (num < 0) {
    out += "-";
    num = -num;
  }
  if (num != 1) out += std::to_string(num);
  out += "pi";
  if (d != 1) out += "/" + std::to_string(d);
  return out;
}

// Component k (units of 2pi/n) in the symmetric range, written as a multiple of pi.
std::string component_string(int k, int n) {
  int c = mod(k, n);
  if (2 * c > n) c -= n;
  return fraction_of_pi(2 * c, n);
}

// Parses "[-][a]pi[/b]" or "0" into a rational multiple of pi: num/den.
std::pair<long, long> parse_pi_fraction(std::string_view s) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && (v.front() == ' ' || v.front() == '(')) v.remove_prefix(1);
    while (!v.empty() && (v.back() == ' ' || v.back() == ')')) v.remove_suffix(1);
    return v;
  };
  s = trim(s);
  if (s.empty()) throw std::invalid_argument("empty momentum component");
  long sign = 1;
  if (s.front() == '-') {
    sign = -1;
    s.remove_prefix(1);
  } else if (s.front() == '+') {
    s.remove_prefix(1);
  }
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string_view::npos) {
    long value = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || p != s.data() + s.size() || value != 0) {
      throw std::invalid_argument("momentum component must be 0 or a multiple of pi: " + std::string(s));
    }
    return {0, 1};
  }
  long num = 1;
  if (pi_pos > 0) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + pi_pos, num);
    if (ec != std::errc() || p != s.data() + pi_pos) {
      throw std::invalid_argument("bad momentum coefficient: " + std::string(s));
    }
  }
  long den = 1;
  auto rest = s.substr(pi_pos + 2);
  if (!rest.empty()) {
    if (rest.front() != '/') throw std::invalid_argument("bad momentum component: " + std::string(s));
    rest.remove_prefix(1);
    auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), den);
    if (ec != std::errc() || p != rest.data() + rest.size() || den <= 0) {
      throw std::invalid_argument("bad momentum denominator: " + std::string(s));
    }
  }
  return {sign * num, den};
}

const std::array<PointGroupOp, 8>& d4_elements() {
  static const std::array<PointGroupOp, 8> ops = {{
      {"E", {1, 0, 0, 1}, {}},
      {"C4", {0, -1, 1, 0}, {}},
      {"C2", {-1, 0, 0, -1}, {}},
      {"C4^3", {0, 1, -1, 0}, {}},
      {"mx", {-1, 0, 0, 1}, {}},
      {"my", {1, 0, 0, -1}, {}},
      {"md", {0, 1, 1, 0}, {}},
      {"md'", {0, -1, -1, 0}, {}},
  }};
  return ops;
}

}  // namespace

double Momentum::x() const { return 2.0 * std::numbers::pi * kx / n; }
double Momentum::y() const { return 2.0 * std::numbers::pi * ky / n; }

double Momentum::dot(Vec2 r) const {
  // Reduce the integer phase first so the result is exact for lattice vectors.
  const long long p = static_cast<long long>(kx) * r.x + static_cast<long long>(ky) * r.y;
  const long long m = ((p % n) + n) % n;
  return 2.0 * std::numbers::pi * static_cast<double>(m) / n;
}

std::string Momentum::to_string() const {
  return "(" + component_string(kx, n) + "," + component_string(ky, n) + ")";
}

bool operator==(const Momentum& a, const Momentum& b) {
  return static_cast<long long>(a.kx) * b.n == static_cast<long long>(b.kx) * a.n &&
         static_cast<long long>(a.ky) * b.n == static_cast<long long>(b.ky) * a.n;
}

Momentum parse_momentum(std::string_view text, int n) {
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) {
    throw std::invalid_argument("momentum needs two components: " + std::string(text));
  }
  Momentum k{0, 0, n};
  int* out[2] = {&k.kx, &k.ky};
  std::string_view parts[2] = {text.substr(0, comma), text.substr(comma + 1)};
  for (int c = 0; c < 2; ++c) {
    // value = num*pi/den = 2pi * m / n  =>  m = num * n / (2 den)
    const auto [num, den] = parse_pi_fraction(parts[c]);
    const long top = num * n;
    if (top % (2 * den) != 0) {
      throw std::invalid_argument("momentum component " + std::string(parts[c]) +
                                  " is not a multiple of 2pi/" + std::to_string(n));
    }
    *out[c] = mod(static_cast<int>(top / (2 * den)), n);
  }
  return k;
}

Cluster::Cluster(Vec2 t1, Vec2 t2) : t1_(t1), t2_(t2) {
  const int det = t1.x * t2.y - t1.y * t2.x;
  if (det == 0) throw std::invalid_argument("spanning vectors are linearly dependent");
  if (mod(t1.x + t1.y, 2) != 0 || mod(t2.x + t2.y, 2) != 0) {
    throw std::invalid_argument("spanning vectors must have even coordinate sums (A/B bipartition)");
  }
  n_sites_ = std::abs(det);

  if (t1.y == 0 && t2.y == 0) throw std::invalid_argument("degenerate spanning vectors");
  int u = 0, v = 0;
  hnf_d_ = ext_gcd(t1.y, t2.y, u, v);
  hnf_a_ = n_sites_ / hnf_d_;
  hnf_b_ = mod(u * t1.x + v * t2.x, hnf_a_);

  coords_.reserve(n_sites_);
  for (int x = 0; x < hnf_a_; ++x) {
    for (int y = 0; y < hnf_d_; ++y) coords_.push_back({x, y});
  }
  index_.resize(n_sites_);
  for (int s = 0; s < n_sites_; ++s) index_[coords_[s].x * hnf_d_ + coords_[s].y] = s;

  sublattice_.resize(n_sites_);
  for (int s = 0; s < n_sites_; ++s) {
    sublattice_[s] = mod(coords_[s].x + coords_[s].y, 2) == 0 ? Sublattice::A : Sublattice::B;
  }

  auto fill = [this](std::vector<Bond>& table, Vec2 d1, Vec2 d2) {
    table.reserve(2 * n_sites_);
    for (int s = 0; s < n_sites_; ++s) {
      for (Vec2 d : {d1, d2}) {
        const int t = translate(s, d);
        if (t == s) throw std::invalid_argument("cluster too small: a bond closes on itself");
        table.push_back({s, t, d});
      }
    }
  };
  fill(bonds1_, {1, 0}, {0, 1});
  fill(bonds2_, {1, 1}, {1, -1});
  fill(bonds3_, {2, 0}, {0, 2});

  plaquettes_.reserve(2 * n_sites_);
  for (auto orientation : {PlaquetteOrientation::horizontal, PlaquetteOrientation::vertical}) {
    const int w = orientation == PlaquetteOrientation::horizontal ? 3 : 2;
    const int h = orientation == PlaquetteOrientation::horizontal ? 2 : 3;
    for (int s = 0; s < n_sites_; ++s) {
      Plaquette p;
      p.orientation = orientation;
      p.anchor = coords_[s];
      int na = 0, nb = 0;
      // Reading order: bottom row first, left to right.
      for (int dy = 0; dy < h; ++dy) {
        for (int dx = 0; dx < w; ++dx) {
          const int site = site_at(p.anchor + Vec2{dx, dy});
          if (sublattice_[site] == Sublattice::A) {
            p.a_triple[na++] = site;
          } else {
            p.b_triple[nb++] = site;
          }
        }
      }
      std::copy(p.a_triple.begin(), p.a_triple.end(), p.sites.begin());
      std::copy(p.b_triple.begin(), p.b_triple.end(), p.sites.begin() + 3);
      auto sorted = p.sites;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("cluster too small: plaquette sites coincide");
      }
      plaquettes_.push_back(p);
    }
  }

  translations_.resize(n_sites_);
  for (int t = 0; t < n_sites_; ++t) {
    translations_[t].resize(n_sites_);
    for (int s = 0; s < n_sites_; ++s) translations_[t][s] = site_at(coords_[s] + coords_[t]);
  }

  for (const auto& g : d4_elements()) {
    if (!is_lattice_vector(g.act(t1_)) || !is_lattice_vector(g.act(t2_))) continue;
    PointGroupOp op = g;
    op.permutation.resize(n_sites_);
    for (int s = 0; s < n_sites_; ++s) op.permutation[s] = site_at(op.act(coords_[s]));
    point_group_.push_back(std::move(op));
  }
}

Vec2 Cluster::wrap(Vec2 r) const {
  const int q = floor_div(r.y, hnf_d_);
  r.x -= q * hnf_b_;
  r.y -= q * hnf_d_;
  r.x = mod(r.x, hnf_a_);
  return r;
}

bool Cluster::is_lattice_vector(Vec2 r) const { return wrap(r) == Vec2{0, 0}; }

int Cluster::site_at(Vec2 r) const {
  const Vec2 w = wrap(r);
  return index_[w.x * hnf_d_ + w.y];
}

Vec2 Cluster::minimal_image(Vec2 r) const {
  Vec2 best = r;
  long best_norm = -1;
  for (int n1 = -2; n1 <= 2; ++n1) {
    for (int n2 = -2; n2 <= 2; ++n2) {
      const Vec2 c = r + n1 * t1_ + n2 * t2_;
      const long norm = static_cast<long>(c.x) * c.x + static_cast<long>(c.y) * c.y;
      if (best_norm < 0 || norm < best_norm || (norm == best_norm && c < best)) {
        best = c;
        best_norm = norm;
      }
    }
  }
  return best;
}

bool Cluster::is_allowed(const Momentum& k) const {
  // k.T must be a multiple of 2pi for both spanning vectors.
  const auto ok = [&](Vec2 t) {
    const long long num = static_cast<long long>(k.kx) * t.x + static_cast<long long>(k.ky) * t.y;
    return num % k.n == 0;
  };
  return ok(t1_) && ok(t2_);
}

Cluster build_cluster(Vec2 t1, Vec2 t2) { return Cluster(t1, t2); }

Cluster cluster_by_name(std::string_view name) {
  if (name == "8") return Cluster({2, 2}, {-2, 2});
  if (name == "16") return Cluster({4, 0}, {0, 4});
  if (name == "20") return Cluster({4, 2}, {-2, 4});
  if (name == "32") return Cluster({4, 4}, {-4, 4});
  // "x1,y1;x2,y2"
  int v[4];
  std::string s(name);
  for (char& c : s) {
    if (c == ';' || c == ',' || c == '(' || c == ')') c = ' ';
  }
  std::istringstream in(s);
  for (int& x : v) {
    if (!(in >> x)) throw std::invalid_argument("unknown cluster: " + std::string(name));
  }
  std::string extra;
  if (in >> extra) throw std::invalid_argument("unknown cluster: " + std::string(name));
  return Cluster({v[0], v[1]}, {v[2], v[3]});
}

std::vector<Plaquette> enumerate_plaquettes(const Cluster& cluster) { return cluster.plaquettes(); }

std::vector<Momentum> allowed_momenta(const Cluster& cluster) {
  const int n = cluster.n_sites();
  std::vector<Momentum> out;
  for (int kx = 0; kx < n; ++kx) {
    for (int ky = 0; ky < n; ++ky) {
      const Momentum k{kx, ky, n};
      if (cluster.is_allowed(k)) out.push_back(k);
    }
  }
  return out;
}

Momentum transform(const PointGroupOp& op, const Momentum& k) {
  const Vec2 r = op.act({k.kx, k.ky});
  return {mod(r.x, k.n), mod(r.y, k.n), k.n};
}

std::string dump_cluster(const Cluster& cluster) {
  std::ostringstream out;
  const auto [t1, t2] = cluster.spanning_vectors();
  out << "cluster N=" << cluster.n_sites() << " T1=(" << t1.x << "," << t1.y << ") T2=(" << t2.x << ","
      << t2.y << ")\n";
  out << "sites (index x y sublattice)\n";
  for (int s = 0; s < cluster.n_sites(); ++s) {
    const auto r = cluster.coords(s);
    out << s << " " << r.x << " " << r.y << " " << (cluster.sublattice(s) == Sublattice::A ? 'A' : 'B')
        << "\n";
  }
  auto bonds = [&](const char* title, const std::vector<Bond>& table) {
    out << title << " (" << table.size() << ")\n";
    for (const auto& b : table) {
      out << b.first << " " << b.second << " d=(" << b.displacement.x << "," << b.displacement.y << ")\n";
    }
  };
  bonds("bonds1", cluster.bonds1());
  bonds("bonds2", cluster.bonds2());
  bonds("bonds3", cluster.bonds3());
  out << "plaquettes (" << cluster.plaquettes().size() << ") orientation anchor | A-triple | B-triple\n";
  for (const auto& p : cluster.plaquettes()) {
    out << (p.orientation == PlaquetteOrientation::horizontal ? 'h' : 'v') << " (" << p.anchor.x << ","
        << p.anchor.y << ") |";
    for (int s : p.a_triple) out << " " << s;
    out << " |";
    for (int s : p.b_triple) out << " " << s;
    out << "\n";
  }
  out << "momenta";
  for (const auto& k : allowed_momenta(cluster)) out << " " << k.to_string();
  out << "\npoint group";
  for (const auto& g : cluster.point_group_ops()) out << " " << g.name;
  out << "\n";
  return out.str();
}

}  // namespace plaqed
