#include "plaqed/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

namespace plaqed {

namespace {

constexpr char kCacheMagic[] = "PLAQED-BASIS";
constexpr std::int32_t kCacheVersion = 1;

std::vector<std::vector<std::uint64_t>> binomial_table(int n) {
  std::vector<std::vector<std::uint64_t>> c(n + 1, std::vector<std::uint64_t>(n + 1, 0));
  for (int i = 0; i <= n; ++i) {
    c[i][0] = 1;
    for (int k = 1; k <= i; ++k) c[i][k] = c[i - 1][k - 1] + (k <= i - 1 ? c[i - 1][k] : 0);
  }
  return c;
}

// Next larger integer with the same popcount (Gosper's hack).
Config next_same_popcount(Config c) {
  const Config lowest = c & (~c + 1);
  const Config ripple = c + lowest;
  return ripple | (((c ^ ripple) >> 2) / lowest);
}

template <class F>
void for_each_config(int n_sites, int n_up, F&& f) {
  if (n_up == 0) {
    f(Config{0});
    return;
  }
  const Config limit = n_sites == 64 ? ~Config{0} : (Config{1} << n_sites);
  for (Config c = (Config{1} << n_up) - 1; c < limit; c = next_same_popcount(c)) {
    f(c);
    if (c >> (n_sites - n_up) == (Config{1} << n_up) - 1) break;  // highest configuration reached
  }
}

}  // namespace

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

SitePermuter::SitePermuter(std::span<const int> permutation) {
  const std::size_t n = permutation.size();
  if (n > 64) throw std::invalid_argument("at most 64 sites supported");
  tables_.resize((n + 7) / 8);
  for (std::size_t b = 0; b < tables_.size(); ++b) {
    for (std::size_t byte = 0; byte < 256; ++byte) {
      Config out = 0;
      for (std::size_t bit = 0; bit < 8; ++bit) {
        const std::size_t site = 8 * b + bit;
        if (site < n && ((byte >> bit) & 1U)) out |= Config{1} << permutation[site];
      }
      tables_[b][byte] = out;
    }
  }
}

SzSector SzSector::from_sz(int n_sites, double sz) {
  if (n_sites <= 0 || n_sites > 64) throw std::invalid_argument("n_sites must be in [1, 64]");
  const double up = 0.5 * n_sites + sz;
  const double rounded = std::round(up);
  if (std::abs(up - rounded) > 1e-9 || rounded < 0 || rounded > n_sites) {
    throw std::invalid_argument("invalid sz=" + std::to_string(sz) + " for N=" + std::to_string(n_sites));
  }
  return {n_sites, static_cast<int>(rounded)};
}

SectorBasis SectorBasis::sz_basis(int n_sites, double sz) {
  SectorBasis basis;
  basis.sector_ = SzSector::from_sz(n_sites, sz);
  basis.binomial_ = binomial_table(n_sites);
  basis.representatives_.reserve(binomial(n_sites, basis.sector_.n_up));
  for_each_config(n_sites, basis.sector_.n_up, [&](Config c) { basis.representatives_.push_back(c); });
  basis.norms_.assign(basis.representatives_.size(), 1.0);
  return basis;
}

void SectorBasis::init_translations(const Cluster& cluster) {
  auto tr = std::make_shared<Translations>();
  tr->spanning = cluster.spanning_vectors();
  for (int t = 0; t < cluster.n_sites(); ++t) {
    tr->permuters.emplace_back(cluster.translations()[t]);
    tr->vectors.push_back(cluster.coords(t));
  }
  phases_.resize(tr->vectors.size());
  for (std::size_t t = 0; t < tr->vectors.size(); ++t) phases_[t] = std::polar(1.0, -momentum_->dot(tr->vectors[t]));
  translations_ = std::move(tr);
}

SectorBasis SectorBasis::momentum_basis(const Cluster& cluster, double sz, const Momentum& k) {
  const int n = cluster.n_sites();
  if (k.n != n || !cluster.is_allowed(k)) {
    throw std::invalid_argument("momentum " + k.to_string() + " not allowed on this cluster");
  }
  SectorBasis basis;
  basis.sector_ = SzSector::from_sz(n, sz);
  basis.momentum_ = k;
  basis.binomial_ = binomial_table(n);
  basis.init_translations(cluster);

  const auto& perms = basis.translations_->permuters;
  for_each_config(n, basis.sector_.n_up, [&](Config c) {
    Complex stabilizer_sum = 1.0;  // identity, t = 0
    for (std::size_t t = 1; t < perms.size(); ++t) {
      const Config tc = perms[t](c);
      if (tc < c) return;
      if (tc == c) stabilizer_sum += basis.phases_[t];
    }
    if (std::abs(stabilizer_sum) < 1e-8) return;
    basis.representatives_.push_back(c);
    basis.norms_.push_back(std::sqrt(static_cast<double>(n) * stabilizer_sum.real()));
  });
  return basis;
}

std::size_t SectorBasis::plain_rank(Config c) const {
  std::size_t rank = 0;
  int i = 1;
  while (c != 0) {
    const int p = __builtin_ctzll(c);
    rank += binomial_[p][i];
    ++i;
    c &= c - 1;
  }
  return rank;
}

std::optional<Representative> SectorBasis::lookup_momentum(Config c) const {
  const auto& perms = translations_->permuters;
  Config best = c;
  std::size_t best_t = 0;
  for (std::size_t t = 1; t < perms.size(); ++t) {
    const Config tc = perms[t](c);
    if (tc < best) {
      best = tc;
      best_t = t;
    }
  }
  const auto it = std::lower_bound(representatives_.begin(), representatives_.end(), best);
  if (it == representatives_.end() || *it != best) return std::nullopt;
  return Representative{static_cast<std::size_t>(it - representatives_.begin()), phases_[best_t]};
}

std::optional<Representative> SectorBasis::lookup(Config c) const {
  if (momentum_) return lookup_momentum(c);
  return Representative{plain_rank(c), Complex{1.0, 0.0}};
}

std::optional<Representative> SectorBasis::find_representative(Config c) const {
  if (popcount(c) != sector_.n_up || (sector_.n_sites < 64 && (c >> sector_.n_sites) != 0)) {
    throw std::invalid_argument("configuration outside the Sz sector");
  }
  return lookup(c);
}

StateVector SectorBasis::expand(const StateVector& v) const {
  if (static_cast<std::size_t>(v.size()) != dimension()) throw std::invalid_argument("dimension mismatch in expand");
  if (!momentum_) return v;
  StateVector out = StateVector::Zero(static_cast<Eigen::Index>(binomial(sector_.n_sites, sector_.n_up)));
  const auto& perms = translations_->permuters;
  for (std::size_t i = 0; i < dimension(); ++i) {
    const Complex ci = v[static_cast<Eigen::Index>(i)] / norms_[i];
    if (ci == Complex{}) continue;
    for (std::size_t t = 0; t < perms.size(); ++t) {
      out[static_cast<Eigen::Index>(plain_rank(perms[t](representatives_[i])))] += phases_[t] * ci;
    }
  }
  return out;
}

StateVector SectorBasis::project(const StateVector& plain) const {
  if (static_cast<std::uint64_t>(plain.size()) != binomial(sector_.n_sites, sector_.n_up)) {
    throw std::invalid_argument("dimension mismatch in project");
  }
  if (!momentum_) return plain;
  StateVector out(static_cast<Eigen::Index>(dimension()));
  const auto& perms = translations_->permuters;
  for (std::size_t i = 0; i < dimension(); ++i) {
    Complex acc{};
    for (std::size_t t = 0; t < perms.size(); ++t) {
      acc += std::conj(phases_[t]) * plain[static_cast<Eigen::Index>(plain_rank(perms[t](representatives_[i])))];
    }
    out[static_cast<Eigen::Index>(i)] = acc / norms_[i];
  }
  return out;
}

void SectorBasis::save(const std::filesystem::path& path) const {
  if (!momentum_) throw std::logic_error("only momentum bases are cached");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kCacheMagic, sizeof(kCacheMagic));
  const auto [t1, t2] = translations_->spanning;
  const std::int32_t header[] = {kCacheVersion, sector_.n_sites, sector_.n_up, momentum_->kx, momentum_->ky,
                                 t1.x,          t1.y,            t2.x,         t2.y};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const std::uint64_t count = representatives_.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(representatives_.data()),
            static_cast<std::streamsize>(count * sizeof(Config)));
  out.write(reinterpret_cast<const char*>(norms_.data()), static_cast<std::streamsize>(count * sizeof(double)));
}

SectorBasis SectorBasis::load(const std::filesystem::path& path, const Cluster& cluster, double sz,
                              const Momentum& k) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  char magic[sizeof(kCacheMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::string(magic) != kCacheMagic) throw std::runtime_error("not a basis cache: " + path.string());
  std::int32_t header[9] = {};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  SectorBasis basis;
  basis.sector_ = SzSector::from_sz(cluster.n_sites(), sz);
  basis.momentum_ = k;
  const auto [t1, t2] = cluster.spanning_vectors();
  const std::int32_t expected[] = {kCacheVersion, basis.sector_.n_sites, basis.sector_.n_up, k.kx, k.ky,
                                   t1.x,          t1.y,                  t2.x,               t2.y};
  if (!in || !std::equal(std::begin(header), std::end(header), std::begin(expected))) {
    throw std::runtime_error("basis cache key mismatch: " + path.string());
  }
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  basis.representatives_.resize(count);
  basis.norms_.resize(count);
  in.read(reinterpret_cast<char*>(basis.representatives_.data()), static_cast<std::streamsize>(count * sizeof(Config)));
  in.read(reinterpret_cast<char*>(basis.norms_.data()), static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated basis cache: " + path.string());
  basis.binomial_ = binomial_table(cluster.n_sites());
  basis.init_translations(cluster);
  return basis;
}

}  // namespace plaqed
