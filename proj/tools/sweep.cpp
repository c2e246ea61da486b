#include "sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include <Eigen/Core>

#include "plaqed/coverings.hpp"
#include "plaqed/eigensolver.hpp"
#include "plaqed/hamiltonian.hpp"
#include "plaqed/observables.hpp"
#include "plaqed/vbs.hpp"

#ifndef PLAQED_VERSION
#define PLAQED_VERSION "unknown"
#endif

namespace plaqed::sweep {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::pair<Observable, std::string>>& observable_names() {
  static const std::vector<std::pair<Observable, std::string>> names{
      {Observable::energies, "energies"},
      {Observable::gaps, "gaps"},
      {Observable::structure_factor, "structure_factor"},
      {Observable::dimer_correlations, "dimer_correlations"},
      {Observable::fss, "fss"},
      {Observable::coverings, "coverings"},
      {Observable::vbs_overlap, "vbs_overlap"},
  };
  return names;
}

bool needs_solver(const SweepSpec& spec) {
  return std::any_of(spec.observables.begin(), spec.observables.end(),
                     [](Observable o) { return o != Observable::coverings; });
}

std::vector<double> grid_from_json(const json& j, const char* key) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) {
    std::vector<double> out;
    for (const auto& v : j) {
      if (!v.is_number()) throw SpecError(std::string(key) + ": grid entries must be numbers");
      out.push_back(v.get<double>());
    }
    return out;
  }
  if (j.is_object()) {
    for (const char* k : {"from", "to", "step"}) {
      if (!j.contains(k) || !j.at(k).is_number()) throw SpecError(std::string(key) + ": range needs from, to, step");
    }
    std::ostringstream s;
    s.precision(17);
    s << j.at("from").get<double>() << ":" << j.at("to").get<double>() << ":" << j.at("step").get<double>();
    return parse_grid(s.str());
  }
  if (j.is_string()) return parse_grid(j.get<std::string>());
  throw SpecError(std::string(key) + ": expected a number, list, range object or string");
}

std::vector<std::string> strings_from_json(const json& j, const char* key) {
  if (j.is_string()) return {j.get<std::string>()};
  if (!j.is_array()) throw SpecError(std::string(key) + ": expected a string or a list of strings");
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw SpecError(std::string(key) + ": expected strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

Cluster cluster_or_throw(const std::string& name) {
  try {
    return cluster_by_name(name);
  } catch (const std::exception& e) {
    throw SpecError("unknown cluster '" + name + "': " + e.what());
  }
}

Momentum momentum_or_throw(const Cluster& c, const std::string& text) {
  Momentum k;
  try {
    k = parse_momentum(text, c.n_sites());
  } catch (const std::exception& e) {
    throw SpecError("momentum '" + text + "': " + e.what());
  }
  if (!c.is_allowed(k)) {
    throw SpecError("momentum " + k.to_string() + " is not allowed on the " + std::to_string(c.n_sites()) +
                    "-site cluster");
  }
  return k;
}

void check_grid(const std::vector<double>& g, const char* name) {
  if (g.empty()) throw SpecError(std::string(name) + " grid is empty");
  for (double v : g) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) throw SpecError(std::string(name) + " values must lie in [0, 1]");
  }
  if (g.size() < 2) return;
  const bool up = g[1] > g[0];
  for (std::size_t i = 1; i < g.size(); ++i) {
    if (up ? !(g[i] > g[i - 1]) : !(g[i] < g[i - 1])) throw SpecError(std::string(name) + " grid must be monotone");
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// One solved (or failed) sector at one parameter point.
struct SectorSolve {
  double sz = 0.0;
  Momentum k;
  std::vector<double> eigenvalues;
  std::vector<double> residuals;
  std::vector<std::string> labels;
  std::vector<StateVector> vectors;
  std::size_t matvecs = 0;
  bool failed = false;
  std::string message;
  bool resumed = false;
};

std::string point_tag(double gamma, double delta) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "g%.12g_d%.12g", gamma, delta);
  return buf;
}

std::string sector_tag(const std::string& cluster, double sz, const Momentum& k) {
  return "N" + cluster + "_sz" + std::to_string(static_cast<int>(sz)) + "_k" + std::to_string(k.kx) + "_" +
         std::to_string(k.ky);
}

json checkpoint_key(const SweepSpec& spec, const std::string& cluster, double gamma, double delta, double sz,
                    const Momentum& k) {
  return {{"cluster", cluster}, {"gamma", gamma},   {"delta", delta},           {"sz", sz},
          {"kx", k.kx},         {"ky", k.ky},        {"levels", spec.levels},    {"seed", spec.seed},
          {"tol", spec.tol},    {"krylov_dim", spec.krylov_dim}, {"max_matvecs", spec.max_matvecs}};
}

void save_vectors(const fs::path& path, const std::vector<StateVector>& vs) {
  std::ofstream out(path, std::ios::binary);
  const std::uint64_t count = vs.size(), dim = vs.empty() ? 0 : static_cast<std::uint64_t>(vs.front().size());
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
  for (const auto& v : vs) out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(Complex)));
}

std::optional<std::vector<StateVector>> load_vectors(const fs::path& path, std::size_t count, std::size_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::uint64_t c = 0, d = 0;
  in.read(reinterpret_cast<char*>(&c), sizeof(c));
  in.read(reinterpret_cast<char*>(&d), sizeof(d));
  if (!in || c != count || d != dim) return std::nullopt;
  std::vector<StateVector> out(count, StateVector(static_cast<Eigen::Index>(dim)));
  for (auto& v : out) in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(dim * sizeof(Complex)));
  if (!in) return std::nullopt;
  return out;
}

// Solves one sector, or restores it from a matching checkpoint.
SectorSolve solve_sector(const SweepSpec& spec, const std::string& cluster_name, const Cluster& cluster,
                         const HamiltonianOperator& op, const SectorBasis& basis, double gamma, double delta,
                         bool need_vectors, const fs::path& checkpoint_dir) {
  SectorSolve s;
  s.sz = basis.sz();
  s.k = *basis.momentum();
  const std::string stem = point_tag(gamma, delta) + "_" + sector_tag(cluster_name, s.sz, s.k);
  const fs::path meta = checkpoint_dir / (stem + ".json");
  const fs::path vec = checkpoint_dir / (stem + ".vec");
  const json key = checkpoint_key(spec, cluster_name, gamma, delta, s.sz, s.k);

  if (std::ifstream in{meta}) {
    try {
      const json j = json::parse(in);
      if (j.at("key") == key && !j.at("failed").get<bool>()) {
        s.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
        s.residuals = j.at("residuals").get<std::vector<double>>();
        s.labels = j.at("labels").get<std::vector<std::string>>();
        s.matvecs = j.at("matvecs").get<std::size_t>();
        bool ok = true;
        if (need_vectors) {
          auto v = load_vectors(vec, s.eigenvalues.size(), basis.dimension());
          ok = v.has_value();
          if (ok) s.vectors = std::move(*v);
        }
        if (ok) {
          s.resumed = true;
          return s;
        }
      }
    } catch (const std::exception&) {
      // Unreadable checkpoint: solve again.
    }
    s = SectorSolve{};
    s.sz = basis.sz();
    s.k = *basis.momentum();
  }

  SolverOptions opt;
  opt.tol = spec.tol;
  opt.seed = spec.seed;
  opt.krylov_dim = spec.krylov_dim;
  opt.max_matvecs = spec.max_matvecs;
  const int m = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(spec.levels), basis.dimension()));
  try {
    auto r = lowest_eigenpairs(op, basis, m, opt, spec.workers);
    s.eigenvalues = std::move(r.eigenvalues);
    s.residuals = std::move(r.residual_norms);
    s.matvecs = r.matvecs;
    s.labels.assign(s.eigenvalues.size(), "");
    if (s.sz == 0.0) {
      for (const auto& group : group_degenerate(s.eigenvalues)) {
        std::vector<StateVector> multiplet;
        for (auto i : group) multiplet.push_back(r.eigenvectors[i]);
        const auto label = label_point_group(multiplet, basis, cluster).label;
        for (auto i : group) s.labels[i] = label;
      }
    }
    if (need_vectors) s.vectors = std::move(r.eigenvectors);
  } catch (const ConvergenceError& e) {
    s.failed = true;
    s.message = e.what();
  }

  json j{{"key", key},
         {"eigenvalues", s.eigenvalues},
         {"residuals", s.residuals},
         {"labels", s.labels},
         {"matvecs", s.matvecs},
         {"failed", s.failed},
         {"message", s.message}};
  std::ofstream(meta) << j.dump(1) << "\n";
  if (need_vectors && !s.failed) save_vectors(vec, s.vectors);
  return s;
}

// Ground state of the k=(0,0) Sz=0 sector. It is not always A1: on the
// 20-site cluster it is odd under 90 degree rotations.
std::optional<std::size_t> target_level(const SectorSolve& s) {
  if (s.failed || s.eigenvalues.empty()) return std::nullopt;
  return 0;
}

// Clusters and bases are independent of the couplings and reused across points.
struct ClusterData {
  std::string name;
  Cluster cluster;
  std::vector<Momentum> momenta;
  std::map<int, std::vector<SectorBasis>> bases;  // 2*sz -> one basis per momentum

  ClusterData(std::string n, Cluster c) : name(std::move(n)), cluster(std::move(c)) {}

  const std::vector<SectorBasis>& sector_bases(double sz) {
    auto& v = bases[static_cast<int>(std::lround(2 * sz))];
    if (v.empty()) {
      for (const auto& k : momenta) v.push_back(build_momentum_basis(cluster, sz, k));
    }
    return v;
  }
};

class Writer {
 public:
  explicit Writer(const fs::path& path) : out_(path) {
    out_ << "# plaqed results, csv schema " << kCsvSchemaVersion << "\n" << csv_header() << "\n";
  }
  void write(const CsvRow& row) {
    out_ << csv_line(row) << "\n";
    ++rows_;
  }
  void flush() { out_.flush(); }
  std::size_t rows() const { return rows_; }

 private:
  std::ofstream out_;
  std::size_t rows_ = 0;
};

}  // namespace

Observable parse_observable(const std::string& name) {
  for (const auto& [o, n] : observable_names()) {
    if (n == name) return o;
  }
  throw SpecError("unknown observable '" + name + "'");
}

std::string to_string(Observable o) {
  for (const auto& [v, n] : observable_names()) {
    if (v == o) return n;
  }
  return "?";
}

bool SweepSpec::wants(Observable o) const { return std::find(observables.begin(), observables.end(), o) != observables.end(); }

std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw SpecError("bad number '" + s + "' in grid '" + text + "'");
    }
    if (used != s.size()) throw SpecError("bad number '" + s + "' in grid '" + text + "'");
    return v;
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw SpecError("range grid must be from:to:step, got '" + text + "'");
    const double from = number(parts[0]), to = number(parts[1]);
    double step = std::abs(number(parts[2]));
    if (!(step > 0.0)) throw SpecError("grid step must be nonzero");
    if (to < from) step = -step;
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-9));
    if (n > 100000) throw SpecError("grid too long");
    std::vector<double> out;
    for (long i = 0; i <= n; ++i) {
      // Rounded so that 0.5 + 3*0.05 prints as 0.65 in file names and rows.
      out.push_back(std::round((from + static_cast<double>(i) * step) * 1e12) / 1e12);
    }
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ',');) out.push_back(number(p));
  return out;
}

SweepSpec spec_from_json(const json& config, const SweepSpec& defaults) {
  if (!config.is_object()) throw SpecError("config must be a JSON object");
  SweepSpec s = defaults;
  static const std::set<std::string> known{"cluster", "gamma",  "delta",        "sectors",    "levels",
                                           "observables", "q", "dimer_class", "fss_clusters", "seed",
                                           "tol",     "krylov_dim", "max_matvecs", "workers", "long_run",
                                           "output"};
  for (const auto& [key, value] : config.items()) {
    if (!known.contains(key)) throw SpecError("unknown config key '" + key + "'");
  }
  try {
    if (config.contains("cluster")) s.cluster = config["cluster"].is_string() ? config["cluster"].get<std::string>()
                                                                              : std::to_string(config["cluster"].get<int>());
    if (config.contains("gamma")) s.gamma = grid_from_json(config["gamma"], "gamma");
    if (config.contains("delta")) s.delta = grid_from_json(config["delta"], "delta");
    if (config.contains("sectors")) s.sectors = strings_from_json(config["sectors"], "sectors");
    if (config.contains("levels")) s.levels = config["levels"].get<int>();
    if (config.contains("observables")) {
      s.observables.clear();
      for (const auto& o : strings_from_json(config["observables"], "observables")) s.observables.push_back(parse_observable(o));
    }
    if (config.contains("q")) s.q_list = strings_from_json(config["q"], "q");
    if (config.contains("dimer_class")) s.dimer_class = config["dimer_class"].get<std::string>();
    if (config.contains("fss_clusters")) s.fss_clusters = strings_from_json(config["fss_clusters"], "fss_clusters");
    if (config.contains("seed")) s.seed = config["seed"].get<std::uint64_t>();
    if (config.contains("tol")) s.tol = config["tol"].get<double>();
    if (config.contains("krylov_dim")) s.krylov_dim = config["krylov_dim"].get<int>();
    if (config.contains("max_matvecs")) s.max_matvecs = config["max_matvecs"].get<std::size_t>();
    if (config.contains("workers")) s.workers = config["workers"].get<int>();
    if (config.contains("long_run")) s.long_run = config["long_run"].get<bool>();
    if (config.contains("output")) s.output = config["output"].get<std::string>();
  } catch (const json::exception& e) {
    throw SpecError(std::string("config: ") + e.what());
  }
  return s;
}

json spec_to_json(const SweepSpec& s) {
  std::vector<std::string> obs;
  for (auto o : s.observables) obs.push_back(to_string(o));
  return {{"cluster", s.cluster},         {"gamma", s.gamma},
          {"delta", s.delta},             {"sectors", s.sectors},
          {"levels", s.levels},           {"observables", obs},
          {"q", s.q_list},                {"dimer_class", s.dimer_class},
          {"fss_clusters", s.fss_clusters}, {"seed", s.seed},
          {"tol", s.tol},                 {"krylov_dim", s.krylov_dim},
          {"max_matvecs", s.max_matvecs}, {"workers", s.workers},
          {"long_run", s.long_run},       {"output", s.output.string()}};
}

void validate(const SweepSpec& s) {
  const Cluster c = cluster_or_throw(s.cluster);
  check_grid(s.gamma, "gamma");
  check_grid(s.delta, "delta");
  if (s.levels < 1) throw SpecError("levels must be at least 1");
  if (s.observables.empty()) throw SpecError("no observables requested");
  if (!(s.tol > 0.0)) throw SpecError("tol must be positive");
  if (s.krylov_dim < 10) throw SpecError("krylov_dim must be at least 10");
  if (s.workers < 1) throw SpecError("workers must be at least 1");
  if (s.sectors.empty()) throw SpecError("no sectors requested");
  if (!(s.sectors.size() == 1 && s.sectors.front() == "all")) {
    for (const auto& k : s.sectors) momentum_or_throw(c, k);
  }
  if (s.dimer_class != "first" && s.dimer_class != "second") throw SpecError("dimer_class must be first or second");
  if (s.wants(Observable::structure_factor) || s.wants(Observable::fss)) {
    if (s.q_list.empty()) throw SpecError("structure factor needs at least one q");
    for (const auto& q : s.q_list) momentum_or_throw(c, q);
  }
  bool big = needs_solver(s) && c.n_sites() > 24;
  if (s.wants(Observable::fss)) {
    if (s.fss_clusters.size() < 2) throw SpecError("fss needs at least two clusters");
    std::set<int> sizes;
    for (const auto& name : s.fss_clusters) {
      const Cluster f = cluster_or_throw(name);
      if (!sizes.insert(f.n_sites()).second) throw SpecError("fss clusters must differ in size");
      for (const auto& q : s.q_list) momentum_or_throw(f, q);
      big = big || f.n_sites() > 24;
    }
  }
  if (s.wants(Observable::vbs_overlap) && c.n_sites() > 24) {
    throw SpecError("vbs_overlap expands states to the plain basis and is limited to 24 sites");
  }
  if (big && !s.long_run) throw SpecError("diagonalization beyond 24 sites is an extended run; pass --long-run");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string csv_header() { return "gamma,delta,cluster,sz,sector,level,observable,arg,value,status"; }

std::string csv_line(const CsvRow& r) {
  std::ostringstream out;
  out << format_number(r.gamma) << ',' << format_number(r.delta) << ',' << csv_field(r.cluster) << ','
      << format_number(r.sz) << ',' << csv_field(r.sector) << ',' << r.level << ',' << csv_field(r.observable) << ','
      << csv_field(r.arg) << ',' << format_number(r.value) << ',' << csv_field(r.status);
  return out.str();
}

SweepOutcome run_sweep(const SweepSpec& spec, const std::string& command_line) {
  validate(spec);
  SweepOutcome outcome;
  fs::create_directories(spec.output / "checkpoints");
  outcome.csv = spec.output / "results.csv";
  outcome.manifest = spec.output / "manifest.json";
  const fs::path checkpoints = spec.output / "checkpoints";

  auto make_data = [&](const std::string& name, const std::vector<std::string>& sectors) {
    ClusterData d(name, cluster_by_name(name));
    if (sectors.size() == 1 && sectors.front() == "all") {
      d.momenta = allowed_momenta(d.cluster);
    } else {
      for (const auto& k : sectors) d.momenta.push_back(parse_momentum(k, d.cluster.n_sites()));
    }
    return d;
  };

  const bool want_target = spec.wants(Observable::structure_factor) || spec.wants(Observable::dimer_correlations);
  std::vector<std::string> sectors = spec.sectors;
  ClusterData main = make_data(spec.cluster, sectors);
  const Momentum k0{0, 0, main.cluster.n_sites()};
  if (want_target && std::find(main.momenta.begin(), main.momenta.end(), k0) == main.momenta.end()) {
    main.momenta.insert(main.momenta.begin(), k0);
  }
  std::vector<ClusterData> fss_data;
  if (spec.wants(Observable::fss)) {
    for (const auto& name : spec.fss_clusters) fss_data.push_back(make_data(name, {"0,0"}));
  }
  const BondClass bond_class = spec.dimer_class == "first" ? BondClass::first_neighbor : BondClass::second_neighbor;

  json manifest{{"tool", "plaqed"},
                {"version", PLAQED_VERSION},
                {"csv_schema", kCsvSchemaVersion},
                {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                      "." + std::to_string(EIGEN_MINOR_VERSION)},
                {"compiler", __VERSION__},
                {"command_line", command_line},
                {"spec", spec_to_json(spec)},
                {"cluster",
                 {{"name", spec.cluster},
                  {"n_sites", main.cluster.n_sites()},
                  {"t1", {main.cluster.spanning_vectors().first.x, main.cluster.spanning_vectors().first.y}},
                  {"t2", {main.cluster.spanning_vectors().second.x, main.cluster.spanning_vectors().second.y}}}},
                {"started", now_utc()},
                {"status", "running"}};
  std::ofstream(outcome.manifest) << manifest.dump(2) << "\n";

  Writer writer(outcome.csv);
  const std::string& cname = spec.cluster;
  const bool solve = needs_solver(spec);

  std::optional<std::size_t> covering_count;
  if (spec.wants(Observable::coverings) || spec.wants(Observable::vbs_overlap)) {
    covering_count = enumerate_valid_coverings(make_covering_problem(main.cluster)).size();
  }

  for (double gamma : spec.gamma) {
    for (double delta : spec.delta) {
      auto row = [&](double sz, std::string sector, int level, std::string obs, std::string arg, double value,
                     std::string status = "ok") {
        writer.write({gamma, delta, cname, sz, std::move(sector), level, std::move(obs), std::move(arg), value,
                      std::move(status)});
      };
      const double nan = std::nan("");
      if (covering_count && spec.wants(Observable::coverings)) {
        row(0.0, "all", 0, "covering_count", "", static_cast<double>(*covering_count));
      }
      if (!solve) continue;

      const ModelParams params{1.0, gamma, delta};
      const auto op = build_operator(main.cluster, params);
      std::vector<SectorSolve> sz0, sz1;
      const auto& b0 = main.sector_bases(0.0);
      for (std::size_t i = 0; i < main.momenta.size(); ++i) {
        const bool vectors = spec.wants(Observable::vbs_overlap) || (want_target && main.momenta[i] == k0);
        sz0.push_back(solve_sector(spec, cname, main.cluster, op, b0[i], gamma, delta, vectors, checkpoints));
      }
      if (spec.wants(Observable::gaps)) {
        const auto& b1 = main.sector_bases(1.0);
        for (std::size_t i = 0; i < main.momenta.size(); ++i) {
          sz1.push_back(solve_sector(spec, cname, main.cluster, op, b1[i], gamma, delta, false, checkpoints));
        }
      }

      bool point_failed = false;
      for (const auto* group : {&sz0, &sz1}) {
        for (const auto& s : *group) {
          const std::string sector = SectorLabel{s.sz, s.k}.to_string();
          outcome.resumed_sectors += s.resumed;
          if (s.failed) {
            point_failed = true;
            ++outcome.failures;
            row(s.sz, sector, 0, "solver", s.message, nan, "failed");
            continue;
          }
          if (spec.wants(Observable::energies) || (spec.wants(Observable::gaps) && s.sz != 0.0)) {
            for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
              row(s.sz, sector, static_cast<int>(i), "energy", s.labels[i], s.eigenvalues[i]);
            }
          }
        }
      }

      auto as_results = [](const std::vector<SectorSolve>& v) {
        std::vector<SpectrumResult> out;
        for (const auto& s : v) {
          if (s.failed) continue;
          SpectrumResult r;
          r.sector = {s.sz, s.k};
          r.eigenvalues = s.eigenvalues;
          out.push_back(std::move(r));
        }
        return out;
      };

      if (spec.wants(Observable::gaps)) {
        const auto r0 = as_results(sz0), r1 = as_results(sz1);
        if (point_failed) {
          row(0.0, "all", 0, "spin_gap", "", nan, "skipped");
        } else {
          row(0.0, "all", 0, "spin_gap", "", spin_gap(r0, r1));
          for (const auto& d : energy_differences(r0, r1)) {
            row(0.0, d.sector, d.level, "energy_difference", d.spin, d.difference);
          }
        }
      }

      if (want_target) {
        const auto it = std::find_if(sz0.begin(), sz0.end(), [&](const SectorSolve& s) { return s.k == k0; });
        const auto idx = static_cast<std::size_t>(it - sz0.begin());
        const auto level = target_level(*it);
        const std::string sector = SectorLabel{0.0, k0}.to_string();
        if (!level) {
          if (spec.wants(Observable::structure_factor)) row(0.0, sector, 0, "M2", "", nan, "skipped");
          if (spec.wants(Observable::dimer_correlations)) row(0.0, sector, 0, "D_rm", "", nan, "skipped");
        } else {
          const int lv = static_cast<int>(*level);
          const auto& basis = b0[idx];
          const auto& vec = it->vectors[*level];
          if (spec.wants(Observable::structure_factor)) {
            const auto corr = spin_correlations(basis, vec);
            for (const auto& q : spec.q_list) {
              const Momentum qm = parse_momentum(q, main.cluster.n_sites());
              row(0.0, sector, lv, "M2", qm.to_string(), structure_factor(main.cluster, corr, qm));
            }
          }
          if (spec.wants(Observable::dimer_correlations)) {
            const auto rep = dimer_correlations(main.cluster, basis, vec, bond_class);
            const std::string obs = "dimer_" + spec.dimer_class;
            for (const auto& e : rep.entries) {
              std::ostringstream arg;
              arg << e.bond.first << "-" << e.bond.second << " r=(" << e.r.x << "," << e.r.y << ") r2=(" << e.r2.x
                  << "," << e.r2.y << ")";
              row(0.0, sector, lv, obs, arg.str(), e.value);
            }
            if (rep.farthest) {
              const auto& f = rep.entries[*rep.farthest];
              row(0.0, sector, lv, "D_rm", std::to_string(f.bond.first) + "-" + std::to_string(f.bond.second),
                  rep.farthest_value);
            }
            row(0.0, sector, lv, "dimer_max_imaginary", "", rep.max_imaginary);
          }
        }
      }

      if (spec.wants(Observable::fss)) {
        std::map<std::string, std::vector<std::pair<int, double>>> points;  // q -> (N, M2)
        bool fss_failed = false;
        for (auto& d : fss_data) {
          const auto fop = build_operator(d.cluster, params);
          const auto& fb = d.sector_bases(0.0);
          const auto s = solve_sector(spec, d.name, d.cluster, fop, fb[0], gamma, delta, true, checkpoints);
          outcome.resumed_sectors += s.resumed;
          const auto level = target_level(s);
          if (!level) {
            fss_failed = true;
            ++outcome.failures;
            row(0.0, "N=" + d.name, 0, "solver", s.message, nan, "failed");
            continue;
          }
          const auto corr = spin_correlations(fb[0], s.vectors[*level]);
          for (const auto& q : spec.q_list) {
            const Momentum qm = parse_momentum(q, d.cluster.n_sites());
            const double m2 = structure_factor(d.cluster, corr, qm);
            points[q].push_back({d.cluster.n_sites(), m2});
            row(0.0, "N=" + d.name, static_cast<int>(*level), "M2_fss", qm.to_string(), m2);
          }
        }
        for (const auto& q : spec.q_list) {
          const std::string qs = parse_momentum(q, main.cluster.n_sites()).to_string();
          if (fss_failed) {
            row(0.0, "fss", 0, "m0_squared", qs, nan, "skipped");
            continue;
          }
          const auto fit = fss_extrapolate(points[q]);
          row(0.0, "fss", 0, "m0_squared", qs, fit.m0_squared);
          row(0.0, "fss", 0, "fss_constant", qs, fit.constant);
        }
      }

      if (spec.wants(Observable::vbs_overlap)) {
        std::vector<StateVector> ground;
        for (std::size_t i = 0; i < sz0.size(); ++i) {
          for (std::size_t l = 0; l < sz0[i].eigenvalues.size() && !sz0[i].failed; ++l) {
            if (std::abs(sz0[i].eigenvalues[l]) < 1e-9) ground.push_back(b0[i].expand(sz0[i].vectors[l]));
          }
        }
        row(0.0, "all", 0, "ground_multiplicity", "", static_cast<double>(ground.size()), point_failed ? "partial" : "ok");
        if (ground.empty()) {
          row(0.0, "all", 0, "vbs_overlap", "", nan, "skipped");
        } else {
          const auto plain = build_sz_basis(main.cluster.n_sites(), 0.0);
          std::vector<VbsState> states;
          for (const auto& p : enumerate_valid_coverings(make_covering_problem(main.cluster))) {
            states.push_back(build_product_state(main.cluster, p, plain));
          }
          const auto o = ground_space_overlap(ground, states);
          row(0.0, "all", 0, "vbs_overlap", "coverings=" + std::to_string(states.size()), o.overlap);
          row(0.0, "all", 0, "vbs_rank", "", o.vbs_rank);
          row(0.0, "all", 0, "dimension_mismatch", "", o.dimension_mismatch ? 1.0 : 0.0);
        }
      }
      writer.flush();
    }
  }

  outcome.rows = writer.rows();
  manifest["finished"] = now_utc();
  manifest["status"] = outcome.failures == 0 ? "complete" : "partial";
  manifest["rows"] = outcome.rows;
  manifest["failures"] = outcome.failures;
  manifest["resumed_sectors"] = outcome.resumed_sectors;
  std::ofstream(outcome.manifest) << manifest.dump(2) << "\n";
  return outcome;
}

std::vector<std::string> figure_names() {
  return {"fig3-check", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "appendix-count"};
}

FigureRecipe figure_recipe(const std::string& name) {
  using O = Observable;
  auto spec = [](std::string cluster, std::vector<double> g, std::vector<double> d, std::vector<std::string> sectors,
                 int levels, std::vector<O> obs) {
    SweepSpec s;
    s.cluster = std::move(cluster);
    s.gamma = std::move(g);
    s.delta = std::move(d);
    s.sectors = std::move(sectors);
    s.levels = levels;
    s.observables = std::move(obs);
    return s;
  };
  const auto delta_cut = parse_grid("0.5:1.0:0.05");
  FigureRecipe r;
  r.name = name;
  if (name == "fig3-check") {
    r.description = "delta=1 ground-state multiplicity, covering count and VBS overlap on 16 and 20 sites";
    r.desk.push_back(spec("16", {0.0}, {1.0}, {"all"}, 1, {O::energies, O::coverings, O::vbs_overlap}));
    r.desk.push_back(spec("20", {1.0}, {1.0}, {"all"}, 1, {O::energies, O::coverings, O::vbs_overlap}));
  } else if (name == "fig4") {
    r.description = "gamma=1: lowest levels per sector, singlet/triplet tags and spin gap along delta";
    r.desk.push_back(spec("20", {1.0}, delta_cut, {"all"}, 2, {O::energies, O::gaps}));
    r.extended.push_back(spec("32", {1.0}, delta_cut, {"all"}, 2, {O::energies, O::gaps}));
  } else if (name == "fig5") {
    r.description = "gamma=1: M^2(pi,0) and D(r_m) of the k=(0,0) state along delta, with size extrapolation";
    auto s = spec("20", {1.0}, delta_cut, {"0,0"}, 2, {O::structure_factor, O::dimer_correlations});
    r.desk.push_back(s);
    auto e = s;
    e.cluster = "32";
    r.extended.push_back(e);
    auto f = spec("20", {1.0}, delta_cut, {"0,0"}, 2, {O::fss});
    r.extended.push_back(f);
  } else if (name == "fig6") {
    r.description = "gamma=0, delta=0.15: 1st-neighbor dimer correlation map on 32 sites";
    auto s = spec("32", {0.0}, {0.15}, {"0,0"}, 2, {O::dimer_correlations});
    s.dimer_class = "first";
    r.extended.push_back(s);
  } else if (name == "fig7") {
    r.description = "gamma=0: low levels and Q-resolved M^2 on 32 sites along delta";
    auto s = spec("32", {0.0}, parse_grid("0:0.5:0.025"), {"all"}, 2, {O::energies, O::structure_factor});
    s.q_list = {"pi,pi", "pi,0", "pi,pi/2", "pi/2,pi/2"};
    r.extended.push_back(s);
  } else if (name == "fig8") {
    r.description = "delta=0.375: M^2(pi,0) of the k=(0,0) state along gamma, with size extrapolation";
    r.desk.push_back(spec("20", parse_grid("0:1:0.1"), {0.375}, {"0,0"}, 2, {O::structure_factor}));
    r.extended.push_back(spec("20", parse_grid("0:1:0.1"), {0.375}, {"0,0"}, 2, {O::fss}));
  } else if (name == "fig9") {
    r.description = "gamma=0: 2nd-neighbor dimer correlation maps on 32 sites at delta=0.375 and 0.45";
    r.extended.push_back(spec("32", {0.0}, {0.375, 0.45}, {"0,0"}, 2, {O::dimer_correlations}));
  } else if (name == "appendix-count") {
    r.description = "valid dimer coverings on 16, 20 and 32 sites";
    for (const char* c : {"16", "20", "32"}) r.desk.push_back(spec(c, {1.0}, {1.0}, {"all"}, 1, {O::coverings}));
  } else {
    throw SpecError("unknown figure '" + name + "'");
  }
  return r;
}

int FigureOutcome::exit_code() const {
  for (const auto& p : parts) {
    if (p.exit_code() != 0) return 1;
  }
  return 0;
}

FigureOutcome run_figure(const std::string& name, const fs::path& output, bool long_run, int workers,
                         const std::string& command_line) {
  const auto recipe = figure_recipe(name);
  if (recipe.desk.empty() && !long_run) {
    throw SpecError("figure " + name + " needs 32-site runs; pass --long-run to start it");
  }
  std::vector<SweepSpec> parts = recipe.desk;
  if (long_run) parts.insert(parts.end(), recipe.extended.begin(), recipe.extended.end());
  for (auto& p : parts) {
    p.workers = workers;
    p.long_run = long_run;
  }
  for (const auto& p : parts) validate(p);

  FigureOutcome out;
  out.skipped_extended = long_run ? 0 : recipe.extended.size();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    auto p = parts[i];
    p.output = output / name / ("part-" + std::to_string(i) + "-N" + p.cluster);
    out.parts.push_back(run_sweep(p, command_line));
  }
  return out;
}

}  // namespace plaqed::sweep
