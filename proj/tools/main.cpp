// plaqed: sweeps, figure recipes and cluster utilities for the plaquette model.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plaqed/coverings.hpp"
#include "plaqed/hamiltonian.hpp"
#include "plaqed/parallel.hpp"
#include "plaqed/vbs.hpp"
#include "sweep.hpp"

using namespace plaqed;
namespace sw = plaqed::sweep;

namespace {

constexpr int kExitInvalid = 2;

std::string join_args(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) out += (i ? " " : "") + std::string(argv[i]);
  return out;
}

int dump_cluster_cmd(const std::string& name) {
  const Cluster c = cluster_by_name(name);
  std::cout << dump_cluster(c);
  return 0;
}

int coverings_cmd(const std::string& name, bool admit_nearest, bool diagrams) {
  const Cluster c = cluster_by_name(name);
  const auto found = enumerate_valid_coverings(make_covering_problem(c, admit_nearest));
  std::cout << "cluster " << name << ": " << found.size() << " valid coverings\n";
  const auto report = check_counting_identities(c);
  std::cout << "plaquettes " << report.n_plaquettes << ", dimers per covering " << report.n_dimers
            << ", counting identities " << (report.ok ? "ok" : "VIOLATED") << "\n";
  for (const auto& [count, pairs] : report.diagonal_containment) {
    std::cout << "  diagonal pairs in " << count << " plaquettes: " << pairs << "\n";
  }
  for (const auto& [count, pairs] : report.axial_containment) {
    std::cout << "  axial pairs in " << count << " plaquettes: " << pairs << "\n";
  }
  if (diagrams) {
    for (std::size_t i = 0; i < found.size(); ++i) {
      std::cout << "\ncovering " << i << "\n" << pattern_diagram(c, found[i]);
    }
  }
  return 0;
}

int vbs_check_cmd(const std::string& name, double gamma, double delta) {
  const Cluster c = cluster_by_name(name);
  if (c.n_sites() > 24) {
    std::cerr << "vbs-check builds plain-basis states and is limited to 24 sites\n";
    return kExitInvalid;
  }
  const auto plain = build_sz_basis(c.n_sites(), 0.0);
  const auto op = build_operator(c, {1.0, gamma, delta});
  std::vector<VbsState> states;
  for (const auto& p : enumerate_valid_coverings(make_covering_problem(c))) {
    states.push_back(build_product_state(c, p, plain));
  }
  std::printf("cluster %s, gamma=%.12g delta=%.12g, %zu covering states\n", name.c_str(), gamma, delta, states.size());
  std::printf("%-6s %-9s %-14s %-14s\n", "state", "dimers", "<H>", "|H psi - <H> psi|");
  for (std::size_t i = 0; i < states.size(); ++i) {
    const StateVector hv = apply(op, plain, states[i].amplitudes);
    const Complex e = states[i].amplitudes.dot(hv);
    const double res = (hv - e * states[i].amplitudes).norm();
    const auto& cls = states[i].pattern.bond_class;
    const bool diagonal = std::all_of(cls.begin(), cls.end(), [](DimerClass d) { return d == DimerClass::diagonal; });
    const bool axial = std::all_of(cls.begin(), cls.end(), [](DimerClass d) { return d == DimerClass::axial; });
    std::printf("%-6zu %-9s %-14.6e %-14.6e\n", i, diagonal ? "diagonal" : axial ? "axial" : "mixed", e.real(), res);
  }
  const auto g = gram_matrix(states);
  std::cout << "gram matrix (rank " << numerical_rank(g) << "):\n" << g << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact diagonalization sweeps for the six-site plaquette model"};
  app.require_subcommand(1);
  const std::string command_line = join_args(argc, argv);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep from a JSON config and/or flags");
  std::string config_path, cluster, gamma, delta, sectors, observables, qs, dimer_class, output;
  int levels = 0, krylov_dim = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::size_t max_matvecs = 0;
  int workers = 0;
  bool long_run = false;
  sweep->add_option("-c,--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  sweep->add_option("--cluster", cluster, "Cluster name: 8, 16, 20 or 32");
  sweep->add_option("--gamma", gamma, "Value, comma list, or from:to:step");
  sweep->add_option("--delta", delta, "Value, comma list, or from:to:step");
  sweep->add_option("--sectors", sectors, "'all' or momenta separated by ';', e.g. '0,0;pi,0'");
  sweep->add_option("--levels", levels, "Levels per sector");
  sweep->add_option("--observables", observables,
                    "Comma list of energies,gaps,structure_factor,dimer_correlations,fss,coverings,vbs_overlap");
  sweep->add_option("--q", qs, "Structure-factor momenta separated by ';'");
  sweep->add_option("--dimer-class", dimer_class, "first or second");
  sweep->add_option("--seed", seed, "Lanczos start-vector seed");
  sweep->add_option("--tol", tol, "Residual tolerance");
  sweep->add_option("--krylov-dim", krylov_dim, "Krylov basis size before restart");
  sweep->add_option("--max-matvecs", max_matvecs, "Matvec budget per sector (0: 500*(levels+1))");
  sweep->add_option("-o,--output", output, "Output directory");
  sweep->add_option("-j,--workers", workers, "Threads per matvec (default: PLAQED_WORKERS or 1)");
  sweep->add_flag("--long-run", long_run, "Allow diagonalizations beyond 24 sites");

  // figure
  auto* figure = app.add_subcommand("figure", "Reproduce the data series of a named figure");
  std::string figure_name, figure_output = "plaqed-figures";
  bool figure_long = false, figure_list = false;
  figure->add_option("name", figure_name, "Recipe name");
  figure->add_option("-o,--output", figure_output, "Output directory");
  figure->add_flag("--long-run", figure_long, "Include 32-site parts");
  figure->add_flag("--list", figure_list, "List recipes");
  int figure_workers = 0;
  figure->add_option("-j,--workers", figure_workers, "Threads per matvec");

  auto* dump = app.add_subcommand("dump-cluster", "Print sites, bonds, plaquettes and symmetry tables");
  std::string dump_name;
  dump->add_option("cluster", dump_name)->required();

  auto* cov = app.add_subcommand("coverings", "Count valid dimer coverings and print them");
  std::string cov_name;
  bool admit_nearest = false, no_diagrams = false;
  cov->add_option("cluster", cov_name)->required();
  cov->add_flag("--admit-nearest", admit_nearest, "Also allow nearest-neighbour dimers");
  cov->add_flag("--no-diagrams", no_diagrams, "Only print counts");

  auto* vbs = app.add_subcommand("vbs-check", "Energies, residuals and overlaps of the covering product states");
  std::string vbs_name;
  double vbs_gamma = 0.0, vbs_delta = 1.0;
  vbs->add_option("cluster", vbs_name)->required();
  vbs->add_option("--gamma", vbs_gamma)->check(CLI::Range(0.0, 1.0));
  vbs->add_option("--delta", vbs_delta)->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  try {
    if (*sweep) {
      sw::SweepSpec spec;
      spec.workers = default_workers();
      if (!config_path.empty()) {
        std::ifstream in(config_path);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
          throw sw::SpecError(std::string("cannot parse config: ") + e.what());
        }
        spec = sw::spec_from_json(j, spec);
      }
      // Flags win over the config file.
      auto split = [](const std::string& s, char sep) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        for (std::string p; std::getline(ss, p, sep);) {
          if (!p.empty()) out.push_back(p);
        }
        return out;
      };
      if (!cluster.empty()) spec.cluster = cluster;
      if (!gamma.empty()) spec.gamma = sw::parse_grid(gamma);
      if (!delta.empty()) spec.delta = sw::parse_grid(delta);
      if (!sectors.empty()) spec.sectors = split(sectors, ';');
      if (levels) spec.levels = levels;
      if (!observables.empty()) {
        spec.observables.clear();
        for (const auto& o : split(observables, ',')) spec.observables.push_back(sw::parse_observable(o));
      }
      if (!qs.empty()) spec.q_list = split(qs, ';');
      if (!dimer_class.empty()) spec.dimer_class = dimer_class;
      if (sweep->count("--seed")) spec.seed = seed;
      if (sweep->count("--tol")) spec.tol = tol;
      if (krylov_dim) spec.krylov_dim = krylov_dim;
      if (sweep->count("--max-matvecs")) spec.max_matvecs = max_matvecs;
      if (!output.empty()) spec.output = output;
      if (workers) spec.workers = workers;
      if (long_run) spec.long_run = true;

      const auto result = sw::run_sweep(spec, command_line);
      std::cout << result.rows << " rows -> " << result.csv.string() << " (" << result.failures << " failed sectors, "
                << result.resumed_sectors << " resumed)\n";
      return result.exit_code();
    }
    if (*figure) {
      if (figure_list) {
        for (const auto& n : sw::figure_names()) {
          const auto r = sw::figure_recipe(n);
          std::cout << n << (r.desk.empty() ? " [extended]" : "") << ": " << r.description << "\n";
        }
        return 0;
      }
      if (figure_name.empty()) throw sw::SpecError("figure needs a recipe name (see --list)");
      const auto result = sw::run_figure(figure_name, figure_output, figure_long,
                                         figure_workers ? figure_workers : default_workers(), command_line);
      for (const auto& p : result.parts) std::cout << p.rows << " rows -> " << p.csv.string() << "\n";
      if (result.skipped_extended) {
        std::cout << result.skipped_extended << " 32-site part(s) skipped; pass --long-run to include them\n";
      }
      return result.exit_code();
    }
    if (*dump) return dump_cluster_cmd(dump_name);
    if (*cov) return coverings_cmd(cov_name, admit_nearest, !no_diagrams);
    if (*vbs) return vbs_check_cmd(vbs_name, vbs_gamma, vbs_delta);
  } catch (const sw::SpecError& e) {
    std::cerr << "invalid spec: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kExitInvalid;
  }
  return 0;
}
