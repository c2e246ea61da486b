#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "plaqed/lattice.hpp"

namespace plaqed::sweep {

inline constexpr int kCsvSchemaVersion = 1;

/// Invalid configuration; maps to exit code 2.
class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Observable { energies, gaps, structure_factor, dimer_correlations, fss, coverings, vbs_overlap };

Observable parse_observable(const std::string& name);
std::string to_string(Observable o);

struct SweepSpec {
  std::string cluster = "20";
  std::vector<double> gamma{1.0};
  std::vector<double> delta{0.5};
  std::vector<std::string> sectors{"all"};  // momentum strings, or "all"
  int levels = 2;
  std::vector<Observable> observables{Observable::energies};
  std::vector<std::string> q_list{"pi,0"};     // structure_factor and fss
  std::string dimer_class = "second";          // "first" or "second"
  std::vector<std::string> fss_clusters{"20", "32"};
  std::uint64_t seed = 20070101;
  double tol = 1e-10;
  int krylov_dim = 200;
  std::size_t max_matvecs = 0;
  int workers = 1;
  bool long_run = false;
  std::filesystem::path output = "plaqed-out";

  bool wants(Observable o) const;
};

/// "0.5", "0.1,0.35,0.7" or "from:to:step" (inclusive, step sign free).
std::vector<double> parse_grid(const std::string& text);

/// Reads a JSON config. Grids may be a number, a list, or
/// {"from": a, "to": b, "step": s}. Throws SpecError.
SweepSpec spec_from_json(const nlohmann::json& config, const SweepSpec& defaults = {});
nlohmann::json spec_to_json(const SweepSpec& spec);

/// Throws SpecError for unknown clusters, non-monotone or out-of-range grids,
/// momenta not allowed on the cluster and N=32 work without long_run.
void validate(const SweepSpec& spec);

/// 12 significant digits, "nan" for missing values.
std::string format_number(double v);

struct CsvRow {
  double gamma = 0.0;
  double delta = 0.0;
  std::string cluster;
  double sz = 0.0;
  std::string sector;
  int level = 0;
  std::string observable;
  std::string arg;
  double value = 0.0;
  std::string status = "ok";
};

std::string csv_header();
std::string csv_line(const CsvRow& row);

struct SweepOutcome {
  std::size_t rows = 0;
  std::size_t failures = 0;
  std::size_t resumed_sectors = 0;
  std::filesystem::path csv;
  std::filesystem::path manifest;
  int exit_code() const { return failures == 0 ? 0 : 1; }
};

/// Runs every (gamma, delta) point and writes results.csv, manifest.json and
/// per-sector checkpoints under spec.output. Checkpoints that match the spec
/// are reused, so an interrupted sweep resumes where it stopped.
SweepOutcome run_sweep(const SweepSpec& spec, const std::string& command_line = {});

struct FigureRecipe {
  std::string name;
  std::string description;
  std::vector<SweepSpec> desk;      // runs by default
  std::vector<SweepSpec> extended;  // N=32, needs long_run
};

std::vector<std::string> figure_names();
/// Throws SpecError for an unknown name.
FigureRecipe figure_recipe(const std::string& name);

struct FigureOutcome {
  std::vector<SweepOutcome> parts;
  std::size_t skipped_extended = 0;
  int exit_code() const;
};

/// Runs the desk parts of a recipe, and the extended parts when long_run is
/// set. A recipe with nothing to run at desk scale is refused with SpecError.
FigureOutcome run_figure(const std::string& name, const std::filesystem::path& output, bool long_run, int workers,
                         const std::string& command_line = {});

}  // namespace plaqed::sweep
