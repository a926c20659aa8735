#include <gradlattice/beam.hpp>
#include <gradlattice/cell_catalog.hpp>
#include <gradlattice/job.hpp>
#include <gradlattice/metrics.hpp>
#include <gradlattice/parallel.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace gradlattice;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kUsage = 2, kNumerical = 3 };

struct Globals {
  std::string config;
  std::string output = ".";
  int threads = 0;
  bool verbose = false;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cli", "cannot write '" + path.string() + "'");
  out << text;
}

int run_generate(const Globals& g, bool surface, bool override_checks) {
  if (g.config.empty()) throw Error("cli", "--config is required");
  JobConfig job = load_job(g.config);
  if (override_checks) job.override_checks = true;
  auto log = [&](const std::string& line) {
    if (g.verbose) std::cerr << "[" << job.name << "] " << line << '\n';
  };
  const auto outcome = run_job(job, g.output, surface, log);
  std::cout << outcome.report;
  for (const auto& p : outcome.written) std::cout << "wrote " << p.string() << '\n';
  switch (outcome.status) {
    case JobStatus::ok: return kOk;
    case JobStatus::openness_refused:
      std::cerr << "refused: r_max exceeds the openness limit (set printability.override to force)\n";
      return kCheckFailed;
    case JobStatus::printability_failed:
      std::cerr << "printability check failed\n";
      return kCheckFailed;
  }
  return kOk;
}

struct SimulateArgs {
  std::vector<std::string> cells;
  int n = 3;
  double voxel = 2.5;
  double radius = 0.4;
  double youngs = 1.8e6;
  double poisson = 0.47;
  double density = 1010;
  double bending = 1, torsion = 1, compression = 1;
  std::string torsion_mode = "couples";
  std::string csv = "campaign.csv";
};

int run_simulate(const Globals& g, const SimulateArgs& a) {
  CampaignOptions opt;
  if (!a.cells.empty()) {
    opt.cells.clear();
    for (const auto& c : a.cells) opt.cells.push_back(parse_cell_kind(c));
  }
  opt.n = a.n;
  opt.voxel_size = a.voxel;
  opt.radius = a.radius;
  opt.material = {a.youngs, a.poisson, a.density};
  opt.bending_load = a.bending;
  opt.torsion_load = a.torsion;
  opt.compression_load = a.compression;
  if (a.torsion_mode == "couples") opt.torsion = TorsionMode::force_couples;
  else if (a.torsion_mode == "moments") opt.torsion = TorsionMode::nodal_moments;
  else throw Error("cli", "--torsion must be couples or moments");
  if (!(opt.voxel_size > 0)) throw Error("cli", "--voxel must be positive");
  for (double l : {opt.bending_load, opt.torsion_load, opt.compression_load})
    if (!(l > 0)) throw Error("cli", "load magnitudes must be positive");

  if (g.verbose) std::cerr << "running " << opt.cells.size() * 3 << " cases\n";
  const auto rows = run_campaign(opt);
  std::cout << campaign_table(rows);
  const fs::path out = fs::path(g.output) / a.csv;
  write_file(out, campaign_csv(rows));
  std::cout << "wrote " << out.string() << '\n';
  for (const auto& r : rows)
    if (r.error) {
      std::cerr << to_string(r.cell) << " " << to_string(r.kind) << ": " << *r.error << '\n';
      return kNumerical;
    }
  return kOk;
}

struct CompareArgs {
  std::string reference;
  std::vector<std::string> candidates;
  int samples = 40;
  std::string report = "ranking.txt";
  std::string svg;
  std::vector<std::string> stiffness;
};

int run_compare(const Globals& g, const CompareArgs& a) {
  std::string text;
  if (!a.reference.empty()) {
    if (a.candidates.empty()) throw Error("cli", "compare needs at least one candidate");
    if (a.samples < 2) throw Error("cli", "--samples must be at least 2");
    const auto ref = read_trajectory_csv(a.reference);
    std::vector<std::pair<std::string, ComparisonResult>> designs;
    for (const auto& c : a.candidates)
      designs.emplace_back(fs::path(c).stem().string(), compare_trajectories(ref, read_trajectory_csv(c), a.samples));
    const auto ranked = rank_designs(std::move(designs));
    text += ranking_report(ranked);
    if (!a.svg.empty()) {
      const fs::path svg = fs::path(g.output) / a.svg;
      write_file(svg, ranking_svg(ranked));
      if (g.verbose) std::cerr << "wrote " << svg.string() << '\n';
    }
  } else if (!a.candidates.empty()) {
    throw Error("cli", "--reference is required with candidates");
  }

  if (!a.stiffness.empty()) {
    std::ostringstream s;
    s << "series                       stiffness_N_per_mm\n";
    for (const auto& f : a.stiffness) {
      char line[256];
      std::snprintf(line, sizeof line, "%-28s %.6f\n", fs::path(f).stem().string().c_str(),
                    fit_stiffness(read_stiffness_csv(f)));
      s << line;
    }
    if (!text.empty()) text += '\n';
    text += s.str();
  }
  if (text.empty()) throw Error("cli", "nothing to compare: give --reference and candidates or --stiffness");
  std::cout << text;
  const fs::path out = fs::path(g.output) / a.report;
  write_file(out, text);
  if (g.verbose) std::cerr << "wrote " << out.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graded lattice generator, printability checker and evaluation tools"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand
  Globals g;
  app.add_option("--config", g.config, "Job file (JSON)");
  app.add_option("--output", g.output, "Output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", g.verbose, "Progress on stderr");

  bool override_checks = false;
  auto* generate = app.add_subcommand("generate", "Build the lattice and write the STL and report");
  generate->add_flag("--override", override_checks, "Write output even when checks fail");
  auto* check = app.add_subcommand("check", "Printability only, no surfacing");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Beam-frame campaign over unit-cell blocks");
  simulate->add_option("--cells", sim.cells, "Cells to run (default all)")->delimiter(',');
  simulate->add_option("--n", sim.n, "Block size in cells")->capture_default_str();
  simulate->add_option("--voxel", sim.voxel, "Voxel size, mm")->capture_default_str();
  simulate->add_option("--radius", sim.radius, "Strut radius, mm")->capture_default_str();
  simulate->add_option("--youngs", sim.youngs, "Young's modulus, Pa")->capture_default_str();
  simulate->add_option("--poisson", sim.poisson, "Poisson's ratio")->capture_default_str();
  simulate->add_option("--density", sim.density, "Density, kg/m^3")->capture_default_str();
  simulate->add_option("--bending-load", sim.bending, "N")->capture_default_str();
  simulate->add_option("--torsion-load", sim.torsion, "N*mm")->capture_default_str();
  simulate->add_option("--compression-load", sim.compression, "N")->capture_default_str();
  simulate->add_option("--torsion", sim.torsion_mode, "couples or moments")->capture_default_str();
  simulate->add_option("--csv", sim.csv, "CSV name inside the output directory")->capture_default_str();

  CompareArgs cmp;
  auto* compare = app.add_subcommand("compare", "Rank tracked trajectories against a reference");
  compare->add_option("--reference", cmp.reference, "Reference trajectory CSV");
  compare->add_option("candidates", cmp.candidates, "Candidate trajectory CSVs");
  compare->add_option("--samples", cmp.samples, "Resampled points")->capture_default_str();
  compare->add_option("--report", cmp.report, "Report name inside the output directory")->capture_default_str();
  compare->add_option("--svg", cmp.svg, "Bar chart name inside the output directory");
  compare->add_option("--stiffness", cmp.stiffness, "Force-deflection CSVs to fit");

  double min_gap = 0.2;
  auto* catalog = app.add_subcommand("catalog", "Cell topologies and openness limits");
  catalog->add_option("--min-gap", min_gap, "mm")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    set_thread_count(g.threads);
    if (*generate) return run_generate(g, true, override_checks);
    if (*check) return run_generate(g, false, false);
    if (*simulate) return run_simulate(g, sim);
    if (*compare) return run_compare(g, cmp);
    if (*catalog) {
      std::cout << catalog_table(min_gap);
      return kOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.kind() == ErrorKind::numerical ? kNumerical : kUsage;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
