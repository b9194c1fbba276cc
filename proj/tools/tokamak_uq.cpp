#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tokuq/config.hpp"
#include "tokuq/parallel.hpp"
#include "tokuq/pipeline.hpp"
#include "tokuq/report.hpp"

namespace fs = std::filesystem;
using namespace tokuq;
using nlohmann::ordered_json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInput = 2;
constexpr int kNumerical = 3;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> level;
  std::optional<double> noise;
  std::string evaluator = "direct";
  std::optional<int> jobs;
  std::optional<std::string> out;
  std::optional<int> refinements;
  std::optional<std::size_t> max_samples;
  std::optional<int> samples;
};

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CampaignConfig make_config(const Overrides& o) {
  CampaignConfig c = o.config.empty() ? default_config(TOKUQ_DATA_DIR) : load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.level) c.surrogate_level = *o.level;
  if (o.noise) c.noise = *o.noise;
  if (o.jobs) c.jobs = *o.jobs;
  if (o.out) c.out = *o.out;
  if (o.refinements) c.solver.refinements = *o.refinements;
  if (o.max_samples) c.max_samples = *o.max_samples;
  if (o.samples) c.compare_samples = *o.samples;
  c.validate();
  return c;
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

ordered_json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot read " + path.string());
  try {
    return ordered_json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

class Campaign {
 public:
  explicit Campaign(CampaignConfig cfg) : cfg_(std::move(cfg)) {
    geometry_ = load_geometry(cfg_.geometry);
    coarse_ = std::make_shared<const TriMesh>(read_mesh(cfg_.mesh, &geometry_));
    fs::create_directories(cfg_.out);
  }

  const CampaignConfig& config() const { return cfg_; }
  const ReactorGeometry& geometry() const { return geometry_; }
  const MeshPtr& coarse() const { return coarse_; }
  fs::path out(const std::string& name) const { return cfg_.out / name; }
  fs::path surrogate_path() const { return cfg_.surrogate_file.is_absolute() ? cfg_.surrogate_file : cfg_.out / cfg_.surrogate_file; }
  int jobs() const { return cfg_.resolved_jobs(); }

  EquilibriumSolution solve_reference() const {
    return solve_free_boundary(geometry_, coarse_, geometry_.reference_currents(), cfg_.profile, cfg_.solver);
  }

  /// Common mesh, reference evaluation on it and the direct evaluator.
  void prepare_uq() {
    if (space_) return;
    const auto t0 = std::chrono::steady_clock::now();
    space_ = std::make_shared<const CommonSpace>(geometry_, coarse_, cfg_.solver.refinements);
    const EquilibriumSolution ref = solve_reference();
    if (!ref.ok()) throw NumericalFailure("reference solve: " + to_string(ref.status) + " " + ref.message);
    reference_ = evaluate_interior(*space_, space_->project(ref.field));
    if (!reference_.ok) throw NumericalFailure("reference equilibrium has no confined plasma on the common mesh");
    direct_ = direct_evaluator(space_, cfg_.profile, cfg_.solver, cfg_.warm_start ? warm_start_from(ref, coarse_) : nullptr);
    std::cerr << "common mesh: " << space_->mesh()->num_vertices() << " vertices, " << space_->interior().size()
              << " interior (" << std::fixed << std::setprecision(2) << seconds_since(t0) << " s)\n"
              << std::defaultfloat;
  }

  const CommonSpacePtr& space() const { return space_; }
  const Evaluation& reference() const { return reference_; }
  const Evaluator& direct() const { return direct_; }
  NoiseModel noise_model() const { return cfg_.noise_model(geometry_); }

  std::shared_ptr<const Surrogate> load_surrogate() const {
    const fs::path p = surrogate_path();
    if (!fs::exists(p)) throw InputError("surrogate file not found: " + p.string());
    auto s = std::make_shared<const Surrogate>(read_surrogate(p));
    if (space_ && s->mesh_hash != space_->mesh()->hash())
      throw InputError(p.string() + " was built on a different common mesh");
    return s;
  }

 private:
  CampaignConfig cfg_;
  ReactorGeometry geometry_;
  MeshPtr coarse_;
  CommonSpacePtr space_;
  Evaluation reference_;
  Evaluator direct_;
};

int cmd_solve(const Overrides& o) {
  Campaign c(make_config(o));
  const auto t0 = std::chrono::steady_clock::now();
  const EquilibriumSolution sol = c.solve_reference();
  const double secs = seconds_since(t0);
  const FieldFeatures f = analyze_field(sol.field, c.geometry());
  write_mesh(*sol.field.mesh, c.out("solution.mesh"));
  write_field_csv(sol.field, c.out("psi.csv"));
  write_field_vtk(sol.field, c.out("psi.vtk"), "psi");
  write_json(c.out("solution.json"), solution_json(sol, f));
  write_text(c.out("equilibrium.svg"), equilibrium_svg(c.geometry(), sol.field, f));
  std::cout << "status " << to_string(sol.status) << ", boundary " << to_string(f.kind) << ", "
            << sol.field.mesh->num_vertices() << " vertices, " << secs << " s\n";
  if (f.xpoint) std::cout << "x-point (" << f.xpoint->x << ", " << f.xpoint->y << ")\n";
  if (f.shape)
    std::cout << "eps " << f.shape->eps << " kappa " << f.shape->kappa_e << " delta_u " << f.shape->delta_u
              << " delta_l " << f.shape->delta_l << "\n";
  if (!sol.ok()) {
    std::cerr << "error: solve " << to_string(sol.status) << (sol.message.empty() ? "" : ": " + sol.message) << "\n";
    return kNumerical;
  }
  return kOk;
}

VectorFunction counting(VectorFunction f, std::atomic<std::size_t>& calls) {
  return [f = std::move(f), &calls](const std::vector<double>& x) {
    ++calls;
    return f(x);
  };
}

BuildOptions build_options(const Campaign& c) {
  BuildOptions b;
  b.jobs = c.jobs();
  b.mesh_hash = c.space()->mesh()->hash();
  b.on_level = [](int level, std::size_t n) { std::cerr << "level " << level << ": " << n << " solves\n"; };
  return b;
}

void save_surrogate(const Campaign& c, const Surrogate& s, double secs, std::size_t calls) {
  const fs::path p = c.surrogate_path();
  write_surrogate(s, p);
  write_text(fs::path(p).replace_extension(".json"), surrogate_manifest(s, secs, calls));
  std::cout << "surrogate level " << s.grid.level << ", " << s.grid.size() << " nodes, " << calls << " solver calls, "
            << s.failed_nodes.size() << " failed, " << secs << " s -> " << p.string() << "\n";
}

int cmd_build(const Overrides& o) {
  Campaign c(make_config(o));
  c.prepare_uq();
  const NoiseModel nm = c.noise_model();
  std::atomic<std::size_t> calls{0};
  const auto t0 = std::chrono::steady_clock::now();
  const Surrogate s = build_surrogate(counting(surrogate_target(c.direct(), nm), calls), static_cast<int>(nm.dims().size()),
                                      c.config().surrogate_level, nm.box(), build_options(c));
  save_surrogate(c, s, seconds_since(t0), calls);
  return kOk;
}

int cmd_refine(const Overrides& o) {
  Campaign c(make_config(o));
  c.prepare_uq();
  Surrogate s = *c.load_surrogate();
  const int target = o.level ? *o.level : s.grid.level + 1;
  if (target <= s.grid.level) throw InputError("surrogate is already at level " + std::to_string(s.grid.level));
  const NoiseModel nm = c.noise_model();
  if (nm.dims().size() != static_cast<std::size_t>(s.grid.d)) throw InputError("surrogate dimension does not match the noise model");
  std::atomic<std::size_t> calls{0};
  const VectorFunction f = counting(surrogate_target(c.direct(), nm), calls);
  const auto t0 = std::chrono::steady_clock::now();
  while (s.grid.level < target) s = refine_level(s, f, build_options(c));
  save_surrogate(c, s, seconds_since(t0), calls);
  return kOk;
}

int cmd_mc(const Overrides& o) {
  Campaign c(make_config(o));
  if (o.evaluator != "direct" && o.evaluator != "surrogate") throw InputError("unknown evaluator " + o.evaluator);
  c.prepare_uq();
  const NoiseModel nm = c.noise_model();
  Evaluator eval = c.direct();
  if (o.evaluator == "surrogate") eval = surrogate_evaluator(c.space(), c.load_surrogate(), nm);

  McOptions mo;
  mo.stop_eps = c.config().stop_eps;
  mo.batch = c.config().batch;
  mo.max_samples = c.config().max_samples;
  mo.jobs = c.jobs();
  mo.seed = c.config().seed;
  mo.radii = c.config().radii;
  mo.reference_xpoint = c.reference().features.xpoint;
  const McReport r = run_mc(eval, nm, mo);

  const std::string stem = "mc_" + o.evaluator;
  write_json(c.out(stem + ".json"), mc_report_json(r, false));
  write_json(c.out(stem + "_timing.json"), {{"evaluator", o.evaluator},
                                            {"samples", r.n_samples},
                                            {"jobs", mo.jobs},
                                            {"mean_seconds_per_sample", r.mean_seconds}});
  write_samples_csv(r, c.out(stem + ".csv"));
  write_text(c.out(stem + ".svg"), scatter_svg(c.geometry(), r));

  std::cout << o.evaluator << ": " << r.n_samples << " samples, " << r.n_failed << " failed, margin " << r.final_margin
            << ", " << r.mean_seconds << " s/sample\n";
  for (const auto& [k, n] : r.categories) std::cout << "  " << k << " " << n << "\n";
  if (!r.converged) {
    std::cerr << "error: campaign stopped at " << r.n_samples << " samples with margin " << r.final_margin << " > "
              << r.stop_eps << "\n";
    return kNumerical;
  }
  return kOk;
}

int cmd_compare(const Overrides& o) {
  CampaignConfig cfg = make_config(o);
  if (cfg.compare_samples <= 0) throw InputError("empty sample set");
  Campaign c(std::move(cfg));
  c.prepare_uq();
  const auto s = c.load_surrogate();
  const NoiseModel nm = c.noise_model();
  const std::size_t n = static_cast<std::size_t>(c.config().compare_samples);

  std::vector<CurrentVector> currents(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto rng = sample_rng(c.config().seed, k);
    currents[k] = sample_currents(nm, rng);
  }
  std::vector<Evaluation> exact(n);
  parallel_for(n, c.jobs(), [&](std::size_t k) { exact[k] = c.direct()(currents[k]); });

  std::vector<std::vector<double>> ref;
  std::vector<std::size_t> used;
  for (std::size_t k = 0; k < n; ++k) {
    if (!exact[k].ok || exact[k].psi.empty()) continue;
    ref.push_back(exact[k].psi);
    used.push_back(k);
  }
  if (ref.empty()) throw NumericalFailure("every direct solve of the sample set failed");

  std::ostringstream csv;
  csv << std::setprecision(17) << "level,nodes,E\n";
  std::cout << "level  nodes  E (" << ref.size() << " samples)\n";
  for (int level = 0; level <= s->grid.level; ++level) {
    const Surrogate t = truncate_surrogate(*s, level);
    std::vector<std::vector<double>> approx;
    for (std::size_t k : used) approx.push_back(eval_surrogate(t, nm.active_values(currents[k])));
    const double e = mean_relative_error(approx, ref);
    csv << level << ',' << t.grid.size() << ',' << e << '\n';
    std::cout << std::setw(5) << level << std::setw(7) << t.grid.size() << "  " << std::scientific << std::setprecision(3)
              << e << std::defaultfloat << "\n";
  }
  write_text(c.out("compare.csv"), csv.str());
  if (used.size() < n) std::cerr << "warning: " << n - used.size() << " direct solves failed and were skipped\n";
  return kOk;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

int cmd_report(const Overrides& o) {
  const CampaignConfig cfg = make_config(o);
  std::map<std::string, ordered_json> runs, timing;
  for (const char* ev : {"direct", "surrogate"}) {
    const fs::path p = cfg.out / (std::string("mc_") + ev + ".json");
    if (fs::exists(p)) runs[ev] = read_json(p);
    const fs::path t = cfg.out / (std::string("mc_") + ev + "_timing.json");
    if (fs::exists(t)) timing[ev] = read_json(t);
  }
  if (runs.empty()) throw InputError("no mc_*.json in " + cfg.out.string());

  std::ostringstream md;
  md << "# Campaign report\n\n";
  md << "| | ";
  for (const auto& [ev, j] : runs) md << ev << " | ";
  md << "\n|---|";
  for (std::size_t i = 0; i < runs.size(); ++i) md << "---|";
  md << "\n";
  auto row = [&](const std::string& label, auto get) {
    md << "| " << label << " | ";
    for (const auto& [ev, j] : runs) md << get(j) << " | ";
    md << "\n";
  };
  row("samples", [](const ordered_json& j) { return std::to_string(j["n_samples"].get<std::size_t>()); });
  row("failed", [](const ordered_json& j) { return std::to_string(j["n_failed"].get<std::size_t>()); });
  row("converged", [](const ordered_json& j) { return std::string(j["converged"].get<bool>() ? "yes" : "no"); });
  row("final margin", [](const ordered_json& j) { return fmt(j["final_margin"].get<double>()); });
  const ordered_json& first = runs.begin()->second;
  for (const auto& [name, _] : first["features"].items()) {
    row("mean " + name, [&](const ordered_json& j) {
      return j["features"].contains(name) ? fmt(j["features"][name]["mean"].get<double>()) : std::string("-");
    });
  }
  for (int a = 0; a < 3; ++a) {
    row("x-point annulus " + std::to_string(a + 1), [&](const ordered_json& j) { return fmt(j["annuli"]["frequencies"][a].get<double>()); });
  }
  std::set<std::string> cats;
  for (const auto& [ev, j] : runs)
    for (const auto& [k, _] : j["categories"].items()) cats.insert(k);
  for (const auto& k : cats)
    row(k, [&](const ordered_json& j) { return j["categories"].contains(k) ? j["categories"][k].dump() : std::string("0"); });
  if (!timing.empty()) {
    md << "\n";
    for (const auto& [ev, t] : timing) md << "- " << ev << ": " << fmt(t["mean_seconds_per_sample"].get<double>()) << " s per sample\n";
    if (timing.count("direct") && timing.count("surrogate"))
      md << "- speedup: " << fmt(timing["direct"]["mean_seconds_per_sample"].get<double>() /
                                 timing["surrogate"]["mean_seconds_per_sample"].get<double>())
         << "x\n";
  }
  const fs::path cmp = cfg.out / "compare.csv";
  if (fs::exists(cmp)) {
    std::ifstream is(cmp);
    md << "\n## Surrogate error by level\n\n```\n" << is.rdbuf() << "```\n";
  }
  write_text(cfg.out / "report.md", md.str());
  std::cout << md.str();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Free-boundary equilibrium solver with sparse-grid uncertainty quantification"};
  app.require_subcommand(1);
  Overrides o;
  app.add_option("--config", o.config, "campaign configuration (JSON)")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "sampling seed");
  app.add_option("--level", o.level, "surrogate level");
  app.add_option("--noise", o.noise, "relative coil-current noise");
  app.add_option("--evaluator", o.evaluator, "mc evaluator")->check(CLI::IsMember({"direct", "surrogate"}));
  app.add_option("--jobs", o.jobs, "worker threads (default TOKAMAK_UQ_THREADS or all cores)");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--refinements", o.refinements, "adaptive refinement depth");
  app.add_option("--max-samples", o.max_samples, "mc sample cap");
  app.add_option("--samples", o.samples, "compare sample count");

  int (*run)(const Overrides&) = nullptr;
  auto sub = [&](const char* name, const char* help, int (*f)(const Overrides&)) {
    app.add_subcommand(name, help)->fallthrough()->callback([&run, f] { run = f; });
  };
  sub("solve", "reference equilibrium with features and plots", cmd_solve);
  sub("build-surrogate", "sparse-grid surrogate from direct solves", cmd_build);
  sub("refine-surrogate", "add levels to an existing surrogate", cmd_refine);
  sub("mc", "Monte Carlo campaign", cmd_mc);
  sub("compare", "surrogate error per level on a shared sample set", cmd_compare);
  sub("report", "summarise mc and compare outputs", cmd_report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  try {
    return run(o);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const GeometryError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const MeshError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const SurrogateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const NumericalFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
}
