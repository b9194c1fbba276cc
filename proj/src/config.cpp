#include "tokuq/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace tokuq {

namespace {

using nlohmann::json;

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw InputError("config: '" + where + "' must be an object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InputError("config: unknown key '" + k + "' in " + where);
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

CampaignConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  CampaignConfig c;
  try {
    check_keys(j, "config", {"geometry", "mesh", "profile", "solver", "surrogate", "noise", "mc", "compare", "jobs", "out"});
    if (!j.contains("geometry") || !j.contains("mesh")) throw InputError("config: 'geometry' and 'mesh' are required");
    c.geometry = resolve(base_dir, j.at("geometry").get<std::string>());
    c.mesh = resolve(base_dir, j.at("mesh").get<std::string>());
    if (j.contains("profile")) {
      const auto& p = j.at("profile");
      check_keys(p, "profile", {"alpha", "gamma", "beta", "lambda", "x0", "mu0", "peaked_on_axis"});
      read(p, "alpha", c.profile.alpha_p);
      read(p, "gamma", c.profile.gamma_p);
      read(p, "beta", c.profile.beta_p);
      read(p, "lambda", c.profile.lambda_s);
      read(p, "x0", c.profile.x0);
      read(p, "mu0", c.profile.mu0);
      read(p, "peaked_on_axis", c.profile.peaked_on_axis);
    }
    if (j.contains("solver")) {
      const auto& s = j.at("solver");
      check_keys(s, "solver", {"refinements", "theta", "anderson_depth", "anderson_start", "max_iter", "tol_override",
                               "marking_alpha", "boundary_order", "guess", "warm_start"});
      read(s, "refinements", c.solver.refinements);
      read(s, "theta", c.solver.theta);
      read(s, "anderson_depth", c.solver.anderson_depth);
      read(s, "anderson_start", c.solver.anderson_start);
      read(s, "max_iter", c.solver.max_iter);
      if (s.contains("tol_override") && !s.at("tol_override").is_null()) c.solver.tol_override = s.at("tol_override").get<double>();
      read(s, "marking_alpha", c.solver.marking_alpha);
      read(s, "boundary_order", c.solver.boundary_order);
      read(s, "warm_start", c.warm_start);
      if (s.contains("guess")) {
        const auto& g = s.at("guess");
        check_keys(g, "solver.guess", {"center", "a", "b", "K"});
        if (g.contains("center")) {
          const auto v = g.at("center").get<std::vector<double>>();
          if (v.size() != 2) throw InputError("config: solver.guess.center needs two numbers");
          c.solver.guess.center = {v[0], v[1]};
        }
        read(g, "a", c.solver.guess.a);
        read(g, "b", c.solver.guess.b);
        read(g, "K", c.solver.guess.K);
      }
    }
    if (j.contains("surrogate")) {
      const auto& s = j.at("surrogate");
      check_keys(s, "surrogate", {"level", "file"});
      read(s, "level", c.surrogate_level);
      if (s.contains("file")) c.surrogate_file = s.at("file").get<std::string>();
    }
    if (j.contains("noise")) {
      const auto& n = j.at("noise");
      check_keys(n, "noise", {"fraction", "coils"});
      read(n, "fraction", c.noise);
      read(n, "coils", c.noise_coils);
    }
    if (j.contains("mc")) {
      const auto& m = j.at("mc");
      check_keys(m, "mc", {"seed", "stop_eps", "batch", "max_samples", "radii"});
      read(m, "seed", c.seed);
      read(m, "stop_eps", c.stop_eps);
      read(m, "batch", c.batch);
      read(m, "max_samples", c.max_samples);
      if (m.contains("radii")) {
        const auto r = m.at("radii").get<std::vector<double>>();
        if (r.size() != 3) throw InputError("config: mc.radii needs three numbers");
        c.radii = {r[0], r[1], r[2]};
      }
    }
    if (j.contains("compare")) {
      const auto& m = j.at("compare");
      check_keys(m, "compare", {"samples"});
      read(m, "samples", c.compare_samples);
    }
    read(j, "jobs", c.jobs);
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  return c;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

CampaignConfig default_config(const std::filesystem::path& data_dir) {
  CampaignConfig c;
  c.geometry = data_dir / "iter_like.geom";
  c.mesh = data_dir / "iter_like_coarse.mesh";
  c.profile.lambda_s = 1.3e6;
  c.profile.x0 = 8.45;
  c.solver.refinements = 2;
  c.solver.theta = 0.5;
  c.solver.anderson_start = 1.0;
  c.noise_coils = {7, 8};
  return c;
}

void CampaignConfig::validate() const {
  if (!std::filesystem::exists(geometry)) throw InputError("geometry file not found: " + geometry.string());
  if (!std::filesystem::exists(mesh)) throw InputError("mesh file not found: " + mesh.string());
  try {
    profile.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (solver.refinements < 0) throw InputError("refinements must be >= 0");
  if (!(solver.theta > 0.0 && solver.theta <= 1.0)) throw InputError("theta must lie in (0, 1]");
  if (solver.anderson_depth < 0) throw InputError("anderson_depth must be >= 0");
  if (solver.max_iter < 1) throw InputError("max_iter must be >= 1");
  if (!(solver.marking_alpha > 0.0 && solver.marking_alpha < 1.0)) throw InputError("marking_alpha must lie in (0, 1)");
  if (solver.guess.a == 0.0 || solver.guess.b == 0.0) throw InputError("initial guess semi-axes must be nonzero");
  if (surrogate_level < 0 || surrogate_level > 12) throw InputError("surrogate level must lie in [0, 12]");
  if (!(noise >= 0.0 && noise < 1.0)) throw InputError("noise fraction must lie in [0, 1)");
  if (!(stop_eps > 0.0)) throw InputError("stop_eps must be positive");
  if (batch < 1) throw InputError("batch must be >= 1");
  if (max_samples < 1) throw InputError("max_samples must be >= 1");
  if (!(radii[0] > 0.0 && radii[0] < radii[1] && radii[1] < radii[2])) throw InputError("radii must be increasing and positive");
  if (compare_samples < 0) throw InputError("compare samples must be >= 0");
  if (jobs < 0) throw InputError("jobs must be >= 0");
}

std::vector<int> CampaignConfig::noise_indices(const ReactorGeometry& g) const {
  std::vector<int> idx;
  for (int id : noise_coils) {
    int found = -1;
    for (std::size_t i = 0; i < g.coils.size(); ++i)
      if (g.coils[i].id == id) found = static_cast<int>(i);
    if (found < 0) throw InputError("noise coil id " + std::to_string(id) + " not in the geometry");
    idx.push_back(found);
  }
  return idx;
}

NoiseModel CampaignConfig::noise_model(const ReactorGeometry& g) const {
  return NoiseModel{g.reference_currents(), noise, noise_indices(g)};
}

int CampaignConfig::resolved_jobs() const {
  if (jobs > 0) return jobs;
  if (const char* env = std::getenv("TOKAMAK_UQ_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace tokuq
