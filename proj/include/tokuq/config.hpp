#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tokuq/solver.hpp"
#include "tokuq/uq.hpp"

namespace tokuq {

/// Bad or missing input (exit status 2 in the CLI).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CampaignConfig {
  std::filesystem::path geometry;
  std::filesystem::path mesh;
  ProfileParams profile;
  SolverOptions solver;
  bool warm_start = true;       // UQ solves start from the reference equilibrium
  int surrogate_level = 2;
  std::filesystem::path surrogate_file = "surrogate.bin";
  double noise = 0.01;
  std::vector<int> noise_coils;  // coil ids as in the geometry file; empty = all
  std::uint64_t seed = 1;
  double stop_eps = 0.01;
  int batch = 100;
  std::size_t max_samples = 5000;
  std::array<double, 3> radii{0.032, 0.048, 0.064};
  int compare_samples = 100;
  int jobs = 0;                 // 0: TOKAMAK_UQ_THREADS, then hardware concurrency
  std::filesystem::path out = "out";

  /// Throws InputError on out-of-range values or missing files.
  void validate() const;
  /// 0-based coil positions of noise_coils in g.
  std::vector<int> noise_indices(const ReactorGeometry& g) const;
  NoiseModel noise_model(const ReactorGeometry& g) const;
  int resolved_jobs() const;
};

/// Relative paths in the file are resolved against its directory.
CampaignConfig load_config(const std::filesystem::path& path);
CampaignConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
/// Built-in defaults pointing at the bundled geometry and mesh under data_dir.
CampaignConfig default_config(const std::filesystem::path& data_dir);

}  // namespace tokuq
