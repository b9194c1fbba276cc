#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "tokuq/field_analysis.hpp"
#include "tokuq/geometry.hpp"
#include "tokuq/sparse_grid.hpp"

namespace tokuq {

/// Independent uniform noise of relative size `fraction` on the listed coils
/// (0-based indices; empty means every coil). Other coils stay at reference.
struct NoiseModel {
  CurrentVector reference;
  double fraction = 0.01;
  std::vector<int> active;

  std::vector<int> dims() const;
  /// Box over the active coils: I_i -+ fraction |I_i|.
  Box box() const;
  /// Full current vector for a point given in box coordinates.
  CurrentVector currents_at(const std::vector<double>& x) const;
  std::vector<double> active_values(const CurrentVector& c) const;
};

/// Generator for sample k of a campaign, independent of evaluation order.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t k);
CurrentVector sample_currents(const NoiseModel& nm, std::mt19937_64& rng);

struct WelfordState {
  std::size_t k = 0;
  Eigen::VectorXd mean;
  Eigen::VectorXd m2;  // running sum of squared deviations

  Eigen::VectorXd variance() const;  // sample variance, k - 1 in the denominator
  Eigen::VectorXd stddev() const;
};

WelfordState welford_update(WelfordState w, const Eigen::Ref<const Eigen::VectorXd>& x);
void welford_push(WelfordState& w, const Eigen::Ref<const Eigen::VectorXd>& x);

/// 1.96 S_k / sqrt(k) per component. Throws std::domain_error for k < 2.
Eigen::VectorXd margin_of_error(const WelfordState& w);
/// Largest componentwise margin relative to max(|m_c|, 1e-3 max|m|).
double campaign_margin(const WelfordState& w);

struct AnnulusCounts {
  std::array<std::size_t, 3> count{};
  std::array<double, 3> frequency{};
  std::size_t beyond = 0;
  std::size_t total = 0;
};

/// Distances in [0, r1], (r1, r2], (r2, r3]; beyond r3 counted separately.
/// Throws std::invalid_argument unless 0 < r1 < r2 < r3.
AnnulusCounts annulus_counts(const std::vector<Point>& points, Point ref, const std::array<double, 3>& radii);

/// Result of one evaluation at a current vector.
struct Evaluation {
  bool ok = false;
  std::string failure;       // solver status when not ok
  std::vector<double> psi;   // monitored vector (interior values on the common mesh)
  FieldFeatures features;
  double seconds = 0.0;
};

using Evaluator = std::function<Evaluation(const CurrentVector&)>;

struct McOptions {
  double stop_eps = 0.01;
  int batch = 100;
  std::size_t max_samples = 5000;
  int jobs = 1;
  std::uint64_t seed = 0;
  /// Centre of the x-point annuli; the reference-current evaluation when unset.
  std::optional<Point> reference_xpoint;
  std::array<double, 3> radii{0.032, 0.048, 0.064};
  bool keep_fields = false;
};

struct SampleRecord {
  std::size_t index = 0;
  CurrentVector currents;
  bool ok = false;
  std::string failure;
  FieldFeatures features;
  double seconds = 0.0;
};

struct ScalarStat {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
};

struct McReport {
  std::uint64_t seed = 0;
  double fraction = 0.0;
  std::size_t n_samples = 0;
  std::size_t n_failed = 0;
  bool converged = false;
  double stop_eps = 0.0;
  double final_margin = 0.0;
  std::vector<double> stopping_history;  // campaign margin after each batch
  std::map<std::string, std::size_t> categories;  // boundary types and failure kinds
  std::vector<std::pair<std::string, ScalarStat>> features;
  std::optional<Point> reference_xpoint;
  std::array<double, 3> radii{};
  AnnulusCounts xpoint_annuli;
  double mean_seconds = 0.0;
  std::vector<SampleRecord> samples;
  std::vector<std::vector<double>> fields;  // monitored vectors when keep_fields is set
  WelfordState psi_stats;

  const ScalarStat* feature(const std::string& name) const;
};

/// Monte Carlo campaign with dynamic stopping checked after every batch.
McReport run_mc(const Evaluator& eval, const NoiseModel& nm, const McOptions& opts);

/// Scalar features of one evaluation, in report order; absent ones skipped.
std::vector<std::pair<std::string, double>> feature_values(const FieldFeatures& f);

/// Mean over samples of |a - b|_inf / |b|_inf. Throws std::invalid_argument for
/// an empty set or a zero reference vector.
double mean_relative_error(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& exact);
double mean_relative_error(const Evaluator& approx, const Evaluator& exact, const std::vector<CurrentVector>& samples,
                           int jobs = 1);

}  // namespace tokuq
