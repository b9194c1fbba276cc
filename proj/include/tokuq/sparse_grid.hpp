#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tokuq {

using MultiIndex = std::vector<int>;

/// Number of 1-D nodes at level i: 1, then 2^(i-1) + 1.
int nodes_per_level(int i);

/// Chebyshev extrema mapped to [0,1], ascending. m = 1 gives {0.5}.
/// Throws std::invalid_argument unless m = 1 or m = 2^k + 1, k >= 1.
std::vector<double> chebyshev_nodes(int m);

/// Node j (0-based, ascending) of the level-i 1-D grid. Shared nodes of
/// different levels get bit-identical coordinates.
double node_coordinate(int level, int j);

std::uint64_t grid_size(int d, int level);

struct CountResult {
  std::uint64_t value = 0;
  bool saturated = false;  // true when the exact count exceeds 64 bits
  double approx = 0.0;
};

/// Size of the full tensor grid the sparse grid of this level is compared
/// against: (2^level + 1)^d.
CountResult full_grid_size(int d, int level);

struct SparseGrid {
  int d = 0;
  int level = 0;
  std::vector<MultiIndex> owner;          // per node: the multi-index that introduces it
  std::vector<std::vector<int>> index;    // per node: 1-D node index within owner's level
  std::vector<std::vector<double>> point; // per node: coordinates in [0,1]^d

  std::size_t size() const { return point.size(); }
};

/// Nodes ordered by |i|, then multi-index lexicographically, then 1-D indices.
/// The first grid_size(d, l) nodes of level L >= l form the level-l grid.
SparseGrid make_sparse_grid(int d, int level);

struct Box {
  std::vector<double> lo, hi;

  std::size_t dim() const { return lo.size(); }
  std::vector<double> to_unit(const std::vector<double>& x) const;
  std::vector<double> from_unit(const std::vector<double>& u) const;
};

class SurrogateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Surrogate {
  SparseGrid grid;
  Box box;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> surplus;  // nodes x vector length
  std::uint64_t mesh_hash = 0;
  std::vector<int> failed_nodes;

  std::size_t vector_length() const { return static_cast<std::size_t>(surplus.cols()); }
};

/// Point (in box coordinates) to sample vector; nullopt marks a failed evaluation.
using VectorFunction = std::function<std::optional<std::vector<double>>(const std::vector<double>&)>;

struct BuildOptions {
  int jobs = 1;
  std::uint64_t mesh_hash = 0;
  /// Called once per level with the number of fresh evaluations.
  std::function<void(int level, std::size_t evaluations)> on_level;
};

/// Hierarchical construction, level by level. A failed node takes the value
/// of the nearest successful node (unit-cube distance, lowest index on ties)
/// and is listed in failed_nodes. Throws SurrogateError if every node of
/// level 0 fails or sample lengths differ.
Surrogate build_surrogate(const VectorFunction& eval, int d, int level, const Box& box, const BuildOptions& opts = {});

/// Adds one level. Existing surpluses are kept bit-identical and only the new
/// nodes are evaluated.
Surrogate refine_level(const Surrogate& s, const VectorFunction& eval, const BuildOptions& opts = {});

/// The lower-level surrogate contained in s (a prefix of its nodes).
Surrogate truncate_surrogate(const Surrogate& s, int level);

/// Products of 1-D Lagrange basis values, one per grid node, at a unit-cube point.
Eigen::VectorXd basis_vector(const SparseGrid& g, const std::vector<double>& unit);

/// Evaluation at a point in box coordinates. Throws SurrogateError outside
/// the box unless extrapolate is set.
std::vector<double> eval_surrogate(const Surrogate& s, const std::vector<double>& x, bool extrapolate = false);

void write_surrogate(const Surrogate& s, const std::filesystem::path& path);
Surrogate read_surrogate(const std::filesystem::path& path);
/// Human-readable summary, written next to the binary file.
std::string surrogate_manifest(const Surrogate& s, double build_seconds, std::size_t evaluations);

}  // namespace tokuq
