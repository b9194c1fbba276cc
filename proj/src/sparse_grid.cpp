#include "tokuq/sparse_grid.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "tokuq/parallel.hpp"

namespace tokuq {

static_assert(std::endian::native == std::endian::little, "surrogate files are written little-endian");

int nodes_per_level(int i) {
  if (i < 1) throw std::invalid_argument("sparse grid: level index must be >= 1");
  if (i > 30) throw std::invalid_argument("sparse grid: level index too large");
  return i == 1 ? 1 : (1 << (i - 1)) + 1;
}

double node_coordinate(int level, int j) {
  const int m = nodes_per_level(level);
  if (j < 0 || j >= m) throw std::out_of_range("sparse grid: node index out of range");
  if (m == 1) return 0.5;
  // reduce j/(m-1) so that shared nodes are computed from the same fraction
  int num = j, den = m - 1;
  while (num > 0 && num % 2 == 0 && den % 2 == 0) {
    num /= 2;
    den /= 2;
  }
  if (num == 0) return 0.0;
  if (num == den) return 1.0;
  if (2 * num == den) return 0.5;
  return 0.5 * (1.0 - std::cos(std::numbers::pi * num / den));
}

std::vector<double> chebyshev_nodes(int m) {
  if (m < 1 || (m > 1 && (m < 3 || !std::has_single_bit(static_cast<unsigned>(m - 1)))))
    throw std::invalid_argument("chebyshev_nodes: count must be 1 or 2^k + 1, got " + std::to_string(m));
  const int level = m == 1 ? 1 : std::countr_zero(static_cast<unsigned>(m - 1)) + 1;
  std::vector<double> x(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) x[j] = node_coordinate(level, j);
  return x;
}

namespace {

std::vector<int> new_nodes(int level) {
  if (level == 1) return {0};
  if (level == 2) return {0, 2};
  std::vector<int> out;
  const int m = nodes_per_level(level);
  for (int j = 1; j < m - 1; j += 2) out.push_back(j);
  return out;
}

std::uint64_t new_count(int level) { return level == 1 ? 1 : level == 2 ? 2 : std::uint64_t{1} << (level - 2); }

// all i with entries >= 1 and |i| = sum, lexicographic
void compositions(int d, int sum, std::vector<MultiIndex>& out) {
  MultiIndex cur(static_cast<std::size_t>(d), 1);
  auto rec = [&](auto&& self, int p, int left) -> void {
    if (p == d - 1) {
      cur[p] = left;
      out.push_back(cur);
      return;
    }
    for (int v = 1; v <= left - (d - 1 - p); ++v) {
      cur[p] = v;
      self(self, p + 1, left - v);
    }
  };
  rec(rec, 0, sum);
}

}  // namespace

std::uint64_t grid_size(int d, int level) {
  if (d < 1 || level < 0) throw std::invalid_argument("grid_size: need d >= 1 and level >= 0");
  // ways[s] = sum over (i_1..i_p) with sum of (i - 1) = s of the product of new counts
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(level) + 1, 0);
  ways[0] = 1;
  for (int p = 0; p < d; ++p) {
    std::vector<std::uint64_t> next(ways.size(), 0);
    for (int s = 0; s <= level; ++s)
      for (int e = 0; s + e <= level; ++e) next[s + e] += ways[s] * new_count(e + 1);
    ways = std::move(next);
  }
  std::uint64_t total = 0;
  for (auto w : ways) total += w;
  return total;
}

CountResult full_grid_size(int d, int level) {
  if (d < 1 || level < 0) throw std::invalid_argument("full_grid_size: need d >= 1 and level >= 0");
  const std::uint64_t base = (std::uint64_t{1} << level) + 1;
  CountResult r;
  r.approx = std::pow(static_cast<double>(base), d);
  r.value = 1;
  for (int p = 0; p < d; ++p) {
    if (r.value > std::numeric_limits<std::uint64_t>::max() / base) {
      r.saturated = true;
      r.value = std::numeric_limits<std::uint64_t>::max();
      break;
    }
    r.value *= base;
  }
  return r;
}

SparseGrid make_sparse_grid(int d, int level) {
  if (d < 1 || level < 0) throw std::invalid_argument("make_sparse_grid: need d >= 1 and level >= 0");
  SparseGrid g;
  g.d = d;
  g.level = level;
  for (int q = 0; q <= level; ++q) {
    std::vector<MultiIndex> idx;
    compositions(d, d + q, idx);
    for (const auto& i : idx) {
      std::vector<std::vector<int>> fresh;
      for (int v : i) fresh.push_back(new_nodes(v));
      std::vector<int> pos(static_cast<std::size_t>(d), 0);
      while (true) {
        std::vector<int> j(static_cast<std::size_t>(d));
        std::vector<double> x(static_cast<std::size_t>(d));
        for (int p = 0; p < d; ++p) {
          j[p] = fresh[p][pos[p]];
          x[p] = node_coordinate(i[p], j[p]);
        }
        g.owner.push_back(i);
        g.index.push_back(std::move(j));
        g.point.push_back(std::move(x));
        int p = d - 1;
        while (p >= 0 && ++pos[p] == static_cast<int>(fresh[p].size())) pos[p--] = 0;
        if (p < 0) break;
      }
    }
  }
  return g;
}

std::vector<double> Box::to_unit(const std::vector<double>& x) const {
  std::vector<double> u(x.size());
  for (std::size_t p = 0; p < x.size(); ++p) u[p] = hi[p] == lo[p] ? 0.5 : (x[p] - lo[p]) / (hi[p] - lo[p]);
  return u;
}

std::vector<double> Box::from_unit(const std::vector<double>& u) const {
  std::vector<double> x(u.size());
  for (std::size_t p = 0; p < u.size(); ++p) x[p] = lo[p] + u[p] * (hi[p] - lo[p]);
  return x;
}

namespace {

// basis[l][j] = value of the j-th Lagrange polynomial of the level-(l+1) grid at y
std::vector<std::vector<double>> lagrange_1d(double y, int max_level) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(max_level));
  out[0] = {1.0};
  for (int l = 2; l <= max_level; ++l) {
    const int m = nodes_per_level(l);
    auto& b = out[l - 1];
    b.assign(static_cast<std::size_t>(m), 0.0);
    int hit = -1;
    for (int j = 0; j < m; ++j)
      if (y == node_coordinate(l, j)) hit = j;
    if (hit >= 0) {
      b[hit] = 1.0;
      continue;
    }
    double sum = 0.0;
    for (int j = 0; j < m; ++j) {
      double w = (j % 2 == 0) ? 1.0 : -1.0;
      if (j == 0 || j == m - 1) w *= 0.5;
      b[j] = w / (y - node_coordinate(l, j));
      sum += b[j];
    }
    for (double& v : b) v /= sum;
  }
  return out;
}

}  // namespace

Eigen::VectorXd basis_vector(const SparseGrid& g, const std::vector<double>& unit) {
  std::vector<std::vector<std::vector<double>>> per_dim;
  for (int p = 0; p < g.d; ++p) per_dim.push_back(lagrange_1d(unit[p], g.level + 1));
  Eigen::VectorXd b(static_cast<Eigen::Index>(g.size()));
  for (std::size_t n = 0; n < g.size(); ++n) {
    double v = 1.0;
    for (int p = 0; p < g.d; ++p) v *= per_dim[p][g.owner[n][p] - 1][g.index[n][p]];
    b[static_cast<Eigen::Index>(n)] = v;
  }
  return b;
}

namespace {

Eigen::VectorXd eval_prefix(const Surrogate& s, std::size_t rows, const std::vector<double>& unit) {
  const Eigen::VectorXd b = basis_vector(s.grid, unit);
  const auto r = static_cast<Eigen::Index>(rows);
  return s.surplus.topRows(r).transpose() * b.head(r);
}

double unit_distance2(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t p = 0; p < a.size(); ++p) s += (a[p] - b[p]) * (a[p] - b[p]);
  return s;
}

void extend(Surrogate& s, const VectorFunction& eval, int to_level, const BuildOptions& opts) {
  const int d = static_cast<int>(s.box.dim());
  const int from_level = s.surplus.rows() == 0 ? -1 : s.grid.level;
  s.grid = make_sparse_grid(d, to_level);
  for (int q = from_level + 1; q <= to_level; ++q) {
    const std::size_t begin = q == 0 ? 0 : grid_size(d, q - 1);
    const std::size_t end = grid_size(d, q);
    const std::size_t count = end - begin;
    std::vector<std::optional<std::vector<double>>> fresh(count);
    parallel_for(count, opts.jobs, [&](std::size_t k) { fresh[k] = eval(s.box.from_unit(s.grid.point[begin + k])); });
    if (opts.on_level) opts.on_level(q, count);

    std::size_t len = static_cast<std::size_t>(s.surplus.cols());
    for (const auto& f : fresh)
      if (f) {
        if (len == 0) len = f->size();
        if (f->size() != len) throw SurrogateError("sparse grid: sample vectors differ in length");
      }
    if (q == 0 && !fresh[0]) throw SurrogateError("sparse grid: evaluation failed at the level-0 node");
    if (len == 0) throw SurrogateError("sparse grid: no successful evaluation");

    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> next(static_cast<Eigen::Index>(end),
                                                                                   static_cast<Eigen::Index>(len));
    if (begin > 0) next.topRows(static_cast<Eigen::Index>(begin)) = s.surplus;

    std::vector<char> failed_before(begin, 0);
    for (int f : s.failed_nodes) failed_before[f] = 1;
    std::vector<Eigen::VectorXd> prior(count);
    parallel_for(count, opts.jobs, [&](std::size_t k) {
      prior[k] = begin > 0 ? eval_prefix(s, begin, s.grid.point[begin + k]) : Eigen::VectorXd::Zero(static_cast<Eigen::Index>(len));
    });
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t n = begin + k;
      Eigen::VectorXd sample;
      if (fresh[k]) {
        sample = Eigen::Map<const Eigen::VectorXd>(fresh[k]->data(), static_cast<Eigen::Index>(len));
      } else {
        std::size_t best = end;
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < end; ++c) {
          const bool ok = c < begin ? !failed_before[c] : static_cast<bool>(fresh[c - begin]);
          if (!ok) continue;
          const double dist = unit_distance2(s.grid.point[c], s.grid.point[n]);
          if (dist < best_d) {
            best_d = dist;
            best = c;
          }
        }
        if (best == end) throw SurrogateError("sparse grid: no successful node to fall back on");
        if (best < begin)
          sample = eval_prefix(s, begin, s.grid.point[best]);
        else
          sample = Eigen::Map<const Eigen::VectorXd>(fresh[best - begin]->data(), static_cast<Eigen::Index>(len));
        s.failed_nodes.push_back(static_cast<int>(n));
      }
      next.row(static_cast<Eigen::Index>(n)) = (sample - prior[k]).transpose();
    }
    s.surplus = std::move(next);
  }
}

}  // namespace

Surrogate build_surrogate(const VectorFunction& eval, int d, int level, const Box& box, const BuildOptions& opts) {
  if (static_cast<int>(box.dim()) != d || box.hi.size() != box.lo.size())
    throw std::invalid_argument("build_surrogate: box dimension mismatch");
  for (std::size_t p = 0; p < box.dim(); ++p)
    if (!(box.hi[p] >= box.lo[p])) throw std::invalid_argument("build_surrogate: empty box interval");
  Surrogate s;
  s.box = box;
  s.mesh_hash = opts.mesh_hash;
  extend(s, eval, level, opts);
  return s;
}

Surrogate refine_level(const Surrogate& s, const VectorFunction& eval, const BuildOptions& opts) {
  Surrogate out = s;
  extend(out, eval, s.grid.level + 1, opts);
  return out;
}

Surrogate truncate_surrogate(const Surrogate& s, int level) {
  if (level < 0 || level > s.grid.level) throw std::invalid_argument("truncate_surrogate: level out of range");
  Surrogate out;
  out.box = s.box;
  out.mesh_hash = s.mesh_hash;
  out.grid = make_sparse_grid(s.grid.d, level);
  out.surplus = s.surplus.topRows(static_cast<Eigen::Index>(out.grid.size()));
  for (int f : s.failed_nodes)
    if (static_cast<std::size_t>(f) < out.grid.size()) out.failed_nodes.push_back(f);
  return out;
}

std::vector<double> eval_surrogate(const Surrogate& s, const std::vector<double>& x, bool extrapolate) {
  if (x.size() != s.box.dim()) throw std::invalid_argument("eval_surrogate: dimension mismatch");
  if (!extrapolate)
    for (std::size_t p = 0; p < x.size(); ++p) {
      const double slack = 1e-12 * std::max(1.0, std::abs(s.box.hi[p] - s.box.lo[p]));
      if (x[p] < s.box.lo[p] - slack || x[p] > s.box.hi[p] + slack)
        throw SurrogateError("eval_surrogate: point outside the parameter box");
    }
  const Eigen::VectorXd b = basis_vector(s.grid, s.box.to_unit(x));
  const Eigen::VectorXd v = s.surplus.transpose() * b;
  return {v.data(), v.data() + v.size()};
}

namespace {

constexpr char kMagic[8] = {'T', 'K', 'U', 'Q', 'S', 'G', '0', '1'};

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw SurrogateError("surrogate file truncated");
  return v;
}

}  // namespace

void write_surrogate(const Surrogate& s, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw SurrogateError("cannot write " + path.string());
  os.write(kMagic, sizeof kMagic);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.d));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.grid.level));
  put<std::uint64_t>(os, s.grid.size());
  put<std::uint64_t>(os, s.vector_length());
  put<std::uint64_t>(os, s.mesh_hash);
  for (double v : s.box.lo) put(os, v);
  for (double v : s.box.hi) put(os, v);
  for (std::size_t n = 0; n < s.grid.size(); ++n) {
    for (int v : s.grid.owner[n]) put<std::int32_t>(os, v);
    for (int v : s.grid.index[n]) put<std::int32_t>(os, v);
  }
  os.write(reinterpret_cast<const char*>(s.surplus.data()),
           static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(s.surplus.size())));
  put<std::uint64_t>(os, s.failed_nodes.size());
  for (int f : s.failed_nodes) put<std::int32_t>(os, f);
  if (!os) throw SurrogateError("write failed for " + path.string());
}

Surrogate read_surrogate(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw SurrogateError("cannot open surrogate file " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0) throw SurrogateError("not a surrogate file: " + path.string());
  Surrogate s;
  const int d = static_cast<int>(get<std::uint32_t>(is));
  const int level = static_cast<int>(get<std::uint32_t>(is));
  const auto nodes = get<std::uint64_t>(is);
  const auto len = get<std::uint64_t>(is);
  s.mesh_hash = get<std::uint64_t>(is);
  if (d < 1 || d > 64 || level > 20) throw SurrogateError("surrogate file header out of range");
  s.box.lo.resize(static_cast<std::size_t>(d));
  s.box.hi.resize(static_cast<std::size_t>(d));
  for (double& v : s.box.lo) v = get<double>(is);
  for (double& v : s.box.hi) v = get<double>(is);
  s.grid = make_sparse_grid(d, level);
  if (s.grid.size() != nodes) throw SurrogateError("surrogate file node count does not match its level");
  for (std::size_t n = 0; n < nodes; ++n) {
    for (int p = 0; p < d; ++p)
      if (get<std::int32_t>(is) != s.grid.owner[n][p]) throw SurrogateError("surrogate node table mismatch");
    for (int p = 0; p < d; ++p)
      if (get<std::int32_t>(is) != s.grid.index[n][p]) throw SurrogateError("surrogate node table mismatch");
  }
  s.surplus.resize(static_cast<Eigen::Index>(nodes), static_cast<Eigen::Index>(len));
  is.read(reinterpret_cast<char*>(s.surplus.data()), static_cast<std::streamsize>(sizeof(double) * nodes * len));
  if (!is) throw SurrogateError("surrogate file truncated");
  const auto nf = get<std::uint64_t>(is);
  for (std::uint64_t k = 0; k < nf; ++k) s.failed_nodes.push_back(get<std::int32_t>(is));
  return s;
}

std::string surrogate_manifest(const Surrogate& s, double build_seconds, std::size_t evaluations) {
  std::ostringstream hash;
  hash << std::hex << s.mesh_hash;
  nlohmann::ordered_json j;
  j["format"] = "tokuq-surrogate-v1";
  j["d"] = s.grid.d;
  j["level"] = s.grid.level;
  j["nodes"] = s.grid.size();
  j["vector_length"] = s.vector_length();
  j["box"] = {{"lo", s.box.lo}, {"hi", s.box.hi}};
  j["mesh_hash"] = hash.str();
  j["failed_nodes"] = s.failed_nodes;
  j["evaluations"] = evaluations;
  j["build_seconds"] = build_seconds;
  return j.dump(2) + "\n";
}

}  // namespace tokuq
