#include "tokuq/uq.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tokuq/parallel.hpp"

namespace tokuq {

std::vector<int> NoiseModel::dims() const {
  if (!active.empty()) return active;
  std::vector<int> all(reference.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return all;
}

Box NoiseModel::box() const {
  if (fraction < 0.0) throw std::invalid_argument("noise fraction must be non-negative");
  Box b;
  for (int i : dims()) {
    if (i < 0 || static_cast<std::size_t>(i) >= reference.size()) throw std::out_of_range("noise model: coil index out of range");
    const double half = fraction * std::abs(reference[i]);
    b.lo.push_back(reference[i] - half);
    b.hi.push_back(reference[i] + half);
  }
  return b;
}

CurrentVector NoiseModel::currents_at(const std::vector<double>& x) const {
  const auto d = dims();
  if (x.size() != d.size()) throw std::invalid_argument("noise model: point dimension mismatch");
  CurrentVector c = reference;
  for (std::size_t p = 0; p < d.size(); ++p) c[d[p]] = x[p];
  return c;
}

std::vector<double> NoiseModel::active_values(const CurrentVector& c) const {
  std::vector<double> x;
  for (int i : dims()) x.push_back(c[i]);
  return x;
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t k) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  return std::mt19937_64(seq);
}

CurrentVector sample_currents(const NoiseModel& nm, std::mt19937_64& rng) {
  const Box b = nm.box();
  std::vector<double> x(b.dim());
  for (std::size_t p = 0; p < x.size(); ++p) {
    const double u = std::generate_canonical<double, 53>(rng);
    x[p] = b.lo[p] + u * (b.hi[p] - b.lo[p]);
  }
  return nm.currents_at(x);
}

Eigen::VectorXd WelfordState::variance() const {
  if (k < 2) return Eigen::VectorXd::Zero(mean.size());
  return m2 / static_cast<double>(k - 1);
}

Eigen::VectorXd WelfordState::stddev() const { return variance().cwiseSqrt(); }

void welford_push(WelfordState& w, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (w.k == 0) {
    w.mean = Eigen::VectorXd::Zero(x.size());
    w.m2 = Eigen::VectorXd::Zero(x.size());
  } else if (x.size() != w.mean.size()) {
    throw std::invalid_argument("welford: sample dimension mismatch");
  }
  ++w.k;
  const Eigen::VectorXd delta = x - w.mean;
  w.mean += delta / static_cast<double>(w.k);
  w.m2 += delta.cwiseProduct(x - w.mean);
}

WelfordState welford_update(WelfordState w, const Eigen::Ref<const Eigen::VectorXd>& x) {
  welford_push(w, x);
  return w;
}

Eigen::VectorXd margin_of_error(const WelfordState& w) {
  if (w.k < 2) throw std::domain_error("margin of error needs at least 2 samples");
  return 1.96 * w.stddev() / std::sqrt(static_cast<double>(w.k));
}

double campaign_margin(const WelfordState& w) {
  const Eigen::VectorXd eps = margin_of_error(w);
  const double floor = 1e-3 * w.mean.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (Eigen::Index c = 0; c < eps.size(); ++c) {
    const double scale = std::max(std::abs(w.mean[c]), floor);
    if (eps[c] == 0.0) continue;
    worst = std::max(worst, scale > 0.0 ? eps[c] / scale : std::numeric_limits<double>::infinity());
  }
  return worst;
}

AnnulusCounts annulus_counts(const std::vector<Point>& points, Point ref, const std::array<double, 3>& radii) {
  if (!(radii[0] > 0.0 && radii[0] < radii[1] && radii[1] < radii[2]))
    throw std::invalid_argument("annulus radii must satisfy 0 < r1 < r2 < r3");
  AnnulusCounts a;
  a.total = points.size();
  for (const Point& p : points) {
    const double r = distance(p, ref);
    if (r <= radii[0]) ++a.count[0];
    else if (r <= radii[1]) ++a.count[1];
    else if (r <= radii[2]) ++a.count[2];
    else ++a.beyond;
  }
  for (int k = 0; k < 3; ++k) a.frequency[k] = a.total ? static_cast<double>(a.count[k]) / static_cast<double>(a.total) : 0.0;
  return a;
}

std::vector<std::pair<std::string, double>> feature_values(const FieldFeatures& f) {
  std::vector<std::pair<std::string, double>> v;
  v.emplace_back("psi_ma", f.psi_ma);
  v.emplace_back("psi_bd", f.psi_bd);
  v.emplace_back("axis_x", f.axis.x);
  v.emplace_back("axis_y", f.axis.y);
  if (f.xpoint) {
    v.emplace_back("xpoint_x", f.xpoint->x);
    v.emplace_back("xpoint_y", f.xpoint->y);
  }
  if (f.strike.size() == 2) {
    v.emplace_back("strike_inner_x", f.strike[0].x);
    v.emplace_back("strike_inner_y", f.strike[0].y);
    v.emplace_back("strike_outer_x", f.strike[1].x);
    v.emplace_back("strike_outer_y", f.strike[1].y);
  }
  if (f.contact) {
    v.emplace_back("contact_x", f.contact->x);
    v.emplace_back("contact_y", f.contact->y);
  }
  if (f.shape) {
    v.emplace_back("r_geo", f.shape->r_geo);
    v.emplace_back("a_minor", f.shape->a_minor);
    v.emplace_back("eps", f.shape->eps);
    v.emplace_back("kappa", f.shape->kappa_e);
    v.emplace_back("delta_u", f.shape->delta_u);
    v.emplace_back("delta_l", f.shape->delta_l);
  }
  return v;
}

const ScalarStat* McReport::feature(const std::string& name) const {
  for (const auto& [k, s] : features)
    if (k == name) return &s;
  return nullptr;
}

namespace {

struct ScalarWelford {
  std::size_t n = 0;
  double mean = 0.0, m2 = 0.0;
  void push(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
};

}  // namespace

McReport run_mc(const Evaluator& eval, const NoiseModel& nm, const McOptions& opts) {
  if (!(opts.stop_eps > 0.0)) throw std::invalid_argument("run_mc: stop_eps must be positive");
  if (opts.batch < 1) throw std::invalid_argument("run_mc: batch must be at least 1");
  McReport rep;
  rep.seed = opts.seed;
  rep.fraction = nm.fraction;
  rep.stop_eps = opts.stop_eps;
  rep.radii = opts.radii;
  rep.reference_xpoint = opts.reference_xpoint;
  if (!rep.reference_xpoint) {
    const Evaluation ref = eval(nm.reference);
    if (ref.ok) rep.reference_xpoint = ref.features.xpoint;
  }

  std::vector<std::string> order;
  std::map<std::string, ScalarWelford> stats;
  std::vector<Point> xpoints;
  double total_seconds = 0.0;

  while (rep.n_samples < opts.max_samples) {
    const std::size_t nb = std::min<std::size_t>(static_cast<std::size_t>(opts.batch), opts.max_samples - rep.n_samples);
    std::vector<SampleRecord> recs(nb);
    std::vector<std::vector<double>> fields(nb);
    parallel_for(nb, opts.jobs, [&](std::size_t i) {
      SampleRecord& r = recs[i];
      r.index = rep.n_samples + i;
      auto rng = sample_rng(opts.seed, r.index);
      r.currents = sample_currents(nm, rng);
      const auto t0 = std::chrono::steady_clock::now();
      Evaluation e = eval(r.currents);
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      r.ok = e.ok;
      r.failure = e.failure;
      r.features = std::move(e.features);
      fields[i] = std::move(e.psi);
    });
    for (std::size_t i = 0; i < nb; ++i) {
      SampleRecord& r = recs[i];
      total_seconds += r.seconds;
      if (r.ok) {
        welford_push(rep.psi_stats, Eigen::Map<const Eigen::VectorXd>(fields[i].data(), static_cast<Eigen::Index>(fields[i].size())));
        ++rep.categories[to_string(r.features.kind)];
        for (const auto& [name, v] : feature_values(r.features)) {
          if (!stats.count(name)) order.push_back(name);
          stats[name].push(v);
        }
        if (r.features.xpoint) xpoints.push_back(*r.features.xpoint);
        if (opts.keep_fields) rep.fields.push_back(std::move(fields[i]));
      } else {
        ++rep.n_failed;
        ++rep.categories[r.failure.empty() ? "failed" : r.failure];
      }
      rep.samples.push_back(std::move(r));
    }
    rep.n_samples += nb;
    if (rep.psi_stats.k >= 2) {
      rep.final_margin = campaign_margin(rep.psi_stats);
      rep.stopping_history.push_back(rep.final_margin);
      if (rep.final_margin <= opts.stop_eps) {
        rep.converged = true;
        break;
      }
    }
  }

  // report order: the canonical feature order, whatever sample introduced them first
  std::vector<std::string> canonical = {"psi_ma", "psi_bd", "axis_x", "axis_y", "xpoint_x", "xpoint_y",
                                        "strike_inner_x", "strike_inner_y", "strike_outer_x", "strike_outer_y",
                                        "contact_x", "contact_y", "r_geo", "a_minor", "eps", "kappa",
                                        "delta_u", "delta_l"};
  for (const auto& name : canonical) {
    auto it = stats.find(name);
    if (it == stats.end()) continue;
    const auto& s = it->second;
    rep.features.emplace_back(name, ScalarStat{s.n, s.mean, s.n > 1 ? s.m2 / static_cast<double>(s.n - 1) : 0.0});
  }
  if (rep.reference_xpoint) rep.xpoint_annuli = annulus_counts(xpoints, *rep.reference_xpoint, opts.radii);
  rep.mean_seconds = rep.n_samples ? total_seconds / static_cast<double>(rep.n_samples) : 0.0;
  return rep;
}

double mean_relative_error(const std::vector<std::vector<double>>& approx, const std::vector<std::vector<double>>& exact) {
  if (approx.empty() || approx.size() != exact.size()) throw std::invalid_argument("mean_relative_error: empty sample set");
  double total = 0.0;
  for (std::size_t s = 0; s < approx.size(); ++s) {
    if (approx[s].size() != exact[s].size()) throw std::invalid_argument("mean_relative_error: length mismatch");
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < exact[s].size(); ++i) {
      diff = std::max(diff, std::abs(approx[s][i] - exact[s][i]));
      norm = std::max(norm, std::abs(exact[s][i]));
    }
    if (norm == 0.0) throw std::invalid_argument("mean_relative_error: zero reference field");
    total += diff / norm;
  }
  return total / static_cast<double>(approx.size());
}

double mean_relative_error(const Evaluator& approx, const Evaluator& exact, const std::vector<CurrentVector>& samples,
                           int jobs) {
  if (samples.empty()) throw std::invalid_argument("mean_relative_error: empty sample set");
  std::vector<std::vector<double>> a(samples.size()), b(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    Evaluation ea = approx(samples[i]), eb = exact(samples[i]);
    if (!ea.ok || !eb.ok) throw std::runtime_error("mean_relative_error: evaluation failed at sample " + std::to_string(i));
    a[i] = std::move(ea.psi);
    b[i] = std::move(eb.psi);
  });
  return mean_relative_error(a, b);
}

}  // namespace tokuq
