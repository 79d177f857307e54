#include "fluidnet/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fluidnet {

namespace {

std::size_t segment_index(const std::vector<double>& t, double s) {
  // largest k with t[k] <= s
  auto it = std::upper_bound(t.begin(), t.end(), s);
  return static_cast<std::size_t>(it - t.begin()) - 1;
}

void emit(PiecewisePath& p, double time, double value, double slope) {
  if (!p.t.empty() && p.t.back() == time) {
    p.v.back() = value;
    p.g.back() = slope;
    return;
  }
  p.t.push_back(time);
  p.v.push_back(value);
  p.g.push_back(slope);
}

}  // namespace

double PiecewisePath::value(double s) const {
  std::size_t k = segment_index(t, s);
  return v[k] + g[k] * (s - t[k]);
}

double PiecewisePath::left_limit(double s) const {
  if (s <= t.front()) return v.front();
  std::size_t k = segment_index(t, s);
  if (t[k] == s) {
    if (k == 0) return v[0];
    --k;
  }
  return v[k] + g[k] * (s - t[k]);
}

PiecewisePath running_max(const PiecewisePath& f) {
  PiecewisePath m;
  m.horizon = f.horizon;
  double best = f.v.front();
  const std::size_t count = f.t.size();
  for (std::size_t k = 0; k < count; ++k) {
    double a = f.t[k];
    double post = f.v[k];
    double b = (k + 1 < count) ? f.t[k + 1] : f.horizon;
    double len = b - a;
    if (post > best) best = post;  // upward jump of f lifts the max at a
    double end = post + f.g[k] * len;
    if (len > 0.0 && f.g[k] > 0.0 && end > best) {
      if (post >= best) {
        emit(m, a, best, f.g[k]);
      } else {
        double tau = a + (best - post) / f.g[k];
        emit(m, a, best, 0.0);
        if (tau < b) emit(m, tau, best, f.g[k]);
      }
      best = end;
    } else {
      emit(m, a, best, 0.0);
    }
  }
  return m;
}

PiecewisePath clamp_above(const PiecewisePath& f, double shift) {
  PiecewisePath out;
  out.horizon = f.horizon;
  const std::size_t count = f.t.size();
  for (std::size_t k = 0; k < count; ++k) {
    double a = f.t[k];
    double val = f.v[k];
    double b = (k + 1 < count) ? f.t[k + 1] : f.horizon;
    if (val >= shift) {
      emit(out, a, val - shift, f.g[k]);
      continue;
    }
    double end = val + f.g[k] * (b - a);
    if (f.g[k] > 0.0 && end > shift) {
      double tau = a + (shift - val) / f.g[k];
      emit(out, a, 0.0, 0.0);
      if (tau < b) emit(out, tau, 0.0, f.g[k]);
    } else {
      emit(out, a, 0.0, 0.0);
    }
  }
  return out;
}

/*---------------------------------------------------------------------*/
/* Reflection                                                           */
/*---------------------------------------------------------------------*/

namespace {

// Per-component cadlag path of the driving input Y_i(t) = J_i(t) - ((I-P')r)_i t.
std::vector<PiecewisePath> driver_paths(const TreeNetworkSpec& spec,
                                        const SamplePath& path) {
  const int n = spec.size();
  Eigen::VectorXd net_drain = spec.drain;
  for (int j = 0; j < n; ++j) {
    int f = spec.feeder(j);
    if (f >= 0) net_drain(j) -= spec.routing(f, j) * spec.drain(f);
  }
  std::vector<PiecewisePath> y(n);
  for (int i = 0; i < n; ++i) {
    y[i].horizon = path.horizon;
    double slope = path.drift(i) - net_drain(i);
    emit(y[i], 0.0, 0.0, slope);
  }
  std::vector<double> cum(n, 0.0);
  for (std::size_t e = 0; e < path.events(); ++e) {
    int c = path.comp[e];
    double prev_t = y[c].t.back();
    double prev_v = y[c].v.back();
    double slope = y[c].g.back();
    cum[c] = prev_v + slope * (path.t[e] - prev_t) + path.size[e];
    emit(y[c], path.t[e], cum[c], slope);
  }
  return y;
}

// Free-process components -X_i on the event grid (negated for max-based L).
std::vector<PiecewisePath> negated_free_paths(const TreeNetworkSpec& spec,
                                              const SamplePath& path,
                                              const Eigen::MatrixXd& m) {
  const int n = spec.size();
  Eigen::VectorXd slope = m * path.drift - spec.drain;
  std::vector<PiecewisePath> neg(n);
  for (int i = 0; i < n; ++i) {
    neg[i].horizon = path.horizon;
    emit(neg[i], 0.0, 0.0, -slope(i));
  }
  Eigen::VectorXd value = Eigen::VectorXd::Zero(n);
  double prev = 0.0;
  for (std::size_t e = 0; e < path.events(); ++e) {
    double dt = path.t[e] - prev;
    prev = path.t[e];
    value += slope * dt;
    value += m.col(path.comp[e]) * path.size[e];
    for (int i = 0; i < n; ++i) emit(neg[i], path.t[e], -value(i), -slope(i));
  }
  return neg;
}

std::vector<double> merged_grid(const std::vector<const PiecewisePath*>& paths,
                                double horizon) {
  std::vector<double> grid;
  grid.push_back(0.0);
  for (const PiecewisePath* p : paths)
    grid.insert(grid.end(), p->t.begin(), p->t.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  while (!grid.empty() && grid.back() > horizon) grid.pop_back();
  return grid;
}

PiecewisePath resample(const PiecewisePath& p, const std::vector<double>& grid,
                       double horizon) {
  PiecewisePath out;
  out.horizon = horizon;
  out.t = grid;
  out.v.resize(grid.size());
  out.g.resize(grid.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (k + 1 < p.t.size() && p.t[k + 1] <= grid[i]) ++k;
    out.v[i] = p.v[k] + p.g[k] * (grid[i] - p.t[k]);
    out.g[i] = p.g[k];
  }
  return out;
}

// Assemble W = w + Y + (I-P')L and the aggregate x + X reflected content on a
// shared grid.
ReflectionResult assemble(const TreeNetworkSpec& spec, const SamplePath& path,
                          const std::vector<PiecewisePath>& y,
                          std::vector<PiecewisePath> regulators) {
  const int n = spec.size();
  ReflectionResult res;
  res.n = n;
  res.horizon = path.horizon;

  std::vector<const PiecewisePath*> all;
  for (const auto& p : y) all.push_back(&p);
  for (const auto& p : regulators) all.push_back(&p);
  res.t = merged_grid(all, path.horizon);

  std::vector<PiecewisePath> yr(n), lr(n);
  for (int i = 0; i < n; ++i) {
    yr[i] = resample(y[i], res.t, path.horizon);
    lr[i] = resample(regulators[i], res.t, path.horizon);
  }

  res.content.resize(n);
  res.regulator = std::move(lr);
  res.aggregate.resize(n);
  Eigen::MatrixXd m = neumann_inverse(spec.routing);

  for (int i = 0; i < n; ++i) {
    int f = spec.feeder(i);
    double pf = f >= 0 ? spec.routing(f, i) : 0.0;
    PiecewisePath w;
    w.horizon = path.horizon;
    w.t = res.t;
    w.v.resize(res.t.size());
    w.g.resize(res.t.size());
    for (std::size_t k = 0; k < res.t.size(); ++k) {
      double lv = res.regulator[i].v[k];
      double lg = res.regulator[i].g[k];
      if (f >= 0) {
        lv -= pf * res.regulator[f].v[k];
        lg -= pf * res.regulator[f].g[k];
      }
      w.v[k] = spec.initial(i) + yr[i].v[k] + lv;
      w.g[k] = yr[i].g[k] + lg;
    }
    res.content[i] = std::move(w);
  }

  // aggregate_j = x_j + X_j + L_j with x = (I-P')^{-1} w and X = (I-P')^{-1} Y
  Eigen::VectorXd x = m * spec.initial;
  for (int i = 0; i < n; ++i) {
    PiecewisePath agg;
    agg.horizon = path.horizon;
    agg.t = res.t;
    agg.v.resize(res.t.size());
    agg.g.resize(res.t.size());
    for (std::size_t k = 0; k < res.t.size(); ++k) {
      double xv = 0.0, xg = 0.0;
      for (int j = 0; j < n; ++j) {
        if (m(i, j) == 0.0) continue;
        xv += m(i, j) * yr[j].v[k];
        xg += m(i, j) * yr[j].g[k];
      }
      agg.v[k] = x(i) + xv + res.regulator[i].v[k];
      agg.g[k] = xg + res.regulator[i].g[k];
    }
    res.aggregate[i] = std::move(agg);
  }
  return res;
}

void require_tree(const TreeNetworkSpec& spec) {
  ValidationReport rep = validate_network(spec);
  if (!(rep.n1 && rep.n2 && rep.n3))
    throw SpecError("reflection requires N1-N3: " +
                    (rep.violations.empty() ? std::string("structure violated")
                                            : rep.violations.front()));
}

}  // namespace

ReflectionResult reflect_explicit(const TreeNetworkSpec& spec,
                                  const SamplePath& path) {
  require_tree(spec);
  if (path.n != spec.size())
    throw DimensionError("reflect: path dimension does not match network");
  const int n = spec.size();
  Eigen::MatrixXd m = neumann_inverse(spec.routing);
  Eigen::VectorXd x = m * spec.initial;

  std::vector<PiecewisePath> neg = negated_free_paths(spec, path, m);
  std::vector<PiecewisePath> regulators(n);
  for (int i = 0; i < n; ++i)
    regulators[i] = clamp_above(running_max(neg[i]), x(i));

  return assemble(spec, path, driver_paths(spec, path), std::move(regulators));
}

ReflectionResult reflect_fixed_point(const TreeNetworkSpec& spec,
                                     const SamplePath& path) {
  require_tree(spec);
  if (path.n != spec.size())
    throw DimensionError("reflect: path dimension does not match network");
  const int n = spec.size();
  std::vector<PiecewisePath> y = driver_paths(spec, path);

  // Station order is topological for strictly upper-triangular routing.
  std::vector<PiecewisePath> regulators(n);
  for (int i = 0; i < n; ++i) {
    int f = spec.feeder(i);
    double pf = f >= 0 ? spec.routing(f, i) : 0.0;
    std::vector<const PiecewisePath*> parts{&y[i]};
    if (f >= 0) parts.push_back(&regulators[f]);
    std::vector<double> grid = merged_grid(parts, path.horizon);

    PiecewisePath driver;
    driver.horizon = path.horizon;
    PiecewisePath yi = resample(y[i], grid, path.horizon);
    if (f >= 0) {
      PiecewisePath lf = resample(regulators[f], grid, path.horizon);
      for (std::size_t k = 0; k < grid.size(); ++k)
        emit(driver, grid[k], pf * lf.v[k] - spec.initial(i) - yi.v[k],
             pf * lf.g[k] - yi.g[k]);
    } else {
      for (std::size_t k = 0; k < grid.size(); ++k)
        emit(driver, grid[k], -spec.initial(i) - yi.v[k], -yi.g[k]);
    }
    regulators[i] = clamp_above(running_max(driver), 0.0);
  }

  return assemble(spec, path, y, std::move(regulators));
}

double reflection_distance(const ReflectionResult& a, const ReflectionResult& b) {
  std::vector<double> grid = a.t;
  grid.insert(grid.end(), b.t.begin(), b.t.end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  double worst = 0.0;
  auto probe = [&](const PiecewisePath& p, const PiecewisePath& q, double s) {
    worst = std::max(worst, std::abs(p.value(s) - q.value(s)));
  };
  for (int i = 0; i < a.n; ++i) {
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double s = grid[k];
      probe(a.content[i], b.content[i], s);
      probe(a.regulator[i], b.regulator[i], s);
      probe(a.aggregate[i], b.aggregate[i], s);
      if (k + 1 < grid.size()) {
        double mid = 0.5 * (grid[k] + grid[k + 1]);
        probe(a.content[i], b.content[i], mid);
        probe(a.regulator[i], b.regulator[i], mid);
      }
    }
  }
  return worst;
}

DynamicsAudit audit_dynamics(const TreeNetworkSpec& spec,
                             const ReflectionResult& res) {
  DynamicsAudit audit;
  audit.min_content = std::numeric_limits<double>::infinity();
  const double rate_tol = 1e-12;
  for (int i = 0; i < res.n; ++i) {
    audit.initial_error = std::max(
        audit.initial_error, std::abs(res.content[i].v.front() - spec.initial(i)));
    const PiecewisePath& w = res.content[i];
    const PiecewisePath& l = res.regulator[i];
    for (std::size_t k = 0; k < res.t.size(); ++k) {
      double b = (k + 1 < res.t.size()) ? res.t[k + 1] : res.horizon;
      double len = b - res.t[k];
      double w_end = w.v[k] + w.g[k] * len;
      audit.min_content = std::min({audit.min_content, w.v[k], w_end});
      audit.min_regulator_slope = std::min(audit.min_regulator_slope, l.g[k]);
      if (l.g[k] > rate_tol && len > 0.0) {
        audit.max_complementarity = std::max(
            {audit.max_complementarity, std::abs(w.v[k]), std::abs(w_end)});
      }
    }
  }
  if (!std::isfinite(audit.min_content)) audit.min_content = 0.0;
  return audit;
}

/*---------------------------------------------------------------------*/
/* Ages                                                                 */
/*---------------------------------------------------------------------*/

namespace {

// sup of the zero set (resp. nonzero set) of a nonnegative piecewise-linear
// trajectory over [0, s]; negative if the set is empty.
double last_zero(const PiecewisePath& p, double s, double eps) {
  std::size_t k = segment_index(p.t, s);
  for (std::size_t idx = k + 1; idx-- > 0;) {
    double a = p.t[idx];
    double end = (idx == k) ? s : p.t[idx + 1];
    double va = p.v[idx];
    double vb = va + p.g[idx] * (end - a);
    if (vb <= eps) return end;
    if (va <= eps) return a;
    // strictly positive endpoints: an interior zero of a linear piece would
    // need a sign change, impossible for nonnegative content
  }
  return -1.0;
}

double last_nonzero(const PiecewisePath& p, double s, double eps) {
  std::size_t k = segment_index(p.t, s);
  for (std::size_t idx = k + 1; idx-- > 0;) {
    double a = p.t[idx];
    double end = (idx == k) ? s : p.t[idx + 1];
    double va = p.v[idx];
    double vb = va + p.g[idx] * (end - a);
    if (vb > eps) return end;
    if (va > eps) {
      // drains to zero inside the piece: positive up to the crossing
      if (p.g[idx] < 0.0) return std::min(end, a + (va - eps) / (-p.g[idx]));
      return end;
    }
  }
  return -1.0;
}

double scale_of(const PiecewisePath& p) {
  double m = 1.0;
  for (double v : p.v) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

AgeVector extract_ages(const ReflectionResult& res, double s) {
  if (s < 0.0 || s > res.horizon)
    throw DomainError("extract_ages: time outside [0, horizon]");
  AgeVector ages;
  ages.busy = Eigen::VectorXd(res.n);
  ages.idle = Eigen::VectorXd(res.n);
  ages.busy_agg = Eigen::VectorXd(res.n);
  ages.idle_agg = Eigen::VectorXd(res.n);
  ages.priority = Eigen::VectorXd(res.n);
  for (int i = 0; i < res.n; ++i) {
    double eps_w = 1e-9 * scale_of(res.content[i]);
    double eps_a = 1e-9 * scale_of(res.aggregate[i]);
    double z = last_zero(res.content[i], s, eps_w);
    double nz = last_nonzero(res.content[i], s, eps_w);
    ages.busy(i) = s - std::max(z, 0.0);
    ages.idle(i) = s - std::max(nz, 0.0);
    if (res.content[i].value(s) <= eps_w) ages.busy(i) = 0.0;
    if (res.content[i].value(s) > eps_w) ages.idle(i) = 0.0;

    double za = last_zero(res.aggregate[i], s, eps_a);
    double nza = last_nonzero(res.aggregate[i], s, eps_a);
    ages.busy_agg(i) = s - std::max(za, 0.0);
    ages.idle_agg(i) = s - std::max(nza, 0.0);
    if (res.aggregate[i].value(s) <= eps_a) ages.busy_agg(i) = 0.0;
    if (res.aggregate[i].value(s) > eps_a) ages.idle_agg(i) = 0.0;

    ages.priority(i) =
        res.content[i].value(s) > eps_w ? ages.busy_agg(i) : 0.0;
  }
  return ages;
}

}  // namespace fluidnet
