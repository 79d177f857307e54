#include "fluidnet/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <thread>

#include "fluidnet/rng.hpp"

namespace fluidnet {

namespace {

void run_parallel(std::size_t items, unsigned threads,
                  const std::function<void(std::size_t)>& work) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads <= 1 || items < 2) {
    for (std::size_t i = 0; i < items; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const std::size_t block = std::max<std::size_t>(1, items / (threads * 16));
  auto worker = [&] {
    for (;;) {
      std::size_t begin = next.fetch_add(block);
      if (begin >= items) return;
      std::size_t end = std::min(items, begin + block);
      for (std::size_t i = begin; i < end; ++i) work(i);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
}

double margin_horizon(const TreeNetworkSpec& spec) {
  Eigen::VectorXd mean_in(spec.size());
  for (int j = 0; j < spec.size(); ++j) mean_in(j) = spec.input[j].mean_rate();
  Eigen::VectorXd rate = neumann_inverse(spec.routing) * mean_in - spec.drain;
  double horizon = 50.0;
  for (int k = 0; k < spec.size(); ++k) {
    double m = std::abs(rate(k));
    horizon = std::max(horizon, 10.0 / (m * m));
  }
  return horizon;
}

void require_simulable(const TreeNetworkSpec& spec) {
  ValidationReport rep = validate_network(spec);
  if (!rep.accepted())
    throw SpecError("simulation requires N1-N3 and T1-T4: " +
                    (rep.violations.empty() ? std::string("rejected")
                                            : rep.violations.front()));
  bool stochastic = false;
  for (const auto& in : spec.input)
    if (!in.is_deterministic()) stochastic = true;
  if (!stochastic)
    throw SpecError("simulation: all inputs deterministic (degenerate network)");
}

}  // namespace

/*---------------------------------------------------------------------*/
/* Stationary sampling                                                  */
/*---------------------------------------------------------------------*/

StationarySamples estimate_stationary(const TreeNetworkSpec& spec,
                                      std::size_t n_paths, std::uint64_t seed,
                                      const SimOptions& options) {
  require_simulable(spec);
  const int n = spec.size();
  const double t0 = options.base_horizon > 0.0 ? options.base_horizon
                                               : 0.5 * margin_horizon(spec);
  PathOptions popt;
  popt.brownian_step = options.brownian_step;

  StationarySamples out;
  out.n = n;
  out.paths = n_paths;
  out.reflect = Eigen::MatrixXd::Identity(n, n) - spec.routing.transpose();
  out.max_value.resize(n_paths * n);
  out.max_time.resize(n_paths * n);
  out.detach_time.resize(n_paths * n);

  std::atomic<std::size_t> resampled{0};
  std::atomic<std::size_t> unconverged{0};

  run_parallel(n_paths, options.threads, [&](std::size_t p) {
    FluctuationSummary summary;
    bool done = false;
    int attempt = 0;
    for (; attempt < options.max_attempts && !done; ++attempt) {
      std::uint64_t attempt_seed = attempt == 0 ? seed : mix64(seed + attempt);
      Eigen::VectorXd prev_max;
      double horizon = t0;
      for (int d = 0; d < options.max_doublings; ++d) {
        SamplePath path =
            sample_path_indexed(spec, horizon, attempt_seed, p, popt);
        summary = summarize_path(build_free_path(spec, path));
        bool stable = prev_max.size() == n && summary.max_value == prev_max;
        if (stable && summary.converged()) {
          done = true;
          break;
        }
        prev_max = summary.max_value;
        horizon *= 2.0;
      }
    }
    if (!done) unconverged.fetch_add(1);
    if (attempt > 1) resampled.fetch_add(1);
    for (int k = 0; k < n; ++k) {
      out.max_value[p * n + k] = summary.max_value(k);
      out.max_time[p * n + k] = summary.max_time(k);
      out.detach_time[p * n + k] = summary.detach_time(k);
    }
  });
  out.resampled = resampled.load();
  out.unconverged = unconverged.load();
  return out;
}

/*---------------------------------------------------------------------*/
/* Estimators                                                           */
/*---------------------------------------------------------------------*/

namespace {

double query_exponent(const StationarySamples& s, const StationaryQuery& q,
                      std::size_t p) {
  const int n = s.n;
  double sum = 0.0;
  if (q.omega_content.size()) {
    for (int k = 0; k < n; ++k)
      if (q.omega_content(k) != 0.0)
        sum += q.omega_content(k) * s.content(p, k);
  }
  if (q.beta_busy.size()) {
    for (int k = 0; k < n; ++k) sum += q.beta_busy(k) * s.busy(p, k);
  }
  if (q.gamma_idle.size()) {
    for (int k = 0; k < n; ++k) sum += q.gamma_idle(k) * s.idle(p, k);
  }
  if (q.omega_aggregate.size()) {
    for (int k = 0; k < n; ++k) sum += q.omega_aggregate(k) * s.xbar(p, k);
  }
  if (q.beta_priority.size()) {
    for (int k = 0; k < n; ++k)
      if (q.beta_priority(k) != 0.0 && s.content(p, k) > 0.0)
        sum += q.beta_priority(k) * s.busy(p, k);
  }
  return sum;
}

void check_query(const StationarySamples& s, const StationaryQuery& q) {
  for (const Eigen::VectorXd* v :
       {&q.omega_content, &q.beta_busy, &q.gamma_idle, &q.omega_aggregate,
        &q.beta_priority}) {
    if (v->size() && v->size() != s.n)
      throw DimensionError("query: weight dimension does not match network");
    for (Eigen::Index i = 0; i < v->size(); ++i)
      if ((*v)(i) < 0.0) throw DomainError("query: weights must be >= 0");
  }
}

TransformEstimate reduce_mean(const std::vector<double>& values,
                              double censored) {
  if (values.size() < 2)
    throw DomainError("estimate: at least two samples required");
  double sum = 0.0;
  for (double v : values) sum += v;
  double mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  TransformEstimate est;
  est.mean = mean;
  est.se = std::sqrt(ss / static_cast<double>(values.size() - 1) /
                     static_cast<double>(values.size()));
  est.n_paths = values.size();
  est.censored_fraction = censored;
  return est;
}

}  // namespace

TransformEstimate estimate_transform(const StationarySamples& samples,
                                     const StationaryQuery& query) {
  check_query(samples, query);
  if (samples.censored_fraction() > 0.001)
    throw DomainError("estimate: censored fraction above 0.1%");
  std::vector<double> values(samples.paths);
  for (std::size_t p = 0; p < samples.paths; ++p)
    values[p] = std::exp(-query_exponent(samples, query, p));
  return reduce_mean(values, samples.censored_fraction());
}

TransformEstimate estimate_conditional(const StationarySamples& samples, int k,
                                       const StationaryQuery& query) {
  check_query(samples, query);
  if (samples.censored_fraction() > 0.001)
    throw DomainError("estimate: censored fraction above 0.1%");
  std::vector<double> values;
  for (std::size_t p = 0; p < samples.paths; ++p)
    if (samples.xbar(p, k) == 0.0)
      values.push_back(std::exp(-query_exponent(samples, query, p)));
  return reduce_mean(values, samples.censored_fraction());
}

Verdict compare(double analytic, const TransformEstimate& estimate) {
  Verdict v;
  double gap = std::abs(analytic - estimate.mean);
  v.z = estimate.se > 0.0 ? (analytic - estimate.mean) / estimate.se
                          : (gap == 0.0 ? 0.0 : std::copysign(1e300, analytic));
  v.rel_gap = analytic != 0.0 ? gap / std::abs(analytic)
                              : (gap == 0.0 ? 0.0 : 1e300);
  v.pass = std::abs(v.z) <= 3.0 || v.rel_gap <= 0.02;
  return v;
}

/*---------------------------------------------------------------------*/
/* Distribution tests                                                   */
/*---------------------------------------------------------------------*/

double ks_statistic_exponential(std::vector<double> sample, double rate) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    double f = 1.0 - std::exp(-rate * sample[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

namespace {
double ks_coefficient(double alpha) {
  // inverse of the Kolmogorov tail 2 sum (-1)^{k-1} exp(-2 k^2 x^2)
  double lo = 0.5, hi = 3.0;
  auto tail = [](double x) {
    double s = 0.0;
    for (int k = 1; k <= 100; ++k)
      s += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * x * x);
    return s;
  };
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (tail(mid) > alpha)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace

double ks_critical_one_sample(std::size_t n, double alpha) {
  return ks_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha) {
  return ks_coefficient(alpha) *
         std::sqrt(static_cast<double>(n + m) / (static_cast<double>(n) * m));
}

/*---------------------------------------------------------------------*/
/* Forward probes                                                       */
/*---------------------------------------------------------------------*/

BusyIntervalSamples sample_busy_intervals(const TreeNetworkSpec& spec,
                                          int station, std::size_t n_draws,
                                          std::uint64_t seed,
                                          double inspect_time,
                                          const SimOptions& options) {
  require_simulable(spec);
  if (station < 0 || station >= spec.size())
    throw DomainError("busy intervals: bad station");
  PathOptions popt;
  popt.brownian_step = options.brownian_step;

  BusyIntervalSamples out;
  out.age.resize(n_draws);
  out.residual.resize(n_draws);
  std::atomic<std::size_t> resampled{0};

  run_parallel(n_draws, options.threads, [&](std::size_t p) {
    for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
      std::uint64_t attempt_seed = attempt == 0 ? seed : mix64(seed + attempt);
      double slack = inspect_time * (1 << std::min(attempt + 1, 4));
      SamplePath path = sample_path_indexed(spec, inspect_time + slack,
                                            attempt_seed, p, popt);
      ReflectionResult res = reflect_explicit(spec, path);
      const PiecewisePath& w = res.content[station];
      double scale = 1.0;
      for (double v : w.v) scale = std::max(scale, std::abs(v));
      double eps = 1e-9 * scale;

      if (w.value(inspect_time) <= eps) {
        out.age[p] = 0.0;
        out.residual[p] = 0.0;
        if (attempt > 0) resampled.fetch_add(1);
        return;
      }
      // age: time since the last zero before the inspection point
      AgeVector ages = extract_ages(res, inspect_time);
      // residual: first zero after the inspection point
      double next_zero = -1.0;
      for (std::size_t k = 0; k < w.t.size() && next_zero < 0.0; ++k) {
        double b = (k + 1 < w.t.size()) ? w.t[k + 1] : w.horizon;
        if (b <= inspect_time) continue;
        double a = std::max(w.t[k], inspect_time);
        double va = w.v[k] + w.g[k] * (a - w.t[k]);
        double vb = w.v[k] + w.g[k] * (b - w.t[k]);
        if (va <= eps)
          next_zero = a;
        else if (vb <= eps && w.g[k] < 0.0)
          next_zero = w.t[k] + (w.v[k] - eps) / (-w.g[k]);
      }
      if (next_zero >= 0.0) {
        out.age[p] = ages.busy(station);
        out.residual[p] = next_zero - inspect_time;
        if (attempt > 0) resampled.fetch_add(1);
        return;
      }
      // never emptied within the horizon: retry with a longer path
    }
    out.age[p] = inspect_time;
    out.residual[p] = inspect_time;
  });
  out.resampled = resampled.load();
  return out;
}

Eigen::MatrixXd sample_content_at(const TreeNetworkSpec& spec, double t_end,
                                  std::size_t n_paths, std::uint64_t seed,
                                  const SimOptions& options) {
  require_simulable(spec);
  PathOptions popt;
  popt.brownian_step = options.brownian_step;
  Eigen::MatrixXd out(n_paths, spec.size());
  run_parallel(n_paths, options.threads, [&](std::size_t p) {
    SamplePath path = sample_path_indexed(spec, t_end, seed, p, popt);
    ReflectionResult res = reflect_explicit(spec, path);
    for (int k = 0; k < spec.size(); ++k)
      out(static_cast<Eigen::Index>(p), k) = res.content[k].value(t_end);
  });
  return out;
}

}  // namespace fluidnet
