#include "fluidnet/fluctuation.hpp"

#include <cmath>

namespace fluidnet {

Eigen::VectorXd FreePath::terminal() const {
  Eigen::VectorXd out(n);
  double last_t = events() ? t.back() : 0.0;
  for (int k = 0; k < n; ++k) {
    double last_v = events() ? value[(events() - 1) * n + k] : 0.0;
    out(k) = last_v + slope(k) * (horizon - last_t);
  }
  return out;
}

FreePath build_free_path(const TreeNetworkSpec& spec, const SamplePath& path) {
  if (path.n != spec.size())
    throw DimensionError("build_free_path: path dimension mismatch");
  const int n = spec.size();
  Eigen::MatrixXd m = neumann_inverse(spec.routing);

  FreePath x;
  x.n = n;
  x.horizon = path.horizon;
  x.slope = m * path.drift - spec.drain;
  Eigen::VectorXd mean_in(n);
  for (int j = 0; j < n; ++j) mean_in(j) = spec.input[j].mean_rate();
  x.mean_rate = m * mean_in - spec.drain;

  x.t = path.t;
  x.value.resize(path.events() * n);
  Eigen::VectorXd cur = Eigen::VectorXd::Zero(n);
  double prev = 0.0;
  for (std::size_t e = 0; e < path.events(); ++e) {
    cur += x.slope * (path.t[e] - prev);
    prev = path.t[e];
    cur += m.col(path.comp[e]) * path.size[e];
    for (int k = 0; k < n; ++k) x.value[e * n + k] = cur(k);
  }
  return x;
}

FluctuationSummary summarize_path(const FreePath& path) {
  const int n = path.n;
  for (int k = 0; k < n; ++k)
    if (!(path.mean_rate(k) < 0.0))
      throw DomainError("summarize_path: component " + std::to_string(k + 1) +
                        " does not drift to -infinity");

  FluctuationSummary s;
  s.max_value = Eigen::VectorXd::Zero(n);
  s.max_time = Eigen::VectorXd::Zero(n);
  s.detach_time = Eigen::VectorXd::Zero(n);
  s.terminal = path.terminal();
  s.detach_censored.assign(n, 0);
  s.margin_ok.assign(n, 0);

  const std::size_t m = path.events();
  for (int k = 0; k < n; ++k) {
    // forward scan: linear pieces peak at endpoints; at a jump both the left
    // limit and the post-jump value are candidates for the maximum
    double best = 0.0;
    double best_t = 0.0;
    for (std::size_t e = 0; e < m; ++e) {
      double pre = path.left_limit(e, k);
      if (pre > best) {
        best = pre;
        best_t = path.t[e];
      }
      double post = path.at(e, k);
      if (post > best) {
        best = post;
        best_t = path.t[e];
      }
    }
    if (s.terminal(k) > best) {
      best = s.terminal(k);
      best_t = path.horizon;
    }
    s.max_value(k) = best;
    s.max_time(k) = best_t;

    // backward pass: future maximum just after each event
    std::vector<double> future(m + 1);
    double fm = s.terminal(k);
    future[m] = fm;
    for (std::size_t e = m; e-- > 0;) {
      fm = std::max(fm, path.at(e, k));
      future[e] = fm;  // sup over [t_e, horizon], cadlag values and beyond
    }

    // first departure from the future running maximum: scan segments
    // [start, end) with value v at start and constant slope g
    double g = path.slope(k);
    bool found = false;
    double start = 0.0;
    double v = 0.0;
    for (std::size_t e = 0; e <= m && !found; ++e) {
      double end = (e < m) ? path.t[e] : path.horizon;
      double len = end - start;
      // future sup strictly after this segment, including the jump at `end`
      double tail = (e < m) ? future[e] : s.terminal(k);
      if (len > 0.0) {
        if (g > 0.0) {
          // the path rises toward its own future: sup over (start, end)
          // exceeds the value at start immediately
          s.detach_time(k) = start;
          found = true;
        } else if (tail > v) {
          s.detach_time(k) = start;
          found = true;
        } else {
          double end_v = v + g * len;
          if (tail > end_v) {
            // the descending piece crosses the level of the future maximum
            s.detach_time(k) = start + (v - tail) / (-g);
            found = true;
          }
        }
      } else if (tail > v) {
        s.detach_time(k) = start;
        found = true;
      }
      if (e < m) {
        start = end;
        v = path.at(e, k);
      }
    }
    if (!found) {
      s.detach_time(k) = path.horizon;
      s.detach_censored[k] = 1;
    }

    double margin = 10.0 / std::abs(path.mean_rate(k));
    s.margin_ok[k] = s.terminal(k) < s.max_value(k) - margin ? 1 : 0;
  }
  return s;
}

}  // namespace fluidnet
