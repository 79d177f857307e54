#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fluidnet/levy.hpp"
#include "fluidnet/model.hpp"

namespace fluidnet {

// Free process X(t) = (I-P')^{-1} J(t) - r t on the event grid. Values are
// cumulative post-jump states; the left limit at t[i] follows from the
// constant slope.
struct FreePath {
  int n = 0;
  double horizon = 0.0;
  Eigen::VectorXd slope;      // drift of X between events
  Eigen::VectorXd mean_rate;  // E X_k(1)
  std::vector<double> t;      // event times (strictly increasing, > 0)
  std::vector<double> value;  // flattened events x n, value[i*n + k]

  std::size_t events() const { return t.size(); }
  double at(std::size_t i, int k) const { return value[i * n + k]; }
  double left_limit(std::size_t i, int k) const {
    double prev = i == 0 ? 0.0 : value[(i - 1) * n + k];
    double prev_t = i == 0 ? 0.0 : t[i - 1];
    return prev + slope(k) * (t[i] - prev_t);
  }
  Eigen::VectorXd terminal() const;
};

FreePath build_free_path(const TreeNetworkSpec& spec, const SamplePath& path);

// Path functionals of one realization: componentwise running maximum, the
// first epoch attaining it (left limits included), and the first departure
// from the future running maximum. On a finite horizon the departure time is
// right-censored; censored components carry detach_censored.
struct FluctuationSummary {
  Eigen::VectorXd max_value;    // sup of X_k over [0, horizon]
  Eigen::VectorXd max_time;     // first epoch attaining the maximum
  Eigen::VectorXd detach_time;  // first t with sup_{s>=t} X_k(s) > X_k(t)
  Eigen::VectorXd terminal;     // X(horizon)
  std::vector<std::uint8_t> detach_censored;
  std::vector<std::uint8_t> margin_ok;  // terminal < max - 10/|mean rate|

  bool converged() const {
    for (std::size_t k = 0; k < margin_ok.size(); ++k)
      if (!margin_ok[k] || detach_censored[k]) return false;
    return true;
  }
};

// Requires every component mean rate to be strictly negative.
FluctuationSummary summarize_path(const FreePath& path);

}  // namespace fluidnet
