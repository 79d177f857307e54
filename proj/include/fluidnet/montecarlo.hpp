#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "fluidnet/fluctuation.hpp"
#include "fluidnet/levy.hpp"
#include "fluidnet/model.hpp"
#include "fluidnet/skorokhod.hpp"

namespace fluidnet {

struct SimOptions {
  double base_horizon = 0.0;  // 0: derived from the convergence margin
  int max_doublings = 14;
  int max_attempts = 6;
  double brownian_step = 1e-3;
  unsigned threads = 0;  // 0: hardware concurrency
};

/*---------------------------------------------------------------------*/
/* Stationary samples                                                   */
/*---------------------------------------------------------------------*/

// One row per path: componentwise maximum of the free process, the epoch
// attaining it, and the departure time from the future maximum. These are
// the stationary (aggregate content, busy age, idle age) in distribution;
// W maps back through (I - P').
struct StationarySamples {
  int n = 0;
  std::size_t paths = 0;
  Eigen::MatrixXd reflect;  // I - P'
  std::vector<double> max_value;    // paths x n, flattened
  std::vector<double> max_time;
  std::vector<double> detach_time;
  std::size_t resampled = 0;    // paths that needed a fresh seed
  std::size_t unconverged = 0;  // paths that exhausted every attempt

  double censored_fraction() const {
    return paths ? static_cast<double>(unconverged) / paths : 0.0;
  }
  double xbar(std::size_t p, int k) const { return max_value[p * n + k]; }
  double busy(std::size_t p, int k) const { return max_time[p * n + k]; }
  double idle(std::size_t p, int k) const { return detach_time[p * n + k]; }
  double content(std::size_t p, int k) const {
    double w = 0.0;
    for (int j = 0; j < n; ++j) w += reflect(k, j) * max_value[p * n + j];
    return w;
  }
};

// Adaptive-horizon stationary sampler: horizons double until the running
// maximum is unchanged across a doubling, the terminal value clears the
// margin, and the departure time is uncensored; leftover censored paths are
// resampled with fresh seeds. Deterministic given (seed, options), whatever
// the worker count.
StationarySamples estimate_stationary(const TreeNetworkSpec& spec,
                                      std::size_t n_paths, std::uint64_t seed,
                                      const SimOptions& options = {});

/*---------------------------------------------------------------------*/
/* Estimators                                                           */
/*---------------------------------------------------------------------*/

struct TransformEstimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n_paths = 0;
  double censored_fraction = 0.0;
};

// Exponential functional weights; empty vectors mean zero weight.
struct StationaryQuery {
  Eigen::VectorXd omega_content;    // on W
  Eigen::VectorXd beta_busy;        // on B (== busy age of the aggregate)
  Eigen::VectorXd gamma_idle;       // on I
  Eigen::VectorXd omega_aggregate;  // on (I-P')^{-1} W
  Eigen::VectorXd beta_priority;    // on E_j = B~_j 1{W_j > 0}
};

TransformEstimate estimate_transform(const StationarySamples& samples,
                                     const StationaryQuery& query);

// Restricted to paths with max X_k = 0 (the conditioned law, by rejection).
TransformEstimate estimate_conditional(const StationarySamples& samples, int k,
                                       const StationaryQuery& query);

struct Verdict {
  bool pass = false;
  double z = 0.0;
  double rel_gap = 0.0;
};

// Paired comparison: the 3-standard-error band, with a 2% relative-error
// ceiling taking over when the band is narrower than the Monte Carlo bias
// floor.
Verdict compare(double analytic, const TransformEstimate& estimate);

/*---------------------------------------------------------------------*/
/* Distribution tests                                                   */
/*---------------------------------------------------------------------*/

double ks_statistic_exponential(std::vector<double> sample, double rate);
double ks_statistic_two_sample(std::vector<double> a, std::vector<double> b);
double ks_critical_one_sample(std::size_t n, double alpha = 0.01);
double ks_critical_two_sample(std::size_t n, std::size_t m, double alpha = 0.01);

/*---------------------------------------------------------------------*/
/* Forward simulation probes                                            */
/*---------------------------------------------------------------------*/

// Busy-interval (age, residual) of one station at a stationary inspection
// time, sampled by reflecting fresh paths; V = age + residual, zero when the
// station is idle at the inspection time.
struct BusyIntervalSamples {
  std::vector<double> age;
  std::vector<double> residual;
  std::size_t resampled = 0;
};
BusyIntervalSamples sample_busy_intervals(const TreeNetworkSpec& spec,
                                          int station, std::size_t n_draws,
                                          std::uint64_t seed,
                                          double inspect_time,
                                          const SimOptions& options = {});

// Buffer contents W(t_end) over independent paths started from spec.initial.
Eigen::MatrixXd sample_content_at(const TreeNetworkSpec& spec, double t_end,
                                  std::size_t n_paths, std::uint64_t seed,
                                  const SimOptions& options = {});

}  // namespace fluidnet
