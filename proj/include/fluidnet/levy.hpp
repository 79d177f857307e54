#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <vector>

#include "fluidnet/model.hpp"

namespace fluidnet {

struct DomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {
// Inverse of a strictly increasing f on [0, inf) with f(0) = 0: bracket by
// doubling, bisect to 1e-13, then one Newton polish.
double invert_increasing(const std::function<double(double)>& f,
                         const std::function<double(double)>& fprime, double q);
}  // namespace detail

/*---------------------------------------------------------------------*/
/* Laplace exponents                                                    */
/*---------------------------------------------------------------------*/

// Closed-form psi_i(beta) = log E exp(-beta X_i(1)) for one free-process
// component X_i = sum_j M_ij J_j - r_i t, together with its derivative,
// the inverse Phi_i, and the station mean. Pure and immutable.
class ExponentHandle {
 public:
  ExponentHandle(const TreeNetworkSpec& spec, int station);

  int station() const { return station_; }
  double psi(double beta) const;
  double psi_deriv(double beta) const;
  double mean() const { return mean_; }          // E X_i(1) = -psi'(0)
  double drift_rate() const { return slope_; }   // pathwise slope between jumps
  bool has_diffusion() const { return has_diffusion_; }

  // Inverse of psi; requires E X_i(1) < 0 and q >= 0. phi(0) == 0 exactly.
  double phi(double q) const;
  double phi_deriv(double q) const;  // 1 / psi'(phi(q))

 private:
  int station_;
  Eigen::VectorXd weight_;  // row of (I - P')^{-1}
  double drain_;
  double mean_;
  double slope_;
  bool has_diffusion_;
  std::vector<LevyComponentSpec> inputs_;
};

// Subordinator cumulant theta(beta) = -log E exp(-beta J(1)).
double input_cumulant(const LevyComponentSpec& input, double beta);
double input_cumulant_deriv(const LevyComponentSpec& input, double beta);

/*---------------------------------------------------------------------*/
/* Sample paths                                                         */
/*---------------------------------------------------------------------*/

// Exact piecewise-linear-with-jumps input path J on [0, horizon]: sparse
// events (time, component, increment) on top of a constant drift vector.
// Compound-Poisson events are exact; a Brownian component contributes signed
// increments on a uniform grid of step grid_step.
struct SamplePath {
  int n = 0;
  double horizon = 0.0;
  double grid_step = 0.0;
  Eigen::VectorXd drift;
  std::vector<double> t;
  std::vector<int> comp;
  std::vector<double> size;

  std::size_t events() const { return t.size(); }
};

struct PathOptions {
  double brownian_step = 1e-3;
};

// Deterministic given (seed, options): component c of path p draws from the
// stream seeded by stream_seed(seed, p, c); this function is the p = 0 case.
SamplePath sample_path(const TreeNetworkSpec& spec, double horizon,
                       std::uint64_t seed, const PathOptions& options = {});

// Stream-level generator used by the Monte Carlo layer.
SamplePath sample_path_indexed(const TreeNetworkSpec& spec, double horizon,
                               std::uint64_t seed, std::uint64_t path_index,
                               const PathOptions& options = {});

}  // namespace fluidnet
