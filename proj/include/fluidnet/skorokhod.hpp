#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fluidnet/levy.hpp"
#include "fluidnet/model.hpp"

namespace fluidnet {

/*---------------------------------------------------------------------*/
/* Piecewise-linear cadlag trajectories                                 */
/*---------------------------------------------------------------------*/

// Breakpoints t[0] = 0, ..., covering [0, horizon]; v[k] is the value at t[k]
// (right-continuous), g[k] the slope on [t[k], t[k+1]).
struct PiecewisePath {
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> g;
  double horizon = 0.0;

  double value(double s) const;
  double left_limit(double s) const;
  std::size_t segments() const { return t.size(); }
};

// Running maximum sup_{s<=u} f(s) as a cadlag nondecreasing piecewise path.
PiecewisePath running_max(const PiecewisePath& f);

// max(0, f - shift) for nondecreasing f.
PiecewisePath clamp_above(const PiecewisePath& f, double shift);

/*---------------------------------------------------------------------*/
/* Reflection                                                           */
/*---------------------------------------------------------------------*/

struct ReflectionResult {
  int n = 0;
  double horizon = 0.0;
  std::vector<double> t;                // shared refined grid, t[0] = 0
  std::vector<PiecewisePath> content;   // W_j
  std::vector<PiecewisePath> regulator; // L_j
  std::vector<PiecewisePath> aggregate; // (I-P')^{-1} W, componentwise
};

// Explicit solution: L = 0 v sup[-(I-P')^{-1} Y - (I-P')^{-1} w], evaluated
// exactly on segment endpoints and jump instants; W = w + Y + (I-P') L.
ReflectionResult reflect_explicit(const TreeNetworkSpec& spec,
                                  const SamplePath& path);

// Independent oracle: solves L_i(t) = 0 v sup_{s<=t}[(P'L)_i(s) - w_i - Y_i(s)]
// sequentially in station order.
ReflectionResult reflect_fixed_point(const TreeNetworkSpec& spec,
                                     const SamplePath& path);

// Sup-norm distance between two solutions over W, L and the aggregate,
// evaluated on the union of both grids.
double reflection_distance(const ReflectionResult& a, const ReflectionResult& b);

// Segment-wise audit of the reflection dynamics: W >= 0, L(0) = 0 and
// nondecreasing, W(0) = w, and dL > 0 only where W = 0.
struct DynamicsAudit {
  double min_content = 0.0;              // most negative W value seen
  double min_regulator_slope = 0.0;      // most negative L slope seen
  double max_complementarity = 0.0;      // largest |W| on a pushing segment
  double initial_error = 0.0;            // max |W(0) - w|
  bool pass(double tol) const {
    return min_content >= -tol && min_regulator_slope >= -tol &&
           max_complementarity <= tol && initial_error <= tol;
  }
};
DynamicsAudit audit_dynamics(const TreeNetworkSpec& spec,
                             const ReflectionResult& result);

/*---------------------------------------------------------------------*/
/* Ages                                                                 */
/*---------------------------------------------------------------------*/

struct AgeVector {
  Eigen::VectorXd busy;       // B_j: time since W_j was last zero
  Eigen::VectorXd idle;       // I_j: time since W_j was last positive
  Eigen::VectorXd busy_agg;   // same for the aggregate content
  Eigen::VectorXd idle_agg;
  Eigen::VectorXd priority;   // E_j = busy_agg_j * 1{W_j > 0}
};

// Ages at time s (cadlag values); throws DomainError past the horizon.
AgeVector extract_ages(const ReflectionResult& result, double s);

}  // namespace fluidnet
