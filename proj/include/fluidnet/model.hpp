#pragma once

#include <Eigen/Dense>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fluidnet {

// Thrown when a network document is structurally malformed (bad JSON, wrong
// shapes, invalid parameters). Distinct from condition failures, which are
// reported through ValidationReport.
struct SpecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when query vectors do not match the network dimension.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Rng;  // defined in rng.hpp

/*---------------------------------------------------------------------*/
/* Jump laws                                                            */
/*---------------------------------------------------------------------*/

// Positive jump-size distribution with a closed-form Laplace transform.
class JumpLaw {
 public:
  enum class Kind { Exponential, Constant, Mixture };

  static JumpLaw exponential(double rate);
  static JumpLaw constant(double size);
  static JumpLaw mixture(std::vector<std::pair<double, JumpLaw>> parts);

  Kind kind() const { return kind_; }
  double rate() const { return param_; }
  double size() const { return param_; }
  const std::vector<std::pair<double, JumpLaw>>& parts() const { return parts_; }

  double mean() const;
  // E exp(-beta * xi), closed form for every variant.
  double laplace(double beta) const;
  // d/dbeta of laplace (= -E[xi exp(-beta xi)]).
  double laplace_deriv(double beta) const;
  double sample(Rng& rng) const;

 private:
  JumpLaw() = default;
  Kind kind_ = Kind::Exponential;
  double param_ = 1.0;
  std::vector<std::pair<double, JumpLaw>> parts_;
};

/*---------------------------------------------------------------------*/
/* Station inputs                                                       */
/*---------------------------------------------------------------------*/

enum class InputKind { CompoundPoisson, Brownian, Drift, Zero };

struct LevyComponentSpec {
  InputKind kind = InputKind::Zero;
  double drift = 0.0;      // deterministic rate (content/time)
  double intensity = 0.0;  // compound-Poisson jump rate
  JumpLaw jumps = JumpLaw::constant(1.0);
  double variance = 0.0;   // Brownian sigma^2

  static LevyComponentSpec compound_poisson(double intensity, JumpLaw law,
                                            double drift = 0.0);
  static LevyComponentSpec brownian(double variance, double drift = 0.0);
  static LevyComponentSpec deterministic(double rate);
  static LevyComponentSpec zero();

  // Nondecreasing sample paths: CP/drift with nonnegative rate, or zero.
  bool is_subordinator() const;
  bool is_strictly_increasing() const;  // positive deterministic rate
  bool is_deterministic() const;        // no randomness at all
  double mean_rate() const;             // E J(1)

  // log E exp(-beta J(1)); the subordinator cumulant is its negative.
  double exponent(double beta) const;
  double exponent_deriv(double beta) const;
  // Cumulant limit theta(inf) = -lim log E e^{-beta J(1)}; +inf when the
  // component is strictly increasing.
  double cumulant_limit() const;

  void check_valid(int station) const;  // throws SpecError
};

/*---------------------------------------------------------------------*/
/* Network specification                                                */
/*---------------------------------------------------------------------*/

struct TreeNetworkSpec {
  Eigen::MatrixXd routing;                // P, n x n
  Eigen::VectorXd drain;                  // r, each > 0
  std::vector<LevyComponentSpec> input;   // J_1..J_n
  Eigen::VectorXd initial;                // w0 >= 0

  int size() const { return static_cast<int>(drain.size()); }
  void check_shape() const;  // throws SpecError naming the offending field

  // Unique feeder of station j (N2), or -1 for the root / unfed stations.
  int feeder(int j) const;
};

// Exact (I - P')^{-1} = I + P' + ... + P'^{n-1} for strictly triangular P.
Eigen::MatrixXd neumann_inverse(const Eigen::MatrixXd& routing);

struct ValidationReport {
  bool n1 = false, n2 = false, n3 = false;
  bool t1 = false, t2 = false, t3 = false, t4 = false, t5 = false, t6 = false;
  bool t1_strict = false;  // strict inequality at every edge
  bool t7 = false, t8 = false;  // capability flags, not failures
  std::vector<std::string> violations;

  // Accepted for simulation: N1-N3 and T1-T4.
  bool accepted() const { return n1 && n2 && n3 && t1 && t2 && t3 && t4; }
  // Tandem transform formulas callable (T1-T6).
  bool tandem_formulas() const { return accepted() && t5 && t6; }
  // Single compound-Poisson formulas callable (Cor-type and idle formulas).
  bool single_cp_formulas() const { return tandem_formulas() && t7 && t8; }
};

ValidationReport validate_network(const TreeNetworkSpec& spec);

/*---------------------------------------------------------------------*/
/* Tandem parameterization                                              */
/*---------------------------------------------------------------------*/

struct TandemDerived {
  int n = 0;
  Eigen::VectorXd chain;          // chain(j) = p_{j-1,j} for j >= 1; chain(0) = 1
  Eigen::MatrixXd chain_pow;      // chain_pow(j,l) = prod_{i=j+1..l} chain(i), j <= l
  Eigen::VectorXd upsilon_drift;  // upsilon_drift(l) = p_{l-1,l} r_{l-1} - r_l, l >= 1
  bool single_cp = false;         // T7-T8 shape
  Eigen::VectorXd c;              // c(j) = r_j - d when single_cp
  double lambda = 0.0;            // root jump intensity when single_cp
  JumpLaw root_jumps = JumpLaw::constant(1.0);

  double kpow(int j, int l) const { return chain_pow(j, l); }
};

// Requires tandem routing (superdiagonal only); throws SpecError otherwise.
TandemDerived derive_tandem(const TreeNetworkSpec& spec);

// Tandem image of a priority station: equal drain rates, unit chain.
TreeNetworkSpec make_priority_network(double rate,
                                      std::vector<LevyComponentSpec> classes,
                                      Eigen::VectorXd w0 = {});

/*---------------------------------------------------------------------*/
/* JSON interface                                                       */
/*---------------------------------------------------------------------*/

// Document format: {"n":..., "P":[[...]], "r":[...], "inputs":[{...}], "w0":[...]}
TreeNetworkSpec network_from_json(const std::string& text);
TreeNetworkSpec network_from_file(const std::string& path);
std::string network_to_json(const TreeNetworkSpec& spec);
std::string report_to_json(const ValidationReport& report);

}  // namespace fluidnet
