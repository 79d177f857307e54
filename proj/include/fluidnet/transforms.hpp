#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "fluidnet/excursions.hpp"
#include "fluidnet/levy.hpp"
#include "fluidnet/model.hpp"

namespace fluidnet {

// Shared evaluation context: validation report, per-station exponents, and
// the tandem/excursion parameterizations when the network has them.
class NetworkTransforms {
 public:
  explicit NetworkTransforms(const TreeNetworkSpec& spec);

  int size() const { return spec_.size(); }
  const TreeNetworkSpec& spec() const { return spec_; }
  const ValidationReport& report() const { return report_; }
  const ExponentHandle& exponent(int station) const;
  const TandemDerived& tandem() const;   // throws unless tandem routing
  const ExcursionChain& chain() const;   // throws unless T7-T8 shape

 private:
  TreeNetworkSpec spec_;
  ValidationReport report_;
  std::vector<ExponentHandle> exponents_;
  std::optional<TandemDerived> tandem_;
  std::optional<ExcursionChain> chain_;
};

/*---------------------------------------------------------------------*/
/* Marginal identities                                                  */
/*---------------------------------------------------------------------*/

// E exp(-a G - b max X) = -E X(1) (Phi(a) - b) / (a - psi(b)); removable
// singularities switch to the analytic limit inside a 1e-8 window.
double fluctuation_identity(const ExponentHandle& h, double a, double b);

// Limit b -> infinity: P(max X = 0), the idle atom (0 for diffusion paths).
double max_atom_probability(const ExponentHandle& h);

struct BusyPeriodValue {
  double joint = 1.0;   // E exp(-alpha B - beta D)
  double length = 1.0;  // E exp(-alpha V), V = B + D
};
BusyPeriodValue busy_periods(const ExponentHandle& h, double alpha, double beta);

/*---------------------------------------------------------------------*/
/* Quasi-product transforms                                             */
/*---------------------------------------------------------------------*/

// Joint transform E exp(-<alpha, G> - <beta, max X>) under the chain
// structure, as a product of shifted marginal identities.
double quasi_product_xg(const NetworkTransforms& ctx,
                        const Eigen::VectorXd& alpha,
                        const Eigen::VectorXd& beta);

// Same conditioned on component k (0-based) staying nonpositive.
double conditioned_xg(const NetworkTransforms& ctx, int k,
                      const Eigen::VectorXd& alpha, const Eigen::VectorXd& beta);

// Stationary E exp(-<omega, W> - <beta, B>) for a tandem network. Both
// closed forms are evaluated and must agree to 1e-10; the ratio-of-marginals
// form is returned.
double tandem_wb(const NetworkTransforms& ctx, const Eigen::VectorXd& omega,
                 const Eigen::VectorXd& beta);

// Single compound-Poisson tandem specialization for one station (0-based).
struct SingleCpValue {
  double joint = 1.0;           // E exp(-omega W_i - beta B_i)
  double idle_prob = 0.0;       // P(W_i = 0)
  double upstream_empty = 0.0;  // E[exp(-omega W_i - beta B_i); W_{i-1} = 0]
};
SingleCpValue single_cp(const NetworkTransforms& ctx, int station, double omega,
                        double beta);

// Stationary E exp(-<gamma, I>) of the idle-age vector (T7-T8 networks).
double idle_vector(const NetworkTransforms& ctx, const Eigen::VectorXd& gamma);

// Stationary E exp(-<omega, W> - <beta, E>) for the priority system mapped
// onto the unit-chain equal-rate tandem; corrections evaluated by symbolic
// omega -> infinity limits.
double priority_we(const NetworkTransforms& ctx, const Eigen::VectorXd& omega,
                   const Eigen::VectorXd& beta);

}  // namespace fluidnet
