#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fluidnet/levy.hpp"
#include "fluidnet/model.hpp"
#include "fluidnet/rng.hpp"

namespace fluidnet {

/*---------------------------------------------------------------------*/
/* Compound Poisson process with negative drift                         */
/*---------------------------------------------------------------------*/

// Z(t) = jumps - c t with jump intensity lambda and law F, started from one
// extra jump xi ~ F at time zero. Marks ride on jumps: either the jump size
// itself or a constant.
struct ExcursionModel {
  double drain = 1.0;       // c > 0
  double intensity = 1.0;   // lambda > 0
  JumpLaw jumps = JumpLaw::exponential(1.0);
  bool identity_marks = true;
  double constant_mark = 0.0;

  void check() const;  // requires E Z(1) < 0
  double psi(double beta) const;       // c beta - lambda (1 - F^(beta))
  double psi_deriv(double beta) const;
  double phi(double q) const;          // inverse of psi
  double mean() const { return intensity * jumps.mean() - drain; }
};

// E exp(-gamma tau_-) for the first excursion length: (lambda + gamma -
// c Phi(gamma)) / lambda.
double excursion_length_transform(const ExcursionModel& model, double gamma);

// Joint transform of the excursion undershoot tau_- - T_{N_-}, the length
// tau_-, and the mark of the last jump. `form2` evaluates the second
// displayed shape (through the excursion-length transform); the two must
// agree to 1e-10.
double undershoot_transform(const ExcursionModel& model, double beta,
                            double gamma, double kappa);
double undershoot_transform_form2(const ExcursionModel& model, double beta,
                                  double gamma, double kappa);

// E s^{N(zeta)} exp(-beta A(zeta) - gamma zeta) for a Poisson(mu) point
// process, independent positive zeta, and backward recurrence time A.
double recurrence_transform(double mu, const JumpLaw& zeta, double s,
                            double beta, double gamma);

/*---------------------------------------------------------------------*/
/* Parallel drains c_1 > ... > c_n sharing one jump process             */
/*---------------------------------------------------------------------*/

// Chain of components X_j = Pi - c_j t with common compound-Poisson Pi.
struct ExcursionChain {
  Eigen::VectorXd c;  // strictly decreasing, positive
  double lambda = 1.0;
  JumpLaw jumps = JumpLaw::exponential(1.0);

  int size() const { return static_cast<int>(c.size()); }
  void check() const;
  ExcursionModel station(int j) const;  // Z with drain c_j
};

ExcursionChain chain_from_tandem(const TandemDerived& tandem);

// Coefficient C_j^k(beta) = c_j sum_{l=j..k-1} (1/c_{l+1} - 1/c_l)(lambda +
// beta_l); beta is 0-based with beta[l] multiplying the gap at level l+1.
double coefficient_c(const ExcursionChain& chain, int j, int k,
                     const Eigen::VectorXd& beta);
// Same with beta_l = gamma_1 + ... + gamma_{l+1} (prefix sums).
double coefficient_d(const ExcursionChain& chain, int j, int k,
                     const Eigen::VectorXd& gamma);

// Joint transform of the last-excursion lattice up to level i, evaluated by
// the level-by-level recursion. beta has i-1 entries (gaps rho_{j+1}-rho_j),
// gamma has i entries (lengths rho_j - sigma_j).
double rho_by_recursion(const ExcursionChain& chain, int i,
                        const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& gamma);

// Closed form: product of ratios with C_j^k coefficients times the level-1
// marginal. gamma weights only the top length rho_k - sigma_k.
double rho_transform(const ExcursionChain& chain, int k,
                     const Eigen::VectorXd& beta, double gamma);

// E^down_k exp(-sum gamma_j H_j): the conditioned joint transform of the
// departure ages, in the telescoped Phi/D form. The derived form's
// denominator sums run to k-1; `printed_variant` selects the k-bound variant
// kept for comparison.
double h_transform_conditioned(const ExcursionChain& chain, int k,
                               const Eigen::VectorXd& gamma,
                               bool printed_variant = false);

/*---------------------------------------------------------------------*/
/* Simulation oracles                                                   */
/*---------------------------------------------------------------------*/

struct ExcursionDraw {
  double undershoot = 0.0;  // tau_- minus the last jump epoch
  double length = 0.0;      // tau_-
  double last_mark = 0.0;   // mark of the last jump (the initial one if none)
  int jump_count = 0;       // jumps after the initial one
};
ExcursionDraw sample_excursion(const ExcursionModel& model, Rng& rng);

struct RecurrenceDraw {
  int count = 0;        // N(zeta)
  double backward = 0;  // A(zeta) = zeta - U_{N(zeta)}
  double zeta = 0;
};
RecurrenceDraw sample_recurrence(double mu, const JumpLaw& zeta_law, Rng& rng);

// One draw of the last-excursion lattice (rho_j^{(n)}, sigma_j^{(n)}) for all
// levels j, cut at the end of the top component's first excursion.
struct ExcursionLattice {
  Eigen::VectorXd rho;    // last excursion end per level
  Eigen::VectorXd sigma;  // last excursion start per level
};
ExcursionLattice sample_excursion_lattice(const ExcursionChain& chain, Rng& rng);

}  // namespace fluidnet
