#include "fluidnet/excursions.hpp"

#include <cmath>

namespace fluidnet {

/*---------------------------------------------------------------------*/
/* ExcursionModel                                                       */
/*---------------------------------------------------------------------*/

void ExcursionModel::check() const {
  if (!(drain > 0.0)) throw SpecError("excursion model: drain must be > 0");
  if (!(intensity > 0.0)) throw SpecError("excursion model: intensity must be > 0");
  if (!(mean() < 0.0))
    throw SpecError("excursion model: E Z(1) must be negative");
}

double ExcursionModel::psi(double beta) const {
  return drain * beta - intensity * (1.0 - jumps.laplace(beta));
}

double ExcursionModel::psi_deriv(double beta) const {
  return drain + intensity * jumps.laplace_deriv(beta);
}

double ExcursionModel::phi(double q) const {
  check();
  return detail::invert_increasing([this](double b) { return psi(b); },
                                   [this](double b) { return psi_deriv(b); }, q);
}

double excursion_length_transform(const ExcursionModel& model, double gamma) {
  if (gamma < 0.0) throw DomainError("excursion length: gamma must be >= 0");
  return (model.intensity + gamma - model.drain * model.phi(gamma)) /
         model.intensity;
}

namespace {

double initial_mark_transform(const ExcursionModel& model, double a,
                              double kappa) {
  // E exp(-a xi - kappa M) with (xi, M) the initial marked jump
  if (model.identity_marks) return model.jumps.laplace(a + kappa);
  return model.jumps.laplace(a) * std::exp(-kappa * model.constant_mark);
}

}  // namespace

double undershoot_transform(const ExcursionModel& model, double beta,
                            double gamma, double kappa) {
  if (beta < 0.0 || gamma < 0.0 || kappa < 0.0)
    throw DomainError("undershoot transform: arguments must be >= 0");
  model.check();
  const double c = model.drain;
  const double lambda = model.intensity;
  const double a = (beta + gamma + lambda) / c;
  double numerator = (beta + gamma - c * model.phi(gamma) + lambda) *
                     initial_mark_transform(model, a, kappa);
  double denominator = beta + lambda * model.jumps.laplace(a);
  return numerator / denominator;
}

double undershoot_transform_form2(const ExcursionModel& model, double beta,
                                  double gamma, double kappa) {
  if (beta < 0.0 || gamma < 0.0 || kappa < 0.0)
    throw DomainError("undershoot transform: arguments must be >= 0");
  model.check();
  const double c = model.drain;
  const double lambda = model.intensity;
  const double a = (beta + gamma + lambda) / c;
  double numerator = (beta + lambda * excursion_length_transform(model, gamma)) *
                     initial_mark_transform(model, a, kappa);
  double denominator = beta + lambda * model.jumps.laplace(a);
  return numerator / denominator;
}

double recurrence_transform(double mu, const JumpLaw& zeta, double s,
                            double beta, double gamma) {
  if (!(mu > 0.0)) throw DomainError("recurrence transform: mu must be > 0");
  if (s < 0.0 || s > 1.0)
    throw DomainError("recurrence transform: s must lie in [0, 1]");
  if (beta < 0.0 || gamma < 0.0)
    throw DomainError("recurrence transform: arguments must be >= 0");
  if (beta + s * mu == 0.0) return zeta.laplace(beta + gamma + mu);
  return beta / (beta + s * mu) * zeta.laplace(beta + gamma + mu) +
         s * mu / (beta + s * mu) * zeta.laplace(gamma + (1.0 - s) * mu);
}

/*---------------------------------------------------------------------*/
/* Parallel-drain chain                                                 */
/*---------------------------------------------------------------------*/

void ExcursionChain::check() const {
  if (c.size() < 1) throw SpecError("excursion chain: empty drain vector");
  for (int j = 0; j < size(); ++j) {
    if (!(c(j) > 0.0)) throw SpecError("excursion chain: drains must be > 0");
    if (j > 0 && !(c(j) < c(j - 1)))
      throw SpecError("excursion chain: drains must decrease strictly");
  }
  if (!(lambda * jumps.mean() < c(size() - 1)))
    throw SpecError("excursion chain: slowest drain must beat the input rate");
}

ExcursionModel ExcursionChain::station(int j) const {
  if (j < 0 || j >= size())
    throw DomainError("excursion chain: station out of range");
  ExcursionModel m;
  m.drain = c(j);
  m.intensity = lambda;
  m.jumps = jumps;
  return m;
}

ExcursionChain chain_from_tandem(const TandemDerived& tandem) {
  if (!tandem.single_cp)
    throw SpecError("excursion chain: network lacks the single-input "
                    "compound-Poisson tandem shape");
  ExcursionChain chain;
  chain.c = tandem.c;
  chain.lambda = tandem.lambda;
  chain.jumps = tandem.root_jumps;
  chain.check();
  return chain;
}

double coefficient_c(const ExcursionChain& chain, int j, int k,
                     const Eigen::VectorXd& beta) {
  if (j < 0 || k >= chain.size() || j > k)
    throw DomainError("coefficient C: indices out of range");
  double sum = 0.0;
  for (int l = j; l < k; ++l)
    sum += (1.0 / chain.c(l + 1) - 1.0 / chain.c(l)) *
           (chain.lambda + beta(l));
  return chain.c(j) * sum;
}

double coefficient_d(const ExcursionChain& chain, int j, int k,
                     const Eigen::VectorXd& gamma) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(std::max(k, 1));
  double prefix = 0.0;
  for (int l = 0; l < k; ++l) {
    prefix += gamma(l);
    beta(l) = prefix;
  }
  return coefficient_c(chain, j, k, beta);
}

namespace {

double length_transform_at(const ExcursionChain& chain, int j, double arg) {
  return excursion_length_transform(chain.station(j), arg);
}

}  // namespace

double rho_by_recursion(const ExcursionChain& chain, int level,
                        const Eigen::VectorXd& beta,
                        const Eigen::VectorXd& gamma) {
  chain.check();
  if (level < 0 || level >= chain.size())
    throw DomainError("rho recursion: level out of range");
  if (beta.size() != level || gamma.size() != level + 1)
    throw DimensionError("rho recursion: argument sizes must be (level, level+1)");
  if (level == 0) return length_transform_at(chain, 0, gamma(0));

  const double lambda = chain.lambda;
  const double ratio = chain.c(level - 1) / chain.c(level);
  const double shifted =
      (ratio - 1.0) * (lambda + beta(level - 1)) + ratio * gamma(level);

  double numerator =
      beta(level - 1) + lambda * length_transform_at(chain, level, gamma(level));
  double denominator =
      beta(level - 1) + lambda * length_transform_at(chain, level - 1, shifted);

  Eigen::VectorXd sub_beta = beta.head(level - 1);
  Eigen::VectorXd sub_gamma = gamma.head(level);
  sub_gamma(level - 1) += shifted;
  return numerator / denominator *
         rho_by_recursion(chain, level - 1, sub_beta, sub_gamma);
}

double rho_transform(const ExcursionChain& chain, int k,
                     const Eigen::VectorXd& beta, double gamma) {
  chain.check();
  if (k < 0 || k >= chain.size())
    throw DomainError("rho transform: level out of range");
  if (beta.size() < k)
    throw DimensionError("rho transform: beta must have k entries");
  if (gamma < 0.0) throw DomainError("rho transform: gamma must be >= 0");

  const double lambda = chain.lambda;
  double value = 1.0;
  for (int j = 0; j < k; ++j) {
    double arg_hi = coefficient_c(chain, j + 1, k, beta) +
                    chain.c(j + 1) / chain.c(k) * gamma;
    double arg_lo =
        coefficient_c(chain, j, k, beta) + chain.c(j) / chain.c(k) * gamma;
    double numerator = beta(j) + lambda * length_transform_at(chain, j + 1, arg_hi);
    double denominator = beta(j) + lambda * length_transform_at(chain, j, arg_lo);
    value *= numerator / denominator;
  }
  double tail_arg =
      coefficient_c(chain, 0, k, beta) + chain.c(0) / chain.c(k) * gamma;
  return value * length_transform_at(chain, 0, tail_arg);
}

double h_transform_conditioned(const ExcursionChain& chain, int k,
                               const Eigen::VectorXd& gamma,
                               bool printed_variant) {
  chain.check();
  if (k < 0 || k >= chain.size())
    throw DomainError("conditioned transform: level out of range");
  if (gamma.size() != k + 1)
    throw DimensionError("conditioned transform: gamma must have k+1 entries");
  for (int l = 0; l <= k; ++l)
    if (gamma(l) < 0.0)
      throw DomainError("conditioned transform: gamma must be >= 0");

  const double lambda = chain.lambda;
  const double ck = chain.c(k);

  double below_sum = 0.0;  // gamma_1 + ... + gamma_{k-1} (levels below k)
  for (int l = 0; l < k; ++l) below_sum += gamma(l);
  double total = below_sum + gamma(k);

  double weighted = 0.0;  // sum gamma_l (1 - c_k/c_l), l < k
  for (int l = 0; l < k; ++l) weighted += gamma(l) * (1.0 - ck / chain.c(l));

  double lead = (lambda + weighted -
                 ck * chain.station(0).phi(coefficient_d(chain, 0, k, gamma))) /
                (lambda + total);

  double value = lead;
  for (int j = 0; j < k; ++j) {
    double shared = lambda + below_sum;
    for (int l = j + 1; l < k; ++l) shared -= ck / chain.c(l) * gamma(l);
    double numerator =
        shared -
        ck * chain.station(j + 1).phi(coefficient_d(chain, j + 1, k, gamma));
    double denominator =
        shared - ck * chain.station(j).phi(coefficient_d(chain, j, k, gamma));
    if (printed_variant) denominator -= gamma(k);
    value *= numerator / denominator;
  }
  return value;
}

/*---------------------------------------------------------------------*/
/* Simulation oracles                                                   */
/*---------------------------------------------------------------------*/

ExcursionDraw sample_excursion(const ExcursionModel& model, Rng& rng) {
  ExcursionDraw draw;
  double z = model.jumps.sample(rng);
  draw.last_mark = model.identity_marks ? z : model.constant_mark;
  double t = 0.0;
  double t_last_jump = 0.0;
  for (;;) {
    double gap = rng.exponential(model.intensity);
    double to_zero = z / model.drain;
    if (to_zero <= gap) {
      draw.length = t + to_zero;
      draw.undershoot = draw.length - t_last_jump;
      return draw;
    }
    t += gap;
    z -= model.drain * gap;
    double jump = model.jumps.sample(rng);
    z += jump;
    t_last_jump = t;
    draw.last_mark = model.identity_marks ? jump : model.constant_mark;
    ++draw.jump_count;
  }
}

RecurrenceDraw sample_recurrence(double mu, const JumpLaw& zeta_law, Rng& rng) {
  RecurrenceDraw draw;
  draw.zeta = zeta_law.sample(rng);
  double t = 0.0;
  double last = 0.0;
  for (;;) {
    t += rng.exponential(mu);
    if (t > draw.zeta) break;
    last = t;
    ++draw.count;
  }
  draw.backward = draw.zeta - last;
  return draw;
}

ExcursionLattice sample_excursion_lattice(const ExcursionChain& chain, Rng& rng) {
  const int n = chain.size();
  const int top = n - 1;
  ExcursionLattice lat;
  lat.rho = Eigen::VectorXd::Zero(n);
  lat.sigma = Eigen::VectorXd::Zero(n);

  std::vector<bool> in_exc(n, true);
  std::vector<double> excess(n);
  double t = rng.exponential(chain.lambda);
  double z = chain.jumps.sample(rng);
  for (int j = 0; j < n; ++j) {
    lat.sigma(j) = t;
    excess[j] = z;
  }

  for (;;) {
    double gap = rng.exponential(chain.lambda);
    for (int j = 0; j < n; ++j) {
      if (in_exc[j] && excess[j] / chain.c(j) <= gap) {
        lat.rho(j) = t + excess[j] / chain.c(j);
        in_exc[j] = false;
      }
    }
    if (!in_exc[top]) return lat;
    z = chain.jumps.sample(rng);
    for (int j = 0; j < n; ++j) {
      if (in_exc[j]) {
        excess[j] += z - chain.c(j) * gap;
      } else {
        lat.sigma(j) = t + gap;
        excess[j] = z;
        in_exc[j] = true;
      }
    }
    t += gap;
  }
}

}  // namespace fluidnet
