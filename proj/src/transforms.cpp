#include "fluidnet/transforms.hpp"

#include <cmath>
#include <limits>

namespace fluidnet {

namespace {

constexpr double kSingularWindow = 1e-8;

void require_nonneg(const Eigen::VectorXd& v, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v(i) < 0.0)
      throw DomainError(std::string(name) + ": entries must be >= 0");
}

void require_dim(const Eigen::VectorXd& v, int n, const char* name) {
  if (v.size() != n)
    throw DimensionError(std::string(name) + ": expected " + std::to_string(n) +
                         " entries");
}

// (Phi(a) - b) / (a - psi(b)) with the removable singularity filled in.
double phi_ratio(const ExponentHandle& h, double a, double b) {
  if (a == 0.0 && b == 0.0) return 1.0 / h.psi_deriv(0.0);
  double pa = h.phi(a);
  if (std::abs(b - pa) < kSingularWindow) return 1.0 / h.psi_deriv(b);
  return (pa - b) / (a - h.psi(b));
}

}  // namespace

/*---------------------------------------------------------------------*/
/* Context                                                              */
/*---------------------------------------------------------------------*/

NetworkTransforms::NetworkTransforms(const TreeNetworkSpec& spec)
    : spec_(spec), report_(validate_network(spec)) {
  exponents_.reserve(spec_.size());
  for (int k = 0; k < spec_.size(); ++k) exponents_.emplace_back(spec_, k);
  bool tandem_shape = true;
  for (int i = 0; i < spec_.size() && tandem_shape; ++i)
    for (int j = 0; j < spec_.size(); ++j)
      if (spec_.routing(i, j) != 0.0 && j != i + 1) tandem_shape = false;
  for (int i = 0; i + 1 < spec_.size() && tandem_shape; ++i)
    if (!(spec_.routing(i, i + 1) > 0.0)) tandem_shape = false;
  if (tandem_shape) {
    tandem_ = derive_tandem(spec_);
    if (tandem_->single_cp &&
        spec_.input[0].intensity * spec_.input[0].jumps.mean() <
            tandem_->c(spec_.size() - 1))
      chain_ = chain_from_tandem(*tandem_);
  }
}

const ExponentHandle& NetworkTransforms::exponent(int station) const {
  if (station < 0 || station >= size())
    throw DomainError("transforms: station index out of range");
  return exponents_[station];
}

const TandemDerived& NetworkTransforms::tandem() const {
  if (!tandem_) throw SpecError("transforms: network is not a tandem chain");
  return *tandem_;
}

const ExcursionChain& NetworkTransforms::chain() const {
  if (!chain_)
    throw SpecError("transforms: network lacks the single compound-Poisson "
                    "tandem shape (T7-T8)");
  return *chain_;
}

/*---------------------------------------------------------------------*/
/* Marginal identities                                                  */
/*---------------------------------------------------------------------*/

double fluctuation_identity(const ExponentHandle& h, double a, double b) {
  if (a < 0.0 || b < 0.0)
    throw DomainError("fluctuation identity: arguments must be >= 0");
  if (!(h.mean() < 0.0))
    throw DomainError("fluctuation identity: component must drift to -infinity");
  if (a == 0.0 && b == 0.0) return 1.0;
  return -h.mean() * phi_ratio(h, a, b);
}

double max_atom_probability(const ExponentHandle& h) {
  if (!(h.mean() < 0.0))
    throw DomainError("atom probability: component must drift to -infinity");
  if (h.has_diffusion()) return 0.0;
  return h.mean() / h.drift_rate();
}

BusyPeriodValue busy_periods(const ExponentHandle& h, double alpha, double beta) {
  if (alpha < 0.0 || beta < 0.0)
    throw DomainError("busy periods: arguments must be >= 0");
  if (!(h.mean() < 0.0))
    throw DomainError("busy periods: component must drift to -infinity");
  BusyPeriodValue out;
  out.length = -h.mean() * h.phi_deriv(alpha);
  if (std::abs(alpha - beta) < kSingularWindow)
    out.joint = -h.mean() * h.phi_deriv(alpha);
  else
    out.joint = -h.mean() * (h.phi(alpha) - h.phi(beta)) / (alpha - beta);
  return out;
}

/*---------------------------------------------------------------------*/
/* Quasi-product transforms                                             */
/*---------------------------------------------------------------------*/

namespace {

// Sum over l > j of the subordinator-difference cumulants evaluated at the
// chain-weighted tail of beta.
double upsilon_tail(const NetworkTransforms& ctx, int j,
                    const Eigen::VectorXd& beta) {
  const TandemDerived& td = ctx.tandem();
  const int n = ctx.size();
  double sum = 0.0;
  for (int l = j + 1; l < n; ++l) {
    double arg = 0.0;
    for (int k = l; k < n; ++k) arg += td.kpow(l, k) * beta(k);
    sum += input_cumulant(ctx.spec().input[l], arg) + td.upsilon_drift(l) * arg;
  }
  return sum;
}

double chain_weighted(const NetworkTransforms& ctx, int j, int from,
                      const Eigen::VectorXd& beta) {
  const TandemDerived& td = ctx.tandem();
  double sum = 0.0;
  for (int l = from; l < ctx.size(); ++l) sum += td.kpow(j, l) * beta(l);
  return sum;
}

}  // namespace

double quasi_product_xg(const NetworkTransforms& ctx,
                        const Eigen::VectorXd& alpha,
                        const Eigen::VectorXd& beta) {
  const int n = ctx.size();
  require_dim(alpha, n, "alpha");
  require_dim(beta, n, "beta");
  require_nonneg(alpha, "alpha");
  require_nonneg(beta, "beta");
  ctx.tandem();  // chain structure required

  double alpha_tail = alpha(n - 1);
  double value = fluctuation_identity(ctx.exponent(n - 1), alpha(n - 1),
                                      beta(n - 1));
  for (int j = n - 2; j >= 0; --j) {
    double theta = upsilon_tail(ctx, j, beta);
    double numerator = fluctuation_identity(
        ctx.exponent(j), alpha(j) + alpha_tail + theta,
        chain_weighted(ctx, j, j, beta));
    double denominator = fluctuation_identity(
        ctx.exponent(j), alpha_tail + theta, chain_weighted(ctx, j, j + 1, beta));
    if (denominator == 0.0)
      throw DomainError("quasi-product: singular marginal factor");
    value *= numerator / denominator;
    alpha_tail += alpha(j);
  }
  return value;
}

double conditioned_xg(const NetworkTransforms& ctx, int k,
                      const Eigen::VectorXd& alpha,
                      const Eigen::VectorXd& beta) {
  const int n = ctx.size();
  if (k < 0 || k >= n) throw DomainError("conditioned transform: bad station");
  require_dim(alpha, n, "alpha");
  require_dim(beta, n, "beta");
  require_nonneg(alpha, "alpha");
  require_nonneg(beta, "beta");
  ctx.tandem();

  double value = 1.0;
  for (int j = k; j < n - 1; ++j) {
    double tail_next = 0.0;
    for (int l = j + 1; l < n; ++l) tail_next += alpha(l);
    double numerator = fluctuation_identity(
        ctx.exponent(j + 1), tail_next + upsilon_tail(ctx, j + 1, beta),
        chain_weighted(ctx, j + 1, j + 1, beta));
    double denominator = fluctuation_identity(
        ctx.exponent(j), tail_next + upsilon_tail(ctx, j, beta),
        chain_weighted(ctx, j, j + 1, beta));
    if (denominator == 0.0)
      throw DomainError("conditioned transform: singular marginal factor");
    value *= numerator / denominator;
  }
  return value;
}

/*---------------------------------------------------------------------*/
/* Tandem W/B transform                                                 */
/*---------------------------------------------------------------------*/

namespace {

// G-argument shared by the factors at station j: tail cumulants, the chain
// drift corrections, and the busy arguments strictly beyond j.
double tandem_tail(const NetworkTransforms& ctx, int j,
                   const Eigen::VectorXd& omega, const Eigen::VectorXd& beta) {
  const TandemDerived& td = ctx.tandem();
  double sum = 0.0;
  for (int l = j + 1; l < ctx.size(); ++l) {
    sum += input_cumulant(ctx.spec().input[l], omega(l));
    sum += td.upsilon_drift(l) * omega(l);
    sum += beta(l);
  }
  return sum;
}

double tandem_wb_marginal_form(const NetworkTransforms& ctx,
                               const Eigen::VectorXd& omega,
                               const Eigen::VectorXd& beta) {
  const int n = ctx.size();
  const TandemDerived& td = ctx.tandem();
  double value =
      fluctuation_identity(ctx.exponent(n - 1), beta(n - 1), omega(n - 1));
  for (int j = 0; j < n - 1; ++j) {
    double tail = tandem_tail(ctx, j, omega, beta);
    double numerator =
        fluctuation_identity(ctx.exponent(j), tail + beta(j), omega(j));
    double denominator = fluctuation_identity(ctx.exponent(j), tail,
                                              td.chain(j + 1) * omega(j + 1));
    if (denominator == 0.0) throw DomainError("tandem transform: singular factor");
    value *= numerator / denominator;
  }
  return value;
}

double tandem_wb_phi_form(const NetworkTransforms& ctx,
                          const Eigen::VectorXd& omega,
                          const Eigen::VectorXd& beta) {
  const int n = ctx.size();
  const TandemDerived& td = ctx.tandem();
  const ExponentHandle& last = ctx.exponent(n - 1);
  double value;
  if (beta(n - 1) == 0.0 && omega(n - 1) == 0.0)
    value = 1.0;
  else
    value = -last.mean() * phi_ratio(last, beta(n - 1), omega(n - 1));
  for (int j = 0; j < n - 1; ++j) {
    const ExponentHandle& h = ctx.exponent(j);
    double tail = tandem_tail(ctx, j, omega, beta);
    value *= phi_ratio(h, tail + beta(j), omega(j)) /
             phi_ratio(h, tail, td.chain(j + 1) * omega(j + 1));
  }
  return value;
}

}  // namespace

double tandem_wb(const NetworkTransforms& ctx, const Eigen::VectorXd& omega,
                 const Eigen::VectorXd& beta) {
  const int n = ctx.size();
  require_dim(omega, n, "omega");
  require_dim(beta, n, "beta");
  require_nonneg(omega, "omega");
  require_nonneg(beta, "beta");
  if (!ctx.report().tandem_formulas())
    throw SpecError("tandem transform: conditions T1-T6 must hold");

  double first = tandem_wb_marginal_form(ctx, omega, beta);
  double second = tandem_wb_phi_form(ctx, omega, beta);
  if (std::abs(first - second) > 1e-10 * std::max(1.0, std::abs(first)))
    throw std::logic_error("tandem transform: closed forms disagree beyond 1e-10");
  return first;
}

/*---------------------------------------------------------------------*/
/* Single compound-Poisson tandem                                       */
/*---------------------------------------------------------------------*/

SingleCpValue single_cp(const NetworkTransforms& ctx, int station, double omega,
                        double beta) {
  const int n = ctx.size();
  if (station < 0 || station >= n)
    throw DomainError("single-cp transform: bad station");
  if (omega < 0.0 || beta < 0.0)
    throw DomainError("single-cp transform: arguments must be >= 0");
  if (!ctx.report().single_cp_formulas())
    throw SpecError("single-cp transform: conditions T7-T8 must hold");

  const ExponentHandle& h = ctx.exponent(station);
  SingleCpValue out;
  out.idle_prob = h.mean() / h.drift_rate();

  if (station == 0) {
    // no upstream station: the marginal identity gives the joint directly,
    // and the upstream-empty part is undefined
    out.joint = fluctuation_identity(h, beta, omega);
    out.upstream_empty = std::numeric_limits<double>::quiet_NaN();
    return out;
  }

  const ExponentHandle& up = ctx.exponent(station - 1);
  const double d = ctx.spec().input[0].drift;
  const double gap =
      (ctx.spec().drain(station - 1) - ctx.spec().drain(station)) * omega;
  const double x = gap + beta;

  // the prefactor E X_i(1)/(d - r_{i-1}) is positive: at omega = beta = 0
  // the transform must recover P(W_{i-1} = 0)
  if (std::abs(beta - h.psi(omega)) < kSingularWindow) {
    // paired zeros of Phi_i(beta) - omega and Phi_{i-1}(x) - omega
    double ratio = up.psi_deriv(omega) / h.psi_deriv(omega);
    out.joint =
        omega == 0.0 ? 1.0 : -h.mean() * ratio * omega / up.psi(omega);
    out.upstream_empty = h.mean() / (d - ctx.spec().drain(station - 1)) * ratio;
    return out;
  }

  double phi_up = up.phi(x);
  double phi_here = h.phi(beta);
  out.joint = -h.mean() * (phi_here - omega) / x * phi_up / (phi_up - omega);
  out.upstream_empty = h.mean() / (d - ctx.spec().drain(station - 1)) *
                       (phi_here - omega) / (phi_up - omega);
  return out;
}

/*---------------------------------------------------------------------*/
/* Idle vector                                                          */
/*---------------------------------------------------------------------*/

double idle_vector(const NetworkTransforms& ctx, const Eigen::VectorXd& gamma) {
  const int n = ctx.size();
  require_dim(gamma, n, "gamma");
  require_nonneg(gamma, "gamma");
  const ExcursionChain& chain = ctx.chain();

  double value = 1.0;
  for (int k = 0; k < n; ++k) {
    if (gamma(k) == 0.0) continue;  // the k-th term vanishes
    double empty = max_atom_probability(ctx.exponent(k));
    Eigen::VectorXd head = gamma.head(k + 1);
    Eigen::VectorXd head_zero = head;
    head_zero(k) = 0.0;
    double with = h_transform_conditioned(chain, k, head);
    double without = h_transform_conditioned(chain, k, head_zero);
    value -= empty * (without - with);
  }
  return value;
}

/*---------------------------------------------------------------------*/
/* Priority system                                                      */
/*---------------------------------------------------------------------*/

namespace {

// Tandem transform with omega_l -> infinity for l >= cut, via the symbolic
// limits theta(inf) and the atom P(max X = 0). Returns 0 when a strictly
// increasing class or a diffusion forces the target event to be null.
double tandem_wb_with_cut(const NetworkTransforms& ctx,
                          const Eigen::VectorXd& omega,
                          const Eigen::VectorXd& beta, int cut) {
  const int n = ctx.size();
  const TandemDerived& td = ctx.tandem();
  for (int l = cut; l < n; ++l) {
    if (ctx.spec().input[l].cumulant_limit() ==
        std::numeric_limits<double>::infinity())
      return 0.0;  // strictly increasing input: the station is never empty
    if (l >= 1 && td.upsilon_drift(l) > 0.0) return 0.0;
  }
  if (ctx.exponent(n - 1).has_diffusion()) return 0.0;

  auto tail = [&](int j) {
    double sum = 0.0;
    for (int l = j + 1; l < n; ++l) {
      if (l >= cut)
        sum += ctx.spec().input[l].cumulant_limit();
      else
        sum += input_cumulant(ctx.spec().input[l], omega(l)) +
               td.upsilon_drift(l) * omega(l);
      sum += beta(l);
    }
    return sum;
  };

  double value = (n - 1 >= cut)
                     ? max_atom_probability(ctx.exponent(n - 1))
                     : fluctuation_identity(ctx.exponent(n - 1), beta(n - 1),
                                            omega(n - 1));
  for (int j = 0; j < n - 1; ++j) {
    if (j >= cut) continue;  // both factors collapse to the same atom
    double t = tail(j);
    double numerator = fluctuation_identity(ctx.exponent(j), t + beta(j), omega(j));
    double denominator =
        (j + 1 >= cut)
            ? max_atom_probability(ctx.exponent(j))
            : fluctuation_identity(ctx.exponent(j), t,
                                   td.chain(j + 1) * omega(j + 1));
    value *= numerator / denominator;
  }
  return value;
}

}  // namespace

double priority_we(const NetworkTransforms& ctx, const Eigen::VectorXd& omega,
                   const Eigen::VectorXd& beta) {
  const int n = ctx.size();
  require_dim(omega, n, "omega");
  require_dim(beta, n, "beta");
  require_nonneg(omega, "omega");
  require_nonneg(beta, "beta");
  if (!ctx.report().tandem_formulas())
    throw SpecError("priority transform: mapped tandem must satisfy T1-T6");
  const TandemDerived& td = ctx.tandem();
  for (int j = 1; j < n; ++j)
    if (td.chain(j) != 1.0 || ctx.spec().drain(j) != ctx.spec().drain(0))
      throw SpecError("priority transform: requires the unit-chain tandem "
                      "image with one shared drain rate");

  double value = tandem_wb(ctx, omega, beta);
  for (int j = 1; j < n; ++j) {
    if (beta(j) == 0.0) continue;
    Eigen::VectorXd kept = Eigen::VectorXd::Zero(n);
    for (int l = 0; l <= j; ++l) kept(l) = beta(l);
    Eigen::VectorXd dropped = kept;
    dropped(j) = 0.0;
    value += tandem_wb_with_cut(ctx, omega, dropped, j) -
             tandem_wb_with_cut(ctx, omega, kept, j);
  }
  return value;
}

}  // namespace fluidnet
