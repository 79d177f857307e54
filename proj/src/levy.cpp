#include "fluidnet/levy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fluidnet/rng.hpp"

namespace fluidnet {

namespace detail {

double invert_increasing(const std::function<double(double)>& f,
                         const std::function<double(double)>& fprime, double q) {
  if (q < 0.0) throw DomainError("invert_increasing: argument must be >= 0");
  if (q == 0.0) return 0.0;

  double hi = 1.0;
  while (f(hi) < q) {
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("invert_increasing: no finite bracket");
  }
  double lo = 0.0;
  while (hi - lo > 1e-13 * (1.0 + hi)) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) < q)
      lo = mid;
    else
      hi = mid;
  }
  double x = 0.5 * (lo + hi);
  double d = fprime(x);
  if (d > 0.0) {
    double step = (f(x) - q) / d;
    double polished = x - step;
    if (polished >= lo && polished <= hi) x = polished;
  }
  return x;
}

}  // namespace detail

/*---------------------------------------------------------------------*/
/* ExponentHandle                                                       */
/*---------------------------------------------------------------------*/

ExponentHandle::ExponentHandle(const TreeNetworkSpec& spec, int station)
    : station_(station), inputs_(spec.input) {
  spec.check_shape();
  if (station < 0 || station >= spec.size())
    throw DomainError("exponent: station index out of range");
  Eigen::MatrixXd m = neumann_inverse(spec.routing);
  weight_ = m.row(station);
  drain_ = spec.drain(station);

  slope_ = -drain_;
  has_diffusion_ = false;
  for (int j = 0; j < spec.size(); ++j) {
    if (weight_(j) == 0.0) continue;
    slope_ += weight_(j) * inputs_[j].drift;
    if (inputs_[j].kind == InputKind::Brownian) has_diffusion_ = true;
  }
  mean_ = -psi_deriv(0.0);
}

double ExponentHandle::psi(double beta) const {
  if (beta < 0.0) throw DomainError("psi: argument must be >= 0");
  double v = drain_ * beta;
  for (std::size_t j = 0; j < inputs_.size(); ++j) {
    double w = weight_(static_cast<Eigen::Index>(j));
    if (w == 0.0) continue;
    v += inputs_[j].exponent(w * beta);
  }
  return v;
}

double ExponentHandle::psi_deriv(double beta) const {
  if (beta < 0.0) throw DomainError("psi: argument must be >= 0");
  double v = drain_;
  for (std::size_t j = 0; j < inputs_.size(); ++j) {
    double w = weight_(static_cast<Eigen::Index>(j));
    if (w == 0.0) continue;
    v += w * inputs_[j].exponent_deriv(w * beta);
  }
  return v;
}

double ExponentHandle::phi(double q) const {
  if (mean_ >= 0.0)
    throw DomainError("phi: Assumption D violated at station " +
                      std::to_string(station_ + 1) + " (E X(1) >= 0)");
  if (q < 0.0) throw DomainError("phi: argument must be >= 0");
  if (q == 0.0) return 0.0;
  return detail::invert_increasing([this](double b) { return psi(b); },
                                   [this](double b) { return psi_deriv(b); }, q);
}

double ExponentHandle::phi_deriv(double q) const {
  return 1.0 / psi_deriv(phi(q));
}

double input_cumulant(const LevyComponentSpec& input, double beta) {
  return -input.exponent(beta);
}

double input_cumulant_deriv(const LevyComponentSpec& input, double beta) {
  return -input.exponent_deriv(beta);
}

/*---------------------------------------------------------------------*/
/* Path generation                                                      */
/*---------------------------------------------------------------------*/

SamplePath sample_path_indexed(const TreeNetworkSpec& spec, double horizon,
                               std::uint64_t seed, std::uint64_t path_index,
                               const PathOptions& options) {
  spec.check_shape();
  if (!(horizon > 0.0)) throw DomainError("sample_path: horizon must be > 0");
  const int n = spec.size();

  SamplePath path;
  path.n = n;
  path.horizon = horizon;
  path.drift = Eigen::VectorXd::Zero(n);

  struct Event {
    double t;
    int comp;
    double size;
  };
  std::vector<Event> events;

  for (int j = 0; j < n; ++j) {
    const LevyComponentSpec& in = spec.input[j];
    path.drift(j) = in.drift;
    if (in.kind == InputKind::CompoundPoisson) {
      Rng rng(stream_seed(seed, path_index, static_cast<std::uint64_t>(j)));
      double t = rng.exponential(in.intensity);
      while (t <= horizon) {
        events.push_back({t, j, in.jumps.sample(rng)});
        t += rng.exponential(in.intensity);
      }
    } else if (in.kind == InputKind::Brownian) {
      Rng rng(stream_seed(seed, path_index, static_cast<std::uint64_t>(j)));
      path.grid_step = options.brownian_step;
      double sd = std::sqrt(in.variance * options.brownian_step);
      for (double t = options.brownian_step; t <= horizon;
           t += options.brownian_step) {
        events.push_back({t, j, sd * rng.normal()});
      }
    }
  }

  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.t < b.t || (a.t == b.t && a.comp < b.comp);
  });
  // Ties across independent continuous draws are measure zero; nudge so the
  // event list stays strictly increasing.
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].t <= events[i - 1].t)
      events[i].t = std::nextafter(events[i - 1].t, horizon * 2.0);

  path.t.reserve(events.size());
  path.comp.reserve(events.size());
  path.size.reserve(events.size());
  for (const Event& e : events) {
    path.t.push_back(e.t);
    path.comp.push_back(e.comp);
    path.size.push_back(e.size);
  }
  return path;
}

SamplePath sample_path(const TreeNetworkSpec& spec, double horizon,
                       std::uint64_t seed, const PathOptions& options) {
  return sample_path_indexed(spec, horizon, seed, 0, options);
}

}  // namespace fluidnet
