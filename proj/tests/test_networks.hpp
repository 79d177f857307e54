#pragma once

#include <Eigen/Dense>

#include "fluidnet/model.hpp"
#include "fluidnet/rng.hpp"

namespace fluidnet::testing {

// 2-station tandem: lambda = 1, Exp(2) jumps, root drift 0.05, r = (1, 0.6),
// p12 = 1. Passes all of N1-N3 and T1-T8.
inline TreeNetworkSpec tandem2() {
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(2, 2);
  spec.routing(0, 1) = 1.0;
  spec.drain = Eigen::VectorXd(2);
  spec.drain << 1.0, 0.6;
  spec.input = {LevyComponentSpec::compound_poisson(1.0, JumpLaw::exponential(2.0), 0.05),
                LevyComponentSpec::zero()};
  spec.initial = Eigen::VectorXd::Zero(2);
  return spec;
}

// Same shape with root drift 0.1: the aggregate rate ties r_2, so T4 fails.
inline TreeNetworkSpec tandem2_critical() {
  TreeNetworkSpec spec = tandem2();
  spec.input[0].drift = 0.1;
  return spec;
}

// Single station: lambda = 1, Exp(2), drift 0.1, r = 1; P(W = 0) = 4/9.
inline TreeNetworkSpec station1() {
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(1, 1);
  spec.drain = Eigen::VectorXd::Constant(1, 1.0);
  spec.input = {LevyComponentSpec::compound_poisson(1.0, JumpLaw::exponential(2.0), 0.1)};
  spec.initial = Eigen::VectorXd::Zero(1);
  return spec;
}

// 3-station unit chain, lambda = 1, Exp(2), drift 0.1, r = (1, 0.8, 0.7).
inline TreeNetworkSpec tandem3() {
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(3, 3);
  spec.routing(0, 1) = 1.0;
  spec.routing(1, 2) = 1.0;
  spec.drain = Eigen::VectorXd(3);
  spec.drain << 1.0, 0.8, 0.7;
  spec.input = {LevyComponentSpec::compound_poisson(1.0, JumpLaw::exponential(2.0), 0.1),
                LevyComponentSpec::zero(), LevyComponentSpec::zero()};
  spec.initial = Eigen::VectorXd::Zero(3);
  return spec;
}

// Priority image: two compound-Poisson classes, intensity 0.4, Exp(2) jumps,
// shared drain rate 1.
inline TreeNetworkSpec priority_cp2() {
  return make_priority_network(
      1.0,
      {LevyComponentSpec::compound_poisson(0.4, JumpLaw::exponential(2.0)),
       LevyComponentSpec::compound_poisson(0.4, JumpLaw::exponential(2.0))});
}

// Priority image whose low class is strictly increasing, so (W, E) and
// (W, aggregate busy age) coincide in law.
inline TreeNetworkSpec priority_strict2() {
  return make_priority_network(
      1.0,
      {LevyComponentSpec::compound_poisson(0.4, JumpLaw::exponential(2.0)),
       LevyComponentSpec::compound_poisson(0.4, JumpLaw::exponential(2.0), 0.05)});
}

// Random tree network satisfying N1-N3 and T1 by construction; compound
// Poisson root, mixed subordinator feeders, some nonzero initial content.
inline TreeNetworkSpec random_tree(int n, Rng& rng) {
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(n, n);
  spec.drain = Eigen::VectorXd(n);
  spec.initial = Eigen::VectorXd(n);
  spec.drain(0) = 0.8 + 0.4 * rng.uniform();
  spec.initial(0) = rng.uniform() < 0.5 ? 0.0 : 2.0 * rng.uniform();
  spec.input.push_back(LevyComponentSpec::compound_poisson(
      0.5 + rng.uniform(), JumpLaw::exponential(1.0 + 2.0 * rng.uniform()),
      0.2 * rng.uniform()));
  for (int j = 1; j < n; ++j) {
    int feeder = static_cast<int>(rng.uniform() * j);
    if (feeder >= j) feeder = j - 1;
    spec.drain(j) = spec.drain(feeder) * (0.4 + 0.5 * rng.uniform());
    spec.routing(feeder, j) =
        spec.drain(j) / spec.drain(feeder) * (1.05 + 0.5 * rng.uniform());
    spec.initial(j) = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
    if (rng.uniform() < 0.5)
      spec.input.push_back(LevyComponentSpec::zero());
    else
      spec.input.push_back(LevyComponentSpec::compound_poisson(
          0.2 + 0.6 * rng.uniform(), JumpLaw::exponential(1.0 + 2.0 * rng.uniform()),
          0.1 * rng.uniform()));
  }
  return spec;
}

}  // namespace fluidnet::testing
