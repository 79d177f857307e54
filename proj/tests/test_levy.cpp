#include <cmath>

#include "doctest.h"
#include "fluidnet/levy.hpp"
#include "fluidnet/rng.hpp"
#include "test_networks.hpp"

using namespace fluidnet;

namespace {

// single station with drain c + compound Poisson(lambda, Exp(mu)) input
TreeNetworkSpec cp_station(double c, double lambda, double mu, double drift = 0.0) {
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(1, 1);
  spec.drain = Eigen::VectorXd::Constant(1, c + drift);
  spec.input = {LevyComponentSpec::compound_poisson(lambda, JumpLaw::exponential(mu), drift)};
  spec.initial = Eigen::VectorXd::Zero(1);
  return spec;
}

}  // namespace

TEST_SUITE("levy") {

TEST_CASE("psi closed form: compound Poisson with drift") {
  // c = 0.9, lambda = 1, Exp(2): psi(1) = 0.9 - (1 - 2/3)
  ExponentHandle h(cp_station(0.9, 1.0, 2.0, 0.1), 0);
  CHECK(h.psi(1.0) == doctest::Approx(0.9 - 1.0 / 3.0).epsilon(1e-14));
  CHECK(h.psi(0.0) == 0.0);
  CHECK(h.mean() == doctest::Approx(0.1 + 0.5 - 1.0).epsilon(1e-14));
  CHECK(h.drift_rate() == doctest::Approx(-0.9).epsilon(1e-14));
}

TEST_CASE("psi closed form: brownian root adds the quadratic term") {
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(1, 1);
  spec.drain = Eigen::VectorXd::Constant(1, 0.5);
  spec.input = {LevyComponentSpec::brownian(1.0, 0.0)};
  spec.initial = Eigen::VectorXd::Zero(1);
  ExponentHandle h(spec, 0);
  CHECK(h.psi(2.0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(h.has_diffusion());
}

TEST_CASE("phi inverts psi on a log-spaced grid") {
  ExponentHandle h(cp_station(0.9, 1.0, 2.0), 0);
  for (double q = 1e-6; q < 2e3; q *= 10.0) {
    double beta = h.phi(q);
    CHECK(std::abs(h.psi(beta) - q) <= 1e-12 * (1.0 + q));
  }
  CHECK(h.phi(0.0) == 0.0);
}

TEST_CASE("phi agrees with the quadratic-root oracle for Exp(2) jumps") {
  // c = 1, lambda = 1, Exp(2): psi(b) = b - b/(2+b); the inverse solves
  // b^2 + (1-q) b - 2q = 0
  ExponentHandle h(cp_station(1.0, 1.0, 2.0), 0);
  for (double q : {0.1, 2.0 / 3.0, 1.5, 4.0}) {
    double root = 0.5 * (-(1.0 - q) + std::sqrt((1.0 - q) * (1.0 - q) + 8.0 * q));
    CHECK(h.phi(q) == doctest::Approx(root).epsilon(1e-11));
  }
  CHECK(h.phi(2.0 / 3.0) == doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("phi needs negative mean") {
  ExponentHandle h(cp_station(0.4, 1.0, 2.0), 0);  // E X(1) = +0.1
  CHECK_THROWS_WITH_AS(h.phi(1.0), doctest::Contains("Assumption D"),
                       DomainError);
}

TEST_CASE("mean matches the load computed from first principles") {
  TreeNetworkSpec spec = testing::tandem2();
  Eigen::VectorXd mean_in(2);
  mean_in << spec.input[0].mean_rate(), 0.0;
  Eigen::VectorXd load = neumann_inverse(spec.routing) * mean_in - spec.drain;
  for (int k = 0; k < 2; ++k) {
    ExponentHandle h(spec, k);
    CHECK(h.mean() == doctest::Approx(load(k)).epsilon(1e-13));
    CHECK(h.psi_deriv(0.0) == doctest::Approx(-load(k)).epsilon(1e-13));
  }
}

TEST_CASE("analytic derivatives match central differences") {
  ExponentHandle h(cp_station(0.9, 1.0, 2.0, 0.1), 0);
  const double step = 1e-6;
  for (double b : {0.5, 1.0, 3.0}) {
    double fd = (h.psi(b + step) - h.psi(b - step)) / (2.0 * step);
    CHECK(std::abs(h.psi_deriv(b) - fd) / std::abs(fd) < 1e-6);
  }
  for (double q : {0.3, 1.0, 2.5}) {
    double fd = (h.phi(q + step) - h.phi(q - step)) / (2.0 * step);
    CHECK(std::abs(h.phi_deriv(q) - fd) / std::abs(fd) < 1e-6);
  }
}

TEST_CASE("zero-input network produces a pure drift path") {
  TreeNetworkSpec spec = testing::tandem2();
  spec.input[0] = LevyComponentSpec::deterministic(0.05);
  SamplePath path = sample_path(spec, 10.0, 123);
  CHECK(path.events() == 0);
  CHECK(path.drift(0) == doctest::Approx(0.05));
}

TEST_CASE("Poisson event counts concentrate") {
  TreeNetworkSpec spec = testing::station1();
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    SamplePath path = sample_path(spec, 1000.0, seed);
    double count = static_cast<double>(path.events());
    CHECK(std::abs(count - 1000.0) < 4.0 * std::sqrt(1000.0));
  }
}

TEST_CASE("merged event list stays strictly sorted with attribution") {
  TreeNetworkSpec spec = testing::tandem2();
  spec.input[1] = LevyComponentSpec::compound_poisson(0.7, JumpLaw::exponential(3.0));
  SamplePath path = sample_path(spec, 200.0, 9);
  bool saw[2] = {false, false};
  for (std::size_t e = 0; e < path.events(); ++e) {
    if (e) CHECK(path.t[e] > path.t[e - 1]);
    CHECK(path.size[e] > 0.0);
    saw[path.comp[e]] = true;
  }
  CHECK(saw[0]);
  CHECK(saw[1]);
}

TEST_CASE("subordinator components have nondecreasing sampled increments") {
  TreeNetworkSpec spec = testing::tandem2();
  spec.input[1] = LevyComponentSpec::compound_poisson(0.5, JumpLaw::exponential(1.0), 0.02);
  SamplePath path = sample_path(spec, 300.0, 77);
  for (std::size_t e = 0; e < path.events(); ++e)
    if (path.comp[e] == 1) CHECK(path.size[e] >= 0.0);
  CHECK(path.drift(1) >= 0.0);
}

TEST_CASE("paths are deterministic in (seed, index) and independent across streams") {
  TreeNetworkSpec spec = testing::tandem2();
  SamplePath a = sample_path_indexed(spec, 50.0, 11, 4);
  SamplePath b = sample_path_indexed(spec, 50.0, 11, 4);
  REQUIRE(a.events() == b.events());
  for (std::size_t e = 0; e < a.events(); ++e) {
    CHECK(a.t[e] == b.t[e]);
    CHECK(a.size[e] == b.size[e]);
  }
  SamplePath c = sample_path_indexed(spec, 50.0, 11, 5);
  bool differs = c.events() != a.events() ||
                 (a.events() && (c.t[0] != a.t[0] || c.size[0] != a.size[0]));
  CHECK(differs);
}

TEST_CASE("brownian component lands on the grid") {
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(1, 1);
  spec.drain = Eigen::VectorXd::Constant(1, 1.0);
  spec.input = {LevyComponentSpec::brownian(0.5, 0.2)};
  spec.initial = Eigen::VectorXd::Zero(1);
  PathOptions opt;
  opt.brownian_step = 0.25;
  SamplePath path = sample_path(spec, 1.0, 3, opt);
  REQUIRE(path.events() == 4);
  CHECK(path.t[0] == doctest::Approx(0.25));
  CHECK(path.grid_step == doctest::Approx(0.25));
}

}  // TEST_SUITE
