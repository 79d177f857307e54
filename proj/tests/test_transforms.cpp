#include <cmath>

#include "doctest.h"
#include "fluidnet/transforms.hpp"
#include "test_networks.hpp"

using namespace fluidnet;

namespace {

Eigen::VectorXd vec2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

}  // namespace

TEST_SUITE("transforms") {

TEST_CASE("marginal identity on the single-station running example") {
  NetworkTransforms ctx(testing::station1());
  const ExponentHandle& h = ctx.exponent(0);
  // c = 0.9, lambda = 1, Exp(2): E exp(-max X) = 0.4 / (0.9 - 1/3) = 12/17
  CHECK(fluctuation_identity(h, 0.0, 1.0) ==
        doctest::Approx(12.0 / 17.0).epsilon(1e-12));
  CHECK(fluctuation_identity(h, 0.0, 0.0) == 1.0);
  // the idle atom: 0.4 / 0.9 = 4/9
  CHECK(max_atom_probability(h) == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK_THROWS_AS(fluctuation_identity(h, -0.1, 0.0), DomainError);
}

TEST_CASE("marginal identity removable singularity") {
  NetworkTransforms ctx(testing::station1());
  const ExponentHandle& h = ctx.exponent(0);
  double a = 0.56;
  double b = h.phi(a);
  double at_singularity = fluctuation_identity(h, a, b);
  CHECK(at_singularity == doctest::Approx(-h.mean() / h.psi_deriv(b)).epsilon(1e-12));
  // continuous through the window
  double nearby = fluctuation_identity(h, a, b + 5e-7);
  CHECK(nearby == doctest::Approx(at_singularity).epsilon(1e-5));
}

TEST_CASE("busy-period transforms") {
  NetworkTransforms ctx(testing::station1());
  const ExponentHandle& h = ctx.exponent(0);
  BusyPeriodValue zero = busy_periods(h, 0.0, 0.0);
  CHECK(zero.joint == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(zero.length == doctest::Approx(1.0).epsilon(1e-12));

  // L'Hopital consistency across the alpha = beta window
  BusyPeriodValue at = busy_periods(h, 0.7, 0.7);
  BusyPeriodValue near = busy_periods(h, 0.7, 0.7 + 2e-8);
  CHECK(at.joint == doctest::Approx(near.joint).epsilon(1e-6));
  CHECK(at.joint == doctest::Approx(-h.mean() * h.phi_deriv(0.7)).epsilon(1e-12));
}

TEST_CASE("quasi-product trivial points") {
  NetworkTransforms ctx(testing::tandem2());
  CHECK(quasi_product_xg(ctx, vec2(0, 0), vec2(0, 0)) == doctest::Approx(1.0));
  NetworkTransforms one(testing::station1());
  Eigen::VectorXd a1 = Eigen::VectorXd::Constant(1, 0.3);
  Eigen::VectorXd b1 = Eigen::VectorXd::Constant(1, 0.8);
  CHECK(quasi_product_xg(one, a1, b1) ==
        doctest::Approx(fluctuation_identity(one.exponent(0), 0.3, 0.8))
            .epsilon(1e-14));
}

TEST_CASE("quasi-product marginals collapse to the fluctuation identity") {
  NetworkTransforms ctx(testing::tandem2());
  for (int k = 0; k < 2; ++k) {
    for (double a : {0.0, 0.4}) {
      for (double b : {0.0, 0.6, 1.2}) {
        Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(2);
        alpha(k) = a;
        beta(k) = b;
        double joint = quasi_product_xg(ctx, alpha, beta);
        double marginal = fluctuation_identity(ctx.exponent(k), a, b);
        CHECK(joint == doctest::Approx(marginal).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("conditioned transform trivial points") {
  NetworkTransforms ctx(testing::tandem2());
  CHECK(conditioned_xg(ctx, 1, vec2(0.4, 0.9), vec2(0.3, 0.2)) ==
        doctest::Approx(1.0));  // k = n: empty product
  CHECK(conditioned_xg(ctx, 0, vec2(0, 0), vec2(0, 0)) == doctest::Approx(1.0));
}

TEST_CASE("conditioned transform equals its defining ratio") {
  NetworkTransforms ctx(testing::tandem2());
  // E^down_1 exp(-beta_2 max X_2) = marginal(2) / shifted marginal(1)
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd beta = vec2(0.0, 1.0);
  double upsilon_rate = 1.0 * 1.0 - 0.6;  // p r_1 - r_2
  double expected = fluctuation_identity(ctx.exponent(1), 0.0, 1.0) /
                    fluctuation_identity(ctx.exponent(0), upsilon_rate * 1.0, 1.0);
  CHECK(conditioned_xg(ctx, 0, alpha, beta) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("tandem transform trivial points and the n = 1 reduction") {
  NetworkTransforms ctx(testing::tandem2());
  CHECK(tandem_wb(ctx, vec2(0, 0), vec2(0, 0)) == doctest::Approx(1.0));

  NetworkTransforms one(testing::station1());
  Eigen::VectorXd w1 = Eigen::VectorXd::Constant(1, 0.7);
  Eigen::VectorXd b1 = Eigen::VectorXd::Constant(1, 0.4);
  CHECK(tandem_wb(one, w1, b1) ==
        doctest::Approx(fluctuation_identity(one.exponent(0), 0.4, 0.7))
            .epsilon(1e-12));
}

TEST_CASE("both closed forms agree on a grid (asserted internally)") {
  NetworkTransforms ctx(testing::tandem2());
  for (double w1 : {0.0, 0.5, 1.0, 2.0})
    for (double w2 : {0.0, 0.5, 1.3})
      for (double b1 : {0.0, 0.9})
        for (double b2 : {0.0, 0.4, 1.1}) {
          double v = tandem_wb(ctx, vec2(w1, w2), vec2(b1, b2));
          CHECK(v > 0.0);
          CHECK(v <= 1.0 + 1e-12);
        }
}

TEST_CASE("transforms are monotone in each argument") {
  NetworkTransforms ctx(testing::tandem2());
  double prev = 1.0;
  for (double w : {0.2, 0.6, 1.4, 3.0}) {
    double v = tandem_wb(ctx, vec2(w, 0.3), vec2(0.1, 0.2));
    CHECK(v < prev);
    prev = v;
  }
  prev = 1.0;
  for (double b : {0.2, 0.6, 1.4}) {
    double v = tandem_wb(ctx, vec2(0.3, 0.3), vec2(0.1, b));
    CHECK(v < prev);
    prev = v;
  }
}

TEST_CASE("shared-input drain identity and the specialization match") {
  NetworkTransforms ctx(testing::tandem2());
  // (r_j - r_k) w = psi_j(w) - psi_k(w) under the shared-input shape
  for (double w : {0.3, 1.0, 2.7}) {
    double lhs = (1.0 - 0.6) * w;
    double rhs = ctx.exponent(0).psi(w) - ctx.exponent(1).psi(w);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
  // the single compound-Poisson formulas equal the tandem specialization
  for (int k = 0; k < 2; ++k)
    for (double w : {0.0, 0.5, 1.0})
      for (double b : {0.0, 0.5, 1.0}) {
        if (w == 0.0 && b == 0.0) continue;
        Eigen::VectorXd omega = Eigen::VectorXd::Zero(2);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(2);
        omega(k) = w;
        beta(k) = b;
        double from_tandem = tandem_wb(ctx, omega, beta);
        double direct = single_cp(ctx, k, w, b).joint;
        CHECK(direct == doctest::Approx(from_tandem).epsilon(1e-10));
      }
}

TEST_CASE("three-station specialization agrees at depth") {
  NetworkTransforms ctx(testing::tandem3());
  for (int k = 0; k < 3; ++k)
    for (double w : {0.0, 0.6})
      for (double b : {0.0, 0.9}) {
        if (w == 0.0 && b == 0.0) continue;
        Eigen::VectorXd omega = Eigen::VectorXd::Zero(3);
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(3);
        omega(k) = w;
        beta(k) = b;
        CHECK(single_cp(ctx, k, w, b).joint ==
              doctest::Approx(tandem_wb(ctx, omega, beta)).epsilon(1e-10));
      }
  // idle atoms down the chain: 4/9, 2/7, 1/6
  CHECK(single_cp(ctx, 0, 0, 0).idle_prob == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(single_cp(ctx, 1, 0, 0).idle_prob == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(single_cp(ctx, 2, 0, 0).idle_prob == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
}

TEST_CASE("idle atom on the drift-0.1 single station is 4/9") {
  NetworkTransforms ctx(testing::station1());
  SingleCpValue v = single_cp(ctx, 0, 0.0, 0.0);
  CHECK(v.idle_prob == doctest::Approx(4.0 / 9.0).epsilon(1e-12));
  CHECK(v.joint == doctest::Approx(1.0));
}

TEST_CASE("upstream-empty part at zero arguments recovers the idle atom") {
  NetworkTransforms ctx(testing::tandem2());
  SingleCpValue v = single_cp(ctx, 1, 0.0, 0.0);
  CHECK(v.joint == doctest::Approx(1.0));
  double p_up = single_cp(ctx, 0, 0.0, 0.0).idle_prob;
  CHECK(v.upstream_empty == doctest::Approx(p_up).epsilon(1e-10));
}

TEST_CASE("idle-vector trivial and telescoped values") {
  NetworkTransforms ctx(testing::tandem2());
  CHECK(idle_vector(ctx, vec2(0, 0)) == doctest::Approx(1.0));
  // single nonzero component: 1 - P(W_2 = 0) gamma / (lambda + gamma)
  double p2 = max_atom_probability(ctx.exponent(1));
  CHECK(p2 == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  CHECK(idle_vector(ctx, vec2(0, 1)) ==
        doctest::Approx(1.0 - p2 * 0.5).epsilon(1e-12));
  CHECK(idle_vector(ctx, vec2(0, 1)) == doctest::Approx(21.0 / 22.0).epsilon(1e-12));
  // monotone and bounded
  double a = idle_vector(ctx, vec2(0.5, 0.5));
  double b = idle_vector(ctx, vec2(1.0, 1.0));
  CHECK(a > b);
  CHECK(b > 0.0);
  CHECK(a <= 1.0);
}

TEST_CASE("priority transform: trivial point and strict-input collapse") {
  NetworkTransforms strict(testing::priority_strict2());
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(2);
  CHECK(priority_we(strict, zero, zero) == doctest::Approx(1.0));
  for (double w : {0.4, 1.0})
    for (double b : {0.3, 0.8}) {
      // strictly increasing low class: corrections vanish identically
      CHECK(priority_we(strict, vec2(w, w), vec2(b, b)) ==
            doctest::Approx(tandem_wb(strict, vec2(w, w), vec2(b, b)))
                .epsilon(1e-14));
    }
}

TEST_CASE("priority corrections are nonzero for compound Poisson classes") {
  NetworkTransforms ctx(testing::priority_cp2());
  double with_ages = priority_we(ctx, vec2(1, 1), vec2(0.5, 0.5));
  double aggregate = tandem_wb(ctx, vec2(1, 1), vec2(0.5, 0.5));
  CHECK(with_ages > aggregate);  // E_2 <= aggregate busy age pathwise
  CHECK(with_ages <= 1.0);
  // beta = 0 leaves no correction terms
  CHECK(priority_we(ctx, vec2(1, 1), vec2(0, 0)) ==
        doctest::Approx(tandem_wb(ctx, vec2(1, 1), vec2(0, 0))).epsilon(1e-14));
}

TEST_CASE("formula preconditions are enforced") {
  NetworkTransforms critical(testing::tandem2_critical());
  CHECK_THROWS_AS(tandem_wb(critical, vec2(0.5, 0.5), vec2(0, 0)), SpecError);

  NetworkTransforms ctx(testing::tandem2());
  CHECK_THROWS_AS(tandem_wb(ctx, vec2(-0.1, 0), vec2(0, 0)), DomainError);
  Eigen::VectorXd three = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(tandem_wb(ctx, three, three), DimensionError);
  // the upstream-empty part is undefined at the root station
  CHECK(std::isnan(single_cp(ctx, 0, 0.3, 0.4).upstream_empty));

  // priority image requires the unit chain with one shared rate
  CHECK_THROWS_AS(priority_we(ctx, vec2(0, 0), vec2(0, 0)), SpecError);
}

}  // TEST_SUITE
