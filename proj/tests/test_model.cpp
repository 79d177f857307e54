#include "doctest.h"

#include "fluidnet/model.hpp"
#include "fluidnet/rng.hpp"
#include "test_networks.hpp"

using namespace fluidnet;

TEST_SUITE("model") {

TEST_CASE("running tandem with drift 0.1 ties the downstream rate: T4 fails") {
  ValidationReport rep = validate_network(testing::tandem2_critical());
  CHECK(rep.n1);
  CHECK(rep.n2);
  CHECK(rep.n3);
  CHECK(rep.t1);
  CHECK(rep.t1_strict);
  CHECK(rep.t2);
  CHECK_FALSE(rep.t4);
  CHECK_FALSE(rep.accepted());
  bool names_t4 = false;
  for (const auto& v : rep.violations)
    if (v.find("T4") != std::string::npos &&
        v.find("station 2") != std::string::npos)
      names_t4 = true;
  CHECK(names_t4);
}

TEST_CASE("drift 0.05 variant passes everything") {
  ValidationReport rep = validate_network(testing::tandem2());
  CHECK(rep.accepted());
  CHECK(rep.tandem_formulas());
  CHECK(rep.single_cp_formulas());
  CHECK(rep.violations.empty());
}

TEST_CASE("single station is trivially a tree") {
  ValidationReport rep = validate_network(testing::station1());
  CHECK(rep.n1);
  CHECK(rep.n2);
  CHECK(rep.n3);
  CHECK(rep.accepted());
}

TEST_CASE("lower-triangular routing entry violates N1") {
  TreeNetworkSpec spec = testing::tandem2();
  spec.routing(1, 0) = 0.3;
  ValidationReport rep = validate_network(spec);
  CHECK_FALSE(rep.n1);
}

TEST_CASE("two feeders violate N2") {
  TreeNetworkSpec spec = testing::tandem3();
  spec.routing(0, 2) = 0.5;
  ValidationReport rep = validate_network(spec);
  CHECK_FALSE(rep.n2);
}

TEST_CASE("brownian feeder violates T2") {
  TreeNetworkSpec spec = testing::tandem2();
  spec.input[1] = LevyComponentSpec::brownian(1.0);
  ValidationReport rep = validate_network(spec);
  CHECK_FALSE(rep.t2);
}

TEST_CASE("weak edge clears T1 but not the strict flag") {
  TreeNetworkSpec spec = testing::priority_cp2();
  ValidationReport rep = validate_network(spec);
  CHECK(rep.t1);
  CHECK_FALSE(rep.t1_strict);
}

TEST_CASE("shape errors name the offending field") {
  TreeNetworkSpec spec = testing::tandem2();
  spec.routing = Eigen::MatrixXd::Zero(2, 3);
  CHECK_THROWS_WITH_AS(validate_network(spec),
                       doctest::Contains("P: routing matrix must be square"),
                       SpecError);

  spec = testing::tandem2();
  spec.drain(1) = 0.0;
  CHECK_THROWS_WITH_AS(validate_network(spec), doctest::Contains("r: drain"),
                       SpecError);

  CHECK_THROWS_AS(JumpLaw::exponential(0.0), SpecError);
  CHECK_THROWS_AS(JumpLaw::mixture({{0.5, JumpLaw::constant(1.0)},
                                    {0.4, JumpLaw::constant(2.0)}}),
                  SpecError);
}

TEST_CASE("Neumann sum inverts I - P' exactly") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    TreeNetworkSpec spec = testing::random_tree(2 + trial % 4, rng);
    const int n = spec.size();
    Eigen::MatrixXd m = neumann_inverse(spec.routing);
    Eigen::MatrixXd identity =
        (Eigen::MatrixXd::Identity(n, n) - spec.routing.transpose()) * m;
    CHECK((identity - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() <=
          1e-13);
  }
}

TEST_CASE("chain powers multiply: K_j^l K_l^m = K_j^m") {
  TreeNetworkSpec spec = testing::tandem3();
  spec.routing(0, 1) = 2.0;
  spec.routing(1, 2) = 3.0;
  TandemDerived td = derive_tandem(spec);
  for (int j = 0; j < 3; ++j)
    for (int l = j; l < 3; ++l)
      for (int m = l; m < 3; ++m)
        CHECK(td.kpow(j, l) * td.kpow(l, m) == doctest::Approx(td.kpow(j, m)));
  CHECK(td.kpow(0, 2) == doctest::Approx(6.0));
}

TEST_CASE("tandem derivation: c_j = r_j - d") {
  TreeNetworkSpec spec = testing::tandem3();
  spec.drain << 1.0, 0.8, 0.6;
  TandemDerived td = derive_tandem(spec);
  REQUIRE(td.single_cp);
  CHECK(td.c(0) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(td.c(1) == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(td.c(2) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(td.lambda == doctest::Approx(1.0));
}

TEST_CASE("tandem derivation with gain: K and Upsilon drift") {
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(2, 2);
  spec.routing(0, 1) = 2.0;
  spec.drain = Eigen::VectorXd(2);
  spec.drain << 1.0, 0.5;
  spec.input = {LevyComponentSpec::compound_poisson(0.2, JumpLaw::exponential(2.0)),
                LevyComponentSpec::zero()};
  spec.initial = Eigen::VectorXd::Zero(2);
  TandemDerived td = derive_tandem(spec);
  CHECK(td.chain(1) == doctest::Approx(2.0));
  CHECK(td.kpow(0, 1) == doctest::Approx(2.0));
  CHECK(td.upsilon_drift(1) == doctest::Approx(1.5));
}

TEST_CASE("one station: trivial chain table") {
  TandemDerived td = derive_tandem(testing::station1());
  CHECK(td.n == 1);
  CHECK(td.kpow(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("non-tandem routing names the offending entry") {
  TreeNetworkSpec spec = testing::tandem3();
  spec.routing(0, 2) = 0.4;
  CHECK_THROWS_WITH_AS(derive_tandem(spec), doctest::Contains("P(1,3)"),
                       SpecError);
}

TEST_CASE("jump law transforms are closed form") {
  JumpLaw exp2 = JumpLaw::exponential(2.0);
  CHECK(exp2.laplace(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(exp2.mean() == doctest::Approx(0.5));

  JumpLaw fixed = JumpLaw::constant(0.7);
  CHECK(fixed.laplace(2.0) == doctest::Approx(std::exp(-1.4)).epsilon(1e-14));

  JumpLaw mix = JumpLaw::mixture({{0.25, exp2}, {0.75, fixed}});
  CHECK(mix.mean() == doctest::Approx(0.25 * 0.5 + 0.75 * 0.7));
  CHECK(mix.laplace(1.0) ==
        doctest::Approx(0.25 * (2.0 / 3.0) + 0.75 * std::exp(-0.7)));
  double h = 1e-6;
  double fd = (mix.laplace(1.0 + h) - mix.laplace(1.0 - h)) / (2 * h);
  CHECK(mix.laplace_deriv(1.0) == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("json round trip preserves the document") {
  TreeNetworkSpec spec = testing::tandem2();
  spec.input[1] = LevyComponentSpec::compound_poisson(
      0.3,
      JumpLaw::mixture({{0.5, JumpLaw::exponential(3.0)},
                        {0.5, JumpLaw::constant(0.2)}}),
      0.01);
  TreeNetworkSpec back = network_from_json(network_to_json(spec));
  CHECK(back.size() == spec.size());
  CHECK((back.routing - spec.routing).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.drain - spec.drain).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.input[1].kind == InputKind::CompoundPoisson);
  CHECK(back.input[1].jumps.kind() == JumpLaw::Kind::Mixture);
  CHECK(back.input[1].mean_rate() == doctest::Approx(spec.input[1].mean_rate()));
}

TEST_CASE("json errors name the field") {
  CHECK_THROWS_WITH_AS(network_from_json("{"), doctest::Contains("invalid JSON"),
                       SpecError);
  CHECK_THROWS_WITH_AS(network_from_json("{\"n\": 1}"),
                       doctest::Contains("missing field"), SpecError);
  CHECK_THROWS_WITH_AS(
      network_from_json(R"({"n":1,"P":[[0,0]],"r":[1],"inputs":[{"kind":"zero"}],"w0":[0]})"),
      doctest::Contains("P: row"), SpecError);
  CHECK_THROWS_WITH_AS(
      network_from_json(R"({"n":1,"P":[[0]],"r":[1],"inputs":[{"kind":"laplace"}],"w0":[0]})"),
      doctest::Contains("unknown kind"), SpecError);
}

TEST_CASE("priority image has unit chain and one shared rate") {
  TreeNetworkSpec spec = testing::priority_cp2();
  CHECK(spec.routing(0, 1) == 1.0);
  CHECK(spec.drain(0) == spec.drain(1));
  CHECK(validate_network(spec).t7);
}

}  // TEST_SUITE
