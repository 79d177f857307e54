#include "fluidnet/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "fluidnet/rng.hpp"
#include "json.hpp"

namespace fluidnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string station_tag(int j) { return "station " + std::to_string(j + 1); }
}  // namespace

/*---------------------------------------------------------------------*/
/* JumpLaw                                                              */
/*---------------------------------------------------------------------*/

JumpLaw JumpLaw::exponential(double rate) {
  if (!(rate > 0.0)) throw SpecError("jump_law: exponential rate must be > 0");
  JumpLaw law;
  law.kind_ = Kind::Exponential;
  law.param_ = rate;
  return law;
}

JumpLaw JumpLaw::constant(double size) {
  if (!(size > 0.0)) throw SpecError("jump_law: constant size must be > 0");
  JumpLaw law;
  law.kind_ = Kind::Constant;
  law.param_ = size;
  return law;
}

JumpLaw JumpLaw::mixture(std::vector<std::pair<double, JumpLaw>> parts) {
  if (parts.empty()) throw SpecError("jump_law: mixture must have components");
  double total = 0.0;
  for (const auto& [w, sub] : parts) {
    if (!(w > 0.0)) throw SpecError("jump_law: mixture weights must be > 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw SpecError("jump_law: mixture weights must sum to 1");
  JumpLaw law;
  law.kind_ = Kind::Mixture;
  law.parts_ = std::move(parts);
  return law;
}

double JumpLaw::mean() const {
  switch (kind_) {
    case Kind::Exponential: return 1.0 / param_;
    case Kind::Constant: return param_;
    case Kind::Mixture: {
      double m = 0.0;
      for (const auto& [w, sub] : parts_) m += w * sub.mean();
      return m;
    }
  }
  return 0.0;
}

double JumpLaw::laplace(double beta) const {
  switch (kind_) {
    case Kind::Exponential: return param_ / (param_ + beta);
    case Kind::Constant: return std::exp(-param_ * beta);
    case Kind::Mixture: {
      double v = 0.0;
      for (const auto& [w, sub] : parts_) v += w * sub.laplace(beta);
      return v;
    }
  }
  return 0.0;
}

double JumpLaw::laplace_deriv(double beta) const {
  switch (kind_) {
    case Kind::Exponential: {
      double d = param_ + beta;
      return -param_ / (d * d);
    }
    case Kind::Constant: return -param_ * std::exp(-param_ * beta);
    case Kind::Mixture: {
      double v = 0.0;
      for (const auto& [w, sub] : parts_) v += w * sub.laplace_deriv(beta);
      return v;
    }
  }
  return 0.0;
}

double JumpLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Exponential: return rng.exponential(param_);
    case Kind::Constant: return param_;
    case Kind::Mixture: {
      double u = rng.uniform();
      double acc = 0.0;
      for (const auto& [w, sub] : parts_) {
        acc += w;
        if (u <= acc) return sub.sample(rng);
      }
      return parts_.back().second.sample(rng);
    }
  }
  return 0.0;
}

/*---------------------------------------------------------------------*/
/* LevyComponentSpec                                                    */
/*---------------------------------------------------------------------*/

LevyComponentSpec LevyComponentSpec::compound_poisson(double intensity,
                                                      JumpLaw law,
                                                      double drift) {
  LevyComponentSpec c;
  c.kind = InputKind::CompoundPoisson;
  c.intensity = intensity;
  c.jumps = std::move(law);
  c.drift = drift;
  return c;
}

LevyComponentSpec LevyComponentSpec::brownian(double variance, double drift) {
  LevyComponentSpec c;
  c.kind = InputKind::Brownian;
  c.variance = variance;
  c.drift = drift;
  return c;
}

LevyComponentSpec LevyComponentSpec::deterministic(double rate) {
  LevyComponentSpec c;
  c.kind = InputKind::Drift;
  c.drift = rate;
  return c;
}

LevyComponentSpec LevyComponentSpec::zero() { return LevyComponentSpec{}; }

bool LevyComponentSpec::is_subordinator() const {
  switch (kind) {
    case InputKind::CompoundPoisson: return drift >= 0.0;
    case InputKind::Drift: return drift >= 0.0;
    case InputKind::Zero: return true;
    case InputKind::Brownian: return false;
  }
  return false;
}

bool LevyComponentSpec::is_strictly_increasing() const {
  return (kind == InputKind::CompoundPoisson || kind == InputKind::Drift) &&
         drift > 0.0;
}

bool LevyComponentSpec::is_deterministic() const {
  return kind == InputKind::Drift || kind == InputKind::Zero;
}

double LevyComponentSpec::mean_rate() const {
  switch (kind) {
    case InputKind::CompoundPoisson: return drift + intensity * jumps.mean();
    case InputKind::Brownian: return drift;
    case InputKind::Drift: return drift;
    case InputKind::Zero: return 0.0;
  }
  return 0.0;
}

double LevyComponentSpec::exponent(double beta) const {
  switch (kind) {
    case InputKind::CompoundPoisson:
      return -drift * beta - intensity * (1.0 - jumps.laplace(beta));
    case InputKind::Brownian:
      return -drift * beta + 0.5 * variance * beta * beta;
    case InputKind::Drift: return -drift * beta;
    case InputKind::Zero: return 0.0;
  }
  return 0.0;
}

double LevyComponentSpec::exponent_deriv(double beta) const {
  switch (kind) {
    case InputKind::CompoundPoisson:
      return -drift + intensity * jumps.laplace_deriv(beta);
    case InputKind::Brownian: return -drift + variance * beta;
    case InputKind::Drift: return -drift;
    case InputKind::Zero: return 0.0;
  }
  return 0.0;
}

double LevyComponentSpec::cumulant_limit() const {
  if (is_strictly_increasing()) return kInf;
  switch (kind) {
    case InputKind::CompoundPoisson: return intensity;
    case InputKind::Zero:
    case InputKind::Drift: return 0.0;
    case InputKind::Brownian: return kInf;
  }
  return kInf;
}

void LevyComponentSpec::check_valid(int station) const {
  switch (kind) {
    case InputKind::CompoundPoisson:
      if (!(intensity > 0.0))
        throw SpecError("inputs[" + station_tag(station) +
                        "]: compound-poisson intensity must be > 0");
      break;
    case InputKind::Brownian:
      if (!(variance > 0.0))
        throw SpecError("inputs[" + station_tag(station) +
                        "]: brownian variance must be > 0");
      break;
    case InputKind::Drift:
    case InputKind::Zero:
      break;
  }
  if (!std::isfinite(drift))
    throw SpecError("inputs[" + station_tag(station) + "]: drift must be finite");
}

/*---------------------------------------------------------------------*/
/* Network spec                                                         */
/*---------------------------------------------------------------------*/

void TreeNetworkSpec::check_shape() const {
  const auto n = drain.size();
  if (n < 1) throw SpecError("r: at least one station required");
  if (routing.rows() != routing.cols())
    throw SpecError("P: routing matrix must be square (got " +
                    std::to_string(routing.rows()) + "x" +
                    std::to_string(routing.cols()) + ")");
  if (routing.rows() != n)
    throw SpecError("P: routing matrix dimension does not match r");
  if (static_cast<Eigen::Index>(input.size()) != n)
    throw SpecError("inputs: expected " + std::to_string(n) + " entries");
  if (initial.size() != n)
    throw SpecError("w0: expected " + std::to_string(n) + " entries");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(drain(j) > 0.0))
      throw SpecError("r: drain rate must be > 0 at " + station_tag(int(j)));
    if (initial(j) < 0.0)
      throw SpecError("w0: initial content must be >= 0 at " + station_tag(int(j)));
  }
  for (int j = 0; j < int(n); ++j) input[j].check_valid(j);
}

int TreeNetworkSpec::feeder(int j) const {
  for (int i = 0; i < size(); ++i)
    if (routing(i, j) > 0.0) return i;
  return -1;
}

Eigen::MatrixXd neumann_inverse(const Eigen::MatrixXd& routing) {
  const auto n = routing.rows();
  Eigen::MatrixXd pt = routing.transpose();
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    power = (pt * power).eval();
    result += power;
  }
  return result;
}

ValidationReport validate_network(const TreeNetworkSpec& spec) {
  spec.check_shape();
  const int n = spec.size();
  ValidationReport rep;

  // N1: strictly upper triangular, nonnegative.
  rep.n1 = true;
  for (int i = 0; i < n && rep.n1; ++i)
    for (int j = 0; j < n; ++j) {
      if (spec.routing(i, j) < 0.0 || (j <= i && spec.routing(i, j) != 0.0)) {
        rep.n1 = false;
        rep.violations.push_back("N1: P(" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) +
                                 ") breaks strict upper triangularity");
        break;
      }
    }

  // N2: exactly one feeder per non-root column.
  rep.n2 = true;
  for (int j = 1; j < n; ++j) {
    int feeders = 0;
    for (int i = 0; i < n; ++i)
      if (spec.routing(i, j) > 0.0) ++feeders;
    if (feeders != 1) {
      rep.n2 = false;
      rep.violations.push_back("N2: column " + std::to_string(j + 1) + " has " +
                               std::to_string(feeders) +
                               " feeders (exactly one required)");
    }
  }

  // T1 with per-edge strictness: p_ij r_i >= r_j on every edge.
  rep.t1 = true;
  rep.t1_strict = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double p = spec.routing(i, j);
      if (p <= 0.0) continue;
      double lhs = p * spec.drain(i);
      if (lhs < spec.drain(j)) {
        rep.t1 = false;
        rep.violations.push_back("T1: p(" + std::to_string(i + 1) + "," +
                                 std::to_string(j + 1) + ") < r_j/r_i");
      }
      if (lhs <= spec.drain(j)) rep.t1_strict = false;
    }

  // T2: non-root inputs are subordinators.
  rep.t2 = true;
  for (int j = 1; j < n; ++j)
    if (!spec.input[j].is_subordinator()) {
      rep.t2 = false;
      rep.violations.push_back("T2: input at " + station_tag(j) +
                               " is not a subordinator");
    }

  // T3 (Levy) and T5 (independent components) hold by construction.
  rep.t3 = true;
  rep.t5 = true;

  // T6: root input has no negative jumps; every supported kind qualifies.
  rep.t6 = true;

  // N3: Y_j nondecreasing for j >= 2.
  rep.n3 = true;
  Eigen::VectorXd y_drift = spec.drain;
  for (int j = 0; j < n; ++j) {
    int f = spec.feeder(j);
    if (f >= 0) y_drift(j) -= spec.routing(f, j) * spec.drain(f);
  }
  for (int j = 1; j < n; ++j)
    if (!spec.input[j].is_subordinator() || y_drift(j) > 0.0) {
      rep.n3 = false;
      rep.violations.push_back("N3: Y at " + station_tag(j) +
                               " is not nondecreasing");
    }

  // T4: (I-P')^{-1} E J(1) < r, strict componentwise.
  rep.t4 = true;
  if (rep.n1) {
    Eigen::VectorXd mean_in(n);
    for (int j = 0; j < n; ++j) mean_in(j) = spec.input[j].mean_rate();
    Eigen::VectorXd load = neumann_inverse(spec.routing) * mean_in;
    for (int j = 0; j < n; ++j)
      if (!(load(j) < spec.drain(j))) {
        rep.t4 = false;
        rep.violations.push_back("T4: aggregate input rate " +
                                 std::to_string(load(j)) + " >= r at " +
                                 station_tag(j));
      }
  } else {
    rep.t4 = false;
  }

  // T7: unit-chain tandem.
  rep.t7 = true;
  for (int i = 0; i < n && rep.t7; ++i)
    for (int j = 0; j < n; ++j) {
      double want = (j == i + 1) ? 1.0 : 0.0;
      if (spec.routing(i, j) != want) {
        rep.t7 = false;
        break;
      }
    }
  if (n == 1) rep.t7 = true;

  // T8: compound-Poisson root (drift >= 0 accepted), silent non-root inputs,
  // strictly decreasing drain rates, total input rate below r_n.
  rep.t8 = spec.input[0].kind == InputKind::CompoundPoisson &&
           spec.input[0].drift >= 0.0;
  for (int j = 1; j < n; ++j)
    if (spec.input[j].kind != InputKind::Zero) rep.t8 = false;
  for (int j = 1; j < n; ++j)
    if (!(spec.drain(j) < spec.drain(j - 1))) rep.t8 = false;
  if (rep.t8 && !(spec.input[0].mean_rate() < spec.drain(n - 1))) rep.t8 = false;

  return rep;
}

/*---------------------------------------------------------------------*/
/* Tandem derivation                                                    */
/*---------------------------------------------------------------------*/

TandemDerived derive_tandem(const TreeNetworkSpec& spec) {
  spec.check_shape();
  const int n = spec.size();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (j == i + 1) {
        if (!(spec.routing(i, j) > 0.0))
          throw SpecError("P(" + std::to_string(i + 1) + "," +
                          std::to_string(j + 1) +
                          "): tandem requires a positive superdiagonal entry");
      } else if (spec.routing(i, j) != 0.0) {
        throw SpecError("P(" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) +
                        "): tandem allows superdiagonal routing only");
      }
    }

  TandemDerived td;
  td.n = n;
  td.chain = Eigen::VectorXd::Ones(n);
  td.upsilon_drift = Eigen::VectorXd::Zero(n);
  for (int j = 1; j < n; ++j) {
    td.chain(j) = spec.routing(j - 1, j);
    td.upsilon_drift(j) = td.chain(j) * spec.drain(j - 1) - spec.drain(j);
  }
  td.chain_pow = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    td.chain_pow(j, j) = 1.0;
    for (int l = j + 1; l < n; ++l)
      td.chain_pow(j, l) = td.chain_pow(j, l - 1) * td.chain(l);
  }

  // T7-T8 shape (unit chain, compound-Poisson root, silent feeders,
  // strictly decreasing drains); the stability clause is reported separately
  bool shape = spec.input[0].kind == InputKind::CompoundPoisson &&
               spec.input[0].drift >= 0.0;
  for (int j = 1; j < n && shape; ++j) {
    if (spec.input[j].kind != InputKind::Zero) shape = false;
    if (td.chain(j) != 1.0) shape = false;
    if (!(spec.drain(j) < spec.drain(j - 1))) shape = false;
  }
  td.single_cp = shape;
  if (td.single_cp) {
    double d = spec.input[0].drift;
    td.c = spec.drain.array() - d;
    td.lambda = spec.input[0].intensity;
    td.root_jumps = spec.input[0].jumps;
  }
  return td;
}

TreeNetworkSpec make_priority_network(double rate,
                                      std::vector<LevyComponentSpec> classes,
                                      Eigen::VectorXd w0) {
  const int n = static_cast<int>(classes.size());
  TreeNetworkSpec spec;
  spec.routing = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) spec.routing(i, i + 1) = 1.0;
  spec.drain = Eigen::VectorXd::Constant(n, rate);
  spec.input = std::move(classes);
  spec.initial = w0.size() == n ? w0 : Eigen::VectorXd::Zero(n);
  spec.check_shape();
  return spec;
}

/*---------------------------------------------------------------------*/
/* JSON                                                                 */
/*---------------------------------------------------------------------*/

namespace {

using nlohmann::json;

JumpLaw jump_law_from_json(const json& doc) {
  if (!doc.is_object() || !doc.contains("variant"))
    throw SpecError("jump_law: missing variant");
  const std::string variant = doc.at("variant").get<std::string>();
  if (variant == "exponential") {
    if (!doc.contains("rate")) throw SpecError("jump_law: exponential needs rate");
    return JumpLaw::exponential(doc.at("rate").get<double>());
  }
  if (variant == "constant") {
    if (!doc.contains("size")) throw SpecError("jump_law: constant needs size");
    return JumpLaw::constant(doc.at("size").get<double>());
  }
  if (variant == "finite-mixture") {
    if (!doc.contains("components"))
      throw SpecError("jump_law: finite-mixture needs components");
    std::vector<std::pair<double, JumpLaw>> parts;
    for (const auto& part : doc.at("components")) {
      parts.emplace_back(part.at("weight").get<double>(),
                         jump_law_from_json(part.at("law")));
    }
    return JumpLaw::mixture(std::move(parts));
  }
  throw SpecError("jump_law: unknown variant '" + variant + "'");
}

json jump_law_to_json(const JumpLaw& law) {
  json doc;
  switch (law.kind()) {
    case JumpLaw::Kind::Exponential:
      doc["variant"] = "exponential";
      doc["rate"] = law.rate();
      break;
    case JumpLaw::Kind::Constant:
      doc["variant"] = "constant";
      doc["size"] = law.size();
      break;
    case JumpLaw::Kind::Mixture: {
      doc["variant"] = "finite-mixture";
      json comps = json::array();
      for (const auto& [w, sub] : law.parts()) {
        comps.push_back({{"weight", w}, {"law", jump_law_to_json(sub)}});
      }
      doc["components"] = comps;
      break;
    }
  }
  return doc;
}

LevyComponentSpec input_from_json(const json& doc, int station) {
  if (!doc.is_object() || !doc.contains("kind"))
    throw SpecError("inputs[" + std::to_string(station + 1) + "]: missing kind");
  const std::string kind = doc.at("kind").get<std::string>();
  double drift = doc.value("drift", 0.0);
  if (kind == "compound-poisson") {
    if (!doc.contains("intensity") || !doc.contains("jump_law"))
      throw SpecError("inputs[" + std::to_string(station + 1) +
                      "]: compound-poisson needs intensity and jump_law");
    return LevyComponentSpec::compound_poisson(
        doc.at("intensity").get<double>(), jump_law_from_json(doc.at("jump_law")),
        drift);
  }
  if (kind == "brownian") {
    if (!doc.contains("variance"))
      throw SpecError("inputs[" + std::to_string(station + 1) +
                      "]: brownian needs variance");
    return LevyComponentSpec::brownian(doc.at("variance").get<double>(), drift);
  }
  if (kind == "deterministic-drift") return LevyComponentSpec::deterministic(drift);
  if (kind == "zero") return LevyComponentSpec::zero();
  throw SpecError("inputs[" + std::to_string(station + 1) + "]: unknown kind '" +
                  kind + "'");
}

json input_to_json(const LevyComponentSpec& c) {
  json doc;
  switch (c.kind) {
    case InputKind::CompoundPoisson:
      doc["kind"] = "compound-poisson";
      doc["drift"] = c.drift;
      doc["intensity"] = c.intensity;
      doc["jump_law"] = jump_law_to_json(c.jumps);
      break;
    case InputKind::Brownian:
      doc["kind"] = "brownian";
      doc["drift"] = c.drift;
      doc["variance"] = c.variance;
      break;
    case InputKind::Drift:
      doc["kind"] = "deterministic-drift";
      doc["drift"] = c.drift;
      break;
    case InputKind::Zero:
      doc["kind"] = "zero";
      break;
  }
  return doc;
}

}  // namespace

TreeNetworkSpec network_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const std::exception& e) {
    throw SpecError(std::string("network: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SpecError("network: document must be an object");
  for (const char* field : {"n", "P", "r", "inputs", "w0"})
    if (!doc.contains(field))
      throw SpecError(std::string("network: missing field '") + field + "'");

  const int n = doc.at("n").get<int>();
  if (n < 1) throw SpecError("n: must be >= 1");

  TreeNetworkSpec spec;
  const auto& pj = doc.at("P");
  if (!pj.is_array() || static_cast<int>(pj.size()) != n)
    throw SpecError("P: expected " + std::to_string(n) + " rows");
  spec.routing = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (!pj[i].is_array() || static_cast<int>(pj[i].size()) != n)
      throw SpecError("P: row " + std::to_string(i + 1) + " must have " +
                      std::to_string(n) + " entries");
    for (int j = 0; j < n; ++j) spec.routing(i, j) = pj[i][j].get<double>();
  }

  const auto& rj = doc.at("r");
  if (!rj.is_array() || static_cast<int>(rj.size()) != n)
    throw SpecError("r: expected " + std::to_string(n) + " entries");
  spec.drain = Eigen::VectorXd(n);
  for (int j = 0; j < n; ++j) spec.drain(j) = rj[j].get<double>();

  const auto& ij = doc.at("inputs");
  if (!ij.is_array() || static_cast<int>(ij.size()) != n)
    throw SpecError("inputs: expected " + std::to_string(n) + " entries");
  for (int j = 0; j < n; ++j) spec.input.push_back(input_from_json(ij[j], j));

  const auto& wj = doc.at("w0");
  if (!wj.is_array() || static_cast<int>(wj.size()) != n)
    throw SpecError("w0: expected " + std::to_string(n) + " entries");
  spec.initial = Eigen::VectorXd(n);
  for (int j = 0; j < n; ++j) spec.initial(j) = wj[j].get<double>();

  spec.check_shape();
  return spec;
}

TreeNetworkSpec network_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("network: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return network_from_json(buf.str());
}

std::string network_to_json(const TreeNetworkSpec& spec) {
  const int n = spec.size();
  json doc;
  doc["n"] = n;
  json p = json::array();
  for (int i = 0; i < n; ++i) {
    json row = json::array();
    for (int j = 0; j < n; ++j) row.push_back(spec.routing(i, j));
    p.push_back(row);
  }
  doc["P"] = p;
  doc["r"] = std::vector<double>(spec.drain.data(), spec.drain.data() + n);
  json inputs = json::array();
  for (const auto& c : spec.input) inputs.push_back(input_to_json(c));
  doc["inputs"] = inputs;
  doc["w0"] = std::vector<double>(spec.initial.data(), spec.initial.data() + n);
  return doc.dump(2);
}

std::string report_to_json(const ValidationReport& rep) {
  json doc;
  doc["N1"] = rep.n1;
  doc["N2"] = rep.n2;
  doc["N3"] = rep.n3;
  doc["T1"] = rep.t1;
  doc["T1_strict"] = rep.t1_strict;
  doc["T2"] = rep.t2;
  doc["T3"] = rep.t3;
  doc["T4"] = rep.t4;
  doc["T5"] = rep.t5;
  doc["T6"] = rep.t6;
  doc["T7"] = rep.t7;
  doc["T8"] = rep.t8;
  doc["accepted"] = rep.accepted();
  doc["tandem_formulas"] = rep.tandem_formulas();
  doc["single_cp_formulas"] = rep.single_cp_formulas();
  doc["violations"] = rep.violations;
  return doc.dump(2);
}

}  // namespace fluidnet
