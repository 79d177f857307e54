#include "fluidnet/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fluidnet/excursions.hpp"
#include "fluidnet/model.hpp"
#include "fluidnet/montecarlo.hpp"
#include "fluidnet/skorokhod.hpp"
#include "fluidnet/transforms.hpp"

namespace fluidnet {

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

std::string fmt_vec(const Eigen::VectorXd& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ";";
    out += fmt(v(i));
  }
  return out;
}

Eigen::VectorXd parse_vector(const std::string& text, int n, const char* name) {
  if (text.empty()) return Eigen::VectorXd::Zero(n);
  std::vector<double> values;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      values.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw SpecError(std::string(name) + ": cannot parse '" + tok + "'");
    }
  }
  if (static_cast<int>(values.size()) != n)
    throw DimensionError(std::string(name) + ": expected " + std::to_string(n) +
                         " comma-separated values");
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = values[i];
  return v;
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw SpecError("cannot open output file '" + out_path + "'");
  out << text;
}

struct ComparisonTable {
  std::string csv = "query,analytic,mc_mean,mc_se,z,verdict\n";
  bool all_pass = true;

  void add(const std::string& query, double analytic,
           const TransformEstimate& est) {
    Verdict v = compare(analytic, est);
    all_pass = all_pass && v.pass;
    csv += query + "," + fmt(analytic) + "," + fmt(est.mean) + "," +
           fmt(est.se) + "," + fmt(v.z) + "," + (v.pass ? "pass" : "FAIL") +
           "\n";
  }
  void add_raw(const std::string& query, double analytic, double mean,
               double se) {
    TransformEstimate est;
    est.mean = mean;
    est.se = se;
    est.n_paths = 2;
    add(query, analytic, est);
  }
};

int cmd_validate(const std::string& net_path, const std::string& out_path) {
  TreeNetworkSpec spec = network_from_file(net_path);
  write_text(out_path, report_to_json(validate_network(spec)) + "\n");
  return 0;
}

int cmd_simulate(const std::string& net_path, double horizon,
                 std::uint64_t seed, double delta, const std::string& kind,
                 const std::string& out_path) {
  TreeNetworkSpec spec = network_from_file(net_path);
  PathOptions popt;
  popt.brownian_step = delta;
  SamplePath path = sample_path(spec, horizon, seed, popt);
  std::string csv;
  if (kind == "path") {
    csv = "t,component,jump_size,drift_segment_rate\n";
    for (std::size_t e = 0; e < path.events(); ++e) {
      csv += fmt(path.t[e]) + "," + std::to_string(path.comp[e] + 1) + "," +
             fmt(path.size[e]) + "," + fmt(path.drift(path.comp[e])) + "\n";
    }
  } else if (kind == "trajectory") {
    ReflectionResult res = reflect_explicit(spec, path);
    csv = "t";
    for (int k = 0; k < res.n; ++k) csv += ",W_" + std::to_string(k + 1);
    for (int k = 0; k < res.n; ++k) csv += ",L_" + std::to_string(k + 1);
    csv += "\n";
    for (std::size_t i = 0; i < res.t.size(); ++i) {
      csv += fmt(res.t[i]);
      for (int k = 0; k < res.n; ++k) csv += "," + fmt(res.content[k].v[i]);
      for (int k = 0; k < res.n; ++k) csv += "," + fmt(res.regulator[k].v[i]);
      csv += "\n";
    }
  } else {
    throw SpecError("simulate: kind must be 'path' or 'trajectory'");
  }
  write_text(out_path, csv);
  return 0;
}

int cmd_transform(const std::string& net_path, const std::string& op,
                  const std::string& alpha_s, const std::string& beta_s,
                  const std::string& omega_s, const std::string& gamma_s,
                  int station, const std::string& out_path) {
  TreeNetworkSpec spec = network_from_file(net_path);
  NetworkTransforms ctx(spec);
  const int n = ctx.size();
  std::string csv = "op,station,alpha,beta,omega,gamma,value,form\n";
  auto row = [&](const std::string& name, const Eigen::VectorXd& a,
                 const Eigen::VectorXd& b, const Eigen::VectorXd& w,
                 const Eigen::VectorXd& g, double value,
                 const std::string& form) {
    csv += name + "," + (station > 0 ? std::to_string(station) : "") + "," +
           fmt_vec(a) + "," + fmt_vec(b) + "," + fmt_vec(w) + "," + fmt_vec(g) +
           "," + fmt(value) + "," + form + "\n";
  };

  Eigen::VectorXd alpha = parse_vector(alpha_s, n, "alpha");
  Eigen::VectorXd beta = parse_vector(beta_s, n, "beta");
  Eigen::VectorXd omega = parse_vector(omega_s, n, "omega");
  Eigen::VectorXd gamma = parse_vector(gamma_s, n, "gamma");

  if (op == "tandem-wb") {
    row(op, {}, beta, omega, {}, tandem_wb(ctx, omega, beta),
        "ratio-of-marginals");
  } else if (op == "quasi-product") {
    row(op, alpha, beta, {}, {}, quasi_product_xg(ctx, alpha, beta),
        "quasi-product");
  } else if (op == "conditioned") {
    row(op, alpha, beta, {}, {}, conditioned_xg(ctx, station - 1, alpha, beta),
        "quasi-product");
  } else if (op == "fluctuation") {
    row(op, alpha, beta, {}, {},
        fluctuation_identity(ctx.exponent(station - 1), alpha(station - 1),
                             beta(station - 1)),
        "marginal");
  } else if (op == "busy") {
    BusyPeriodValue bp = busy_periods(ctx.exponent(station - 1),
                                      alpha(station - 1), beta(station - 1));
    row("busy-joint", alpha, beta, {}, {}, bp.joint, "closed-form");
    row("busy-length", alpha, beta, {}, {}, bp.length, "closed-form");
  } else if (op == "single-cp") {
    SingleCpValue v =
        single_cp(ctx, station - 1, omega(station - 1), beta(station - 1));
    row("single-cp-joint", {}, beta, omega, {}, v.joint, "closed-form");
    row("single-cp-idle-prob", {}, {}, {}, {}, v.idle_prob, "closed-form");
    if (station - 1 >= 1)
      row("single-cp-upstream-empty", {}, beta, omega, {}, v.upstream_empty,
          "closed-form");
  } else if (op == "idle") {
    row(op, {}, {}, {}, gamma, idle_vector(ctx, gamma), "quasi-product");
  } else if (op == "priority") {
    row(op, {}, beta, omega, {}, priority_we(ctx, omega, beta),
        "tandem-plus-corrections");
  } else {
    throw SpecError("transform: unknown op '" + op + "'");
  }
  write_text(out_path, csv);
  return 0;
}

int cmd_mc_compare(const std::string& net_path, std::size_t paths,
                   std::uint64_t seed, double delta,
                   const std::string& out_path) {
  TreeNetworkSpec spec = network_from_file(net_path);
  NetworkTransforms ctx(spec);
  const int n = ctx.size();
  SimOptions opts;
  opts.brownian_step = delta;

  StationarySamples samples = estimate_stationary(spec, paths, seed, opts);
  ComparisonTable table;

  auto wb_query = [&](const Eigen::VectorXd& omega, const Eigen::VectorXd& beta) {
    StationaryQuery q;
    q.omega_content = omega;
    q.beta_busy = beta;
    return estimate_transform(samples, q);
  };

  if (ctx.report().tandem_formulas()) {
    std::vector<double> grid{0.0, 0.5, 1.0};
    if (n == 2) {
      for (double w1 : grid)
        for (double w2 : grid)
          for (double b1 : grid)
            for (double b2 : grid) {
              if (w1 == 0.0 && w2 == 0.0 && b1 == 0.0 && b2 == 0.0) continue;
              Eigen::VectorXd omega(2), beta(2);
              omega << w1, w2;
              beta << b1, b2;
              table.add("WB[omega=" + fmt_vec(omega) + ";beta=" + fmt_vec(beta) +
                            "]",
                        tandem_wb(ctx, omega, beta), wb_query(omega, beta));
            }
    } else {
      for (int k = 0; k < n; ++k)
        for (double v : {0.5, 1.0}) {
          Eigen::VectorXd omega = Eigen::VectorXd::Zero(n);
          Eigen::VectorXd beta = Eigen::VectorXd::Zero(n);
          omega(k) = v;
          table.add("W[" + std::to_string(k + 1) + "=" + fmt(v) + "]",
                    tandem_wb(ctx, omega, Eigen::VectorXd::Zero(n)),
                    wb_query(omega, Eigen::VectorXd::Zero(n)));
          beta(k) = v;
          table.add("B[" + std::to_string(k + 1) + "=" + fmt(v) + "]",
                    tandem_wb(ctx, Eigen::VectorXd::Zero(n), beta),
                    wb_query(Eigen::VectorXd::Zero(n), beta));
        }
    }
  }

  if (ctx.report().single_cp_formulas()) {
    for (int k = 0; k < n; ++k) {
      double analytic = single_cp(ctx, k, 0.0, 0.0).idle_prob;
      std::size_t hits = 0;
      for (std::size_t p = 0; p < samples.paths; ++p)
        if (samples.content(p, k) == 0.0) ++hits;
      double mean = static_cast<double>(hits) / samples.paths;
      double se = std::sqrt(mean * (1.0 - mean) / samples.paths);
      table.add_raw("P[W_" + std::to_string(k + 1) + "=0]", analytic, mean, se);
    }
    if (n <= 3) {
      std::vector<Eigen::VectorXd> gammas;
      std::vector<double> grid{0.5, 1.0};
      Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
      std::function<void(int)> rec = [&](int k) {
        if (k == n) {
          gammas.push_back(g);
          return;
        }
        for (double v : grid) {
          g(k) = v;
          rec(k + 1);
        }
      };
      rec(0);
      for (const auto& gamma : gammas) {
        StationaryQuery q;
        q.gamma_idle = gamma;
        table.add("I[gamma=" + fmt_vec(gamma) + "]", idle_vector(ctx, gamma),
                  estimate_transform(samples, q));
      }
    }
  }

  if (ctx.report().tandem_formulas()) {
    Eigen::VectorXd half = Eigen::VectorXd::Constant(n, 0.5);
    StationaryQuery q;
    q.omega_aggregate = half;
    table.add("XBAR[beta=" + fmt_vec(half) + "]",
              quasi_product_xg(ctx, Eigen::VectorXd::Zero(n), half),
              estimate_transform(samples, q));
  }

  write_text(out_path, table.csv);
  return table.all_pass ? 0 : 1;
}

int cmd_excursion_check(double c, double intensity, double jump_rate,
                        double jump_size, std::size_t draws, std::uint64_t seed,
                        double beta, double gamma, double kappa, double mu,
                        double s, double zeta_rate,
                        const std::string& out_path) {
  ExcursionModel model;
  model.drain = c;
  model.intensity = intensity;
  model.jumps = jump_size > 0.0 ? JumpLaw::constant(jump_size)
                                : JumpLaw::exponential(jump_rate);
  model.check();

  ComparisonTable table;
  {
    Rng rng(stream_seed(seed, 1));
    double sum = 0.0, sum2 = 0.0, len_sum = 0.0, len_sum2 = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      ExcursionDraw d = sample_excursion(model, rng);
      double v =
          std::exp(-beta * d.undershoot - gamma * d.length - kappa * d.last_mark);
      sum += v;
      sum2 += v * v;
      double lv = std::exp(-gamma * d.length);
      len_sum += lv;
      len_sum2 += lv * lv;
    }
    double mean = sum / draws;
    double se = std::sqrt((sum2 / draws - mean * mean) / (draws - 1));
    table.add_raw("undershoot[beta=" + fmt(beta) + ";gamma=" + fmt(gamma) +
                      ";kappa=" + fmt(kappa) + "]",
                  undershoot_transform(model, beta, gamma, kappa), mean, se);
    double lmean = len_sum / draws;
    double lse = std::sqrt((len_sum2 / draws - lmean * lmean) / (draws - 1));
    table.add_raw("excursion-length[gamma=" + fmt(gamma) + "]",
                  excursion_length_transform(model, gamma), lmean, lse);
  }
  {
    JumpLaw zeta = JumpLaw::exponential(zeta_rate);
    Rng rng(stream_seed(seed, 2));
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
      RecurrenceDraw d = sample_recurrence(mu, zeta, rng);
      double v = std::pow(s, d.count) *
                 std::exp(-beta * d.backward - gamma * d.zeta);
      sum += v;
      sum2 += v * v;
    }
    double mean = sum / draws;
    double se = std::sqrt((sum2 / draws - mean * mean) / (draws - 1));
    table.add_raw("recurrence[mu=" + fmt(mu) + ";s=" + fmt(s) + ";beta=" +
                      fmt(beta) + ";gamma=" + fmt(gamma) + "]",
                  recurrence_transform(mu, zeta, s, beta, gamma), mean, se);
  }
  write_text(out_path, table.csv);
  return table.all_pass ? 0 : 1;
}

int cmd_priority(const std::string& net_path, std::size_t paths,
                 std::uint64_t seed, const std::string& omega_s,
                 const std::string& beta_s, const std::string& out_path) {
  TreeNetworkSpec spec = network_from_file(net_path);
  NetworkTransforms ctx(spec);
  const int n = ctx.size();
  Eigen::VectorXd omega = parse_vector(omega_s, n, "omega");
  Eigen::VectorXd beta = parse_vector(beta_s, n, "beta");

  StationarySamples samples = estimate_stationary(spec, paths, seed);
  ComparisonTable table;
  StationaryQuery q;
  q.omega_content = omega;
  q.beta_priority = beta;
  table.add("WE[omega=" + fmt_vec(omega) + ";beta=" + fmt_vec(beta) + "]",
            priority_we(ctx, omega, beta), estimate_transform(samples, q));
  StationaryQuery qb;
  qb.omega_content = omega;
  qb.beta_busy = beta;
  table.add("WBtilde[omega=" + fmt_vec(omega) + ";beta=" + fmt_vec(beta) + "]",
            tandem_wb(ctx, omega, beta), estimate_transform(samples, qb));
  write_text(out_path, table.csv);
  return table.all_pass ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Levy-driven tree fluid networks: transforms and simulation"};
  app.require_subcommand(1);

  std::string net_path, out_path;
  std::uint64_t seed = 1;
  double delta = 1e-3;

  auto* validate = app.add_subcommand("validate", "check a network document");
  validate->add_option("--network", net_path)->required();
  validate->add_option("--out", out_path);

  auto* simulate = app.add_subcommand("simulate", "sample one path");
  double horizon = 100.0;
  std::string kind = "trajectory";
  simulate->add_option("--network", net_path)->required();
  simulate->add_option("--horizon", horizon);
  simulate->add_option("--seed", seed)->required();
  simulate->add_option("--delta", delta);
  simulate->add_option("--kind", kind);
  simulate->add_option("--out", out_path);

  auto* transform = app.add_subcommand("transform", "evaluate a transform");
  std::string op = "tandem-wb", alpha_s, beta_s, omega_s, gamma_s;
  int station = 1;
  transform->add_option("--network", net_path)->required();
  transform->add_option("--op", op);
  transform->add_option("--alpha", alpha_s);
  transform->add_option("--beta", beta_s);
  transform->add_option("--omega", omega_s);
  transform->add_option("--gamma", gamma_s);
  transform->add_option("--station", station);
  transform->add_option("--out", out_path);

  auto* mc = app.add_subcommand("mc-compare", "analytic vs Monte Carlo report");
  std::size_t paths = 100000;
  mc->add_option("--network", net_path)->required();
  mc->add_option("--paths", paths);
  mc->add_option("--seed", seed)->required();
  mc->add_option("--delta", delta);
  mc->add_option("--out", out_path);

  auto* exc = app.add_subcommand("excursion-check",
                                 "excursion calculus vs direct simulation");
  double exc_c = 1.0, exc_lambda = 0.5, exc_rate = 1.0, exc_size = 0.0;
  double exc_beta = 1.0, exc_gamma = 0.5, exc_kappa = 0.0;
  double exc_mu = 1.0, exc_s = 0.5, exc_zeta = 1.0;
  std::size_t draws = 100000;
  exc->add_option("--c", exc_c);
  exc->add_option("--intensity", exc_lambda);
  exc->add_option("--jump-rate", exc_rate);
  exc->add_option("--jump-size", exc_size);
  exc->add_option("--draws", draws);
  exc->add_option("--seed", seed)->required();
  exc->add_option("--beta", exc_beta);
  exc->add_option("--gamma", exc_gamma);
  exc->add_option("--kappa", exc_kappa);
  exc->add_option("--mu", exc_mu);
  exc->add_option("--s", exc_s);
  exc->add_option("--zeta-rate", exc_zeta);
  exc->add_option("--out", out_path);

  auto* prio = app.add_subcommand("priority", "priority ages vs Monte Carlo");
  prio->add_option("--network", net_path)->required();
  prio->add_option("--paths", paths);
  prio->add_option("--seed", seed)->required();
  prio->add_option("--omega", omega_s);
  prio->add_option("--beta", beta_s);
  prio->add_option("--out", out_path);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 2;
  }

  try {
    if (*validate) return cmd_validate(net_path, out_path);
    if (*simulate)
      return cmd_simulate(net_path, horizon, seed, delta, kind, out_path);
    if (*transform)
      return cmd_transform(net_path, op, alpha_s, beta_s, omega_s, gamma_s,
                           station, out_path);
    if (*mc) return cmd_mc_compare(net_path, paths, seed, delta, out_path);
    if (*exc)
      return cmd_excursion_check(exc_c, exc_lambda, exc_rate, exc_size, draws,
                                 seed, exc_beta, exc_gamma, exc_kappa, exc_mu,
                                 exc_s, exc_zeta, out_path);
    if (*prio)
      return cmd_priority(net_path, paths, seed, omega_s, beta_s, out_path);
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const SpecError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace fluidnet
