#include "martweak/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "martweak/bellman.hpp"
#include "martweak/dp_oracle.hpp"
#include "martweak/errors.hpp"
#include "martweak/extremizer.hpp"
#include "martweak/serialize.hpp"
#include "martweak/transform.hpp"
#include "martweak/verifier.hpp"

namespace martweak {

namespace {

using nlohmann::json;

// CSV numbers: shortest representation that round-trips.
std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  std::string s = os.str();
  for (int p = 1; p <= 17; ++p) {
    std::ostringstream t;
    t << std::setprecision(p) << v;
    if (std::stod(t.str()) == v) return t.str();
  }
  return s;
}

json report_json(const VerificationReport& r) {
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = v;
  return {{"suite", r.suite},       {"samples", r.samples},
          {"worst_residual", r.worst_residual},
          {"witness", r.witness},   {"witness_index", r.witness_index},
          {"tolerance", r.tolerance}, {"passed", r.passed},
          {"metrics", metrics}};
}

json params_json(const ExtremizerParams& p) {
  return {{"r", p.r},           {"N", p.N},
          {"n_fp", p.n_fp},     {"depth_cap", p.depth_cap},
          {"sigma", p.sigma},   {"n_corner", p.n_corner},
          {"n_bits", p.n_bits}, {"n_lopsided", p.n_lopsided}};
}

json certificate_json(const Certificate& c) {
  return {{"target", {c.target.g, c.target.f, c.target.F}},
          {"achieved_measure", c.achieved_measure},
          {"predicted_lower_bound", c.predicted_lower_bound},
          {"nominal_bound", c.nominal_bound},
          {"truncation_slack", c.truncation_slack},
          {"admissibility_residual", c.admissibility_residual},
          {"point_error", c.point_error},
          {"bellman_value", bellman_B(c.target)},
          {"N", c.N},
          {"height", c.height},
          {"distinct_nodes", c.distinct_nodes},
          {"method", c.method},
          {"params", params_json(c.params)}};
}

json envelope(const std::string& command, json config) {
  return {{"version", kVersion}, {"command", command}, {"config", std::move(config)}};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!text.empty() && text.back() != '\n') f << '\n';
}

GridSpec grid_from(double umin, double umax, double gmax, int nu, int ng, int depth, unsigned threads) {
  GridSpec g;
  g.u_min = umin;
  g.u_max = umax;
  g.G_max = gmax;
  g.nu = nu;
  g.nG = ng;
  g.D = depth;
  g.threads = threads;
  return g;
}

json grid_json(const GridSpec& g) {
  return {{"u_min", g.u_min}, {"u_max", g.u_max}, {"G_max", g.G_max},
          {"nu", g.nu},       {"nG", g.nG},       {"D", g.D}};
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bellman function tools for the weak-type martingale transform estimate", "martweak"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  unsigned threads = default_threads();
  app.add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate B0, B, M and the characteristic parameters");
  double e_g = 0.0, e_f = 0.0, e_F = 0.0, e_y1 = 0.0, e_y2 = 0.0;
  std::string coords = "gff";
  eval->add_option("--g", e_g, "Average of psi");
  eval->add_option("--f", e_f, "Average of phi");
  eval->add_option("--F", e_F, "Average of |phi|")->required();
  eval->add_option("--y1", e_y1, "y1 (with --coords y)");
  eval->add_option("--y2", e_y2, "y2 (with --coords y)");
  eval->add_option("--coords", coords, "Coordinates of the input")->check(CLI::IsMember({"gff", "y"}));

  // verify
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  std::string suite;
  std::size_t samples = 100000;
  std::uint64_t seed = 1;
  std::optional<double> tol;
  double h = 1e-4;
  verify->add_option("--suite", suite, "Suite name")
      ->required()
      ->check(CLI::IsMember({"main-inequality", "characteristic", "concavity", "invariance",
                             "consistency", "euler-ma", "path"}));
  verify->add_option("--samples", samples, "Sample count");
  verify->add_option("--seed", seed, "Seed");
  verify->add_option("--tol", tol, "Tolerance override");
  verify->add_option("--step", h, "Finite-difference step (euler-ma)");

  // extremize
  auto* extremize = app.add_subcommand("extremize", "Build a near-extremal admissible pair");
  ExtremizerParams params;
  double x_F = 1.0;
  std::optional<double> x_g, x_f;
  std::string pair_out;
  extremize->add_option("--F", x_F, "F of the target point")->required();
  extremize->add_option("--g", x_g, "g of the target (general point)");
  extremize->add_option("--f", x_f, "f of the target (general point)");
  extremize->add_option("--r", params.r, "delta = 2^-r");
  extremize->add_option("--N", params.N, "Self-similar steps (0 = automatic)");
  extremize->add_option("--nfp", params.n_fp, "Unrolling depth");
  extremize->add_option("--depth-cap", params.depth_cap, "Maximal tree depth");
  extremize->add_option("--sigma", params.sigma, "Target slack for F >= 2");
  extremize->add_option("--ncorner", params.n_corner, "Corner depth");
  extremize->add_option("--nbits", params.n_bits, "Mixture bits");
  extremize->add_option("--out", pair_out, "Write the pair JSON to this file");

  // weaktype
  auto* weaktype = app.add_subcommand("weaktype", "Random weak-type trials as CSV");
  int w_depth = 10;
  std::size_t trials = 10000;
  double w_lambda = 0.0;
  std::string w_summary;
  weaktype->add_option("--depth", w_depth, "Maximal tree depth")->check(CLI::Range(1, 20));
  weaktype->add_option("--trials", trials, "Number of trials");
  weaktype->add_option("--seed", seed, "Seed");
  weaktype->add_option("--lambda", w_lambda, "Fixed lambda (default: random per trial)");
  weaktype->add_option("--summary", w_summary, "Write a summary JSON to this file");

  // dp
  auto* dp = app.add_subcommand("dp", "Value iteration on the normalized section as CSV");
  double umin = -2.0, umax = 2.0, gmax = 4.0;
  int nu = 400, ng = 400, depth = 200;
  std::string dp_summary;
  dp->add_option("--umin", umin, "Smallest u");
  dp->add_option("--umax", umax, "Largest u");
  dp->add_option("--gmax", gmax, "Largest G");
  dp->add_option("--nu", nu, "Cells in u");
  dp->add_option("--ng", ng, "Cells in s");
  dp->add_option("--depth", depth, "Iterations");
  dp->add_option("--summary", dp_summary, "Write a summary JSON to this file");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Closed form vs oracles along F");
  std::string var = "F";
  double from = 0.0, to = 3.0;
  int steps = 13;
  int s_nu = 100, s_ng = 100, s_depth = 100;
  std::string sw_summary;
  sweep->add_option("--var", var, "Swept variable")->check(CLI::IsMember({"F"}));
  sweep->add_option("--from", from, "First value");
  sweep->add_option("--to", to, "Last value");
  sweep->add_option("--steps", steps, "Number of values")->check(CLI::PositiveNumber);
  sweep->add_option("--r", params.r, "delta = 2^-r");
  sweep->add_option("--nfp", params.n_fp, "Unrolling depth");
  sweep->add_option("--nu", s_nu, "DP cells in u");
  sweep->add_option("--ng", s_ng, "DP cells in s");
  sweep->add_option("--depth", s_depth, "DP iterations");
  sweep->add_option("--summary", sw_summary, "Write a summary JSON to this file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*eval) {
      const PointGFF x = coords == "y" ? to_gff({e_y1, e_y2, e_F}) : PointGFF{e_g, e_f, e_F};
      const PointY y = to_y(x);
      json doc = envelope("eval", {{"coords", coords}});
      doc["point"] = {{"g", x.g}, {"f", x.f}, {"F", x.F}, {"y1", y.y1}, {"y2", y.y2}};
      doc["B0"] = bellman_B0(-x.g, x.f, x.F);
      doc["B"] = bellman_B(x);
      doc["M"] = bellman_M(y);
      try {
        const CharacteristicCoords c = characteristics(y);
        doc["t"] = c.t;
        doc["t1"] = c.t1;
        doc["t2"] = c.t2;
      } catch (const DomainError&) {
        doc["t"] = nullptr;
        doc["t1"] = nullptr;
        doc["t2"] = nullptr;
      }
      out << doc.dump(2) << '\n';
      return 0;
    }

    if (*verify) {
      SuiteOptions opt;
      opt.threads = threads;
      VerificationReport rep;
      if (suite == "main-inequality") {
        opt.tolerance = tol.value_or(1e-9);
        rep = sample_split_triples(samples, seed, DirectionMode::mixed, opt);
      } else if (suite == "characteristic") {
        opt.tolerance = tol.value_or(1e-10);
        rep = sample_split_triples(samples, seed, DirectionMode::characteristic, opt);
      } else if (suite == "concavity") {
        opt.tolerance = tol.value_or(1e-9);
        const auto a = section_concavity_report(Section::fixed_y1, samples, seed, opt);
        const auto b = section_concavity_report(Section::fixed_y2, samples, seed + 1, opt);
        rep = a.worst_residual <= b.worst_residual ? a : b;
        rep.suite = "concavity";
        rep.passed = a.passed && b.passed;
        rep.samples = a.samples + b.samples;
        rep.metrics = {{"worst_fixed_y1", a.worst_residual}, {"worst_fixed_y2", b.worst_residual}};
      } else if (suite == "invariance") {
        opt.tolerance = tol.value_or(1e-10);
        rep = invariance_report(samples, seed, opt);
      } else if (suite == "consistency") {
        opt.tolerance = tol.value_or(1e-12);
        rep = consistency_report(samples, seed, opt);
      } else if (suite == "euler-ma") {
        rep = euler_ma_suite(samples, seed, h, opt);
      } else {
        opt.tolerance = tol.value_or(1e-9);
        rep = path_suite(samples, seed, opt);
      }
      json doc = envelope("verify", {{"suite", suite}, {"samples", samples}, {"h", h}});
      doc["seed"] = seed;
      doc["report"] = report_json(rep);
      out << doc.dump(2) << '\n';
      return rep.passed ? 0 : 1;
    }

    if (*extremize) {
      const bool general = x_g.has_value() || x_f.has_value();
      const Extremizer e = general
                               ? general_point_extremizer({x_g.value_or(-2.0), x_f.value_or(0.0), x_F}, params)
                               : build_extremizer(x_F, params);
      if (!pair_out.empty()) write_file(pair_out, to_json(e.pair));
      json doc = envelope("extremize", {{"F", x_F}, {"params", params_json(params)}});
      if (general) {
        doc["config"]["g"] = x_g.value_or(-2.0);
        doc["config"]["f"] = x_f.value_or(0.0);
      }
      doc["certificate"] = certificate_json(e.certificate);
      out << doc.dump(2) << '\n';
      return 0;
    }

    if (*weaktype) {
      const auto rows = weak_type_trials(w_depth, trials, seed, w_lambda, threads);
      out << "trial,depth,lambda,ratio,two_sided_ratio\n";
      double max_ratio = 0.0, max_two = 0.0;
      for (const auto& r : rows) {
        out << r.trial << ',' << r.depth << ',' << num(r.lambda) << ',' << num(r.ratio) << ','
            << num(r.two_sided_ratio) << '\n';
        max_ratio = std::max(max_ratio, r.ratio);
        max_two = std::max(max_two, r.two_sided_ratio);
      }
      if (!w_summary.empty()) {
        json doc = envelope("weaktype", {{"depth", w_depth}, {"trials", trials}, {"lambda", w_lambda}});
        doc["seed"] = seed;
        doc["max_ratio"] = max_ratio;
        doc["max_two_sided_ratio"] = max_two;
        write_file(w_summary, doc.dump(2));
      }
      return 0;
    }

    if (*dp) {
      const GridSpec spec = grid_from(umin, umax, gmax, nu, ng, depth, threads);
      const ValueGrid V = value_iteration(spec);
      out << "u,G,V,M_closed_form,gap\n";
      for (std::size_t j = 0; j < V.rows(); ++j) {
        for (std::size_t i = 0; i < V.columns(); ++i) {
          const double u = V.u(i);
          const double G = std::max(V.G(i, j), std::abs(1.0 - u));
          const double m = bellman_M({1.0, u, G});
          out << num(u) << ',' << num(G) << ',' << num(V.at(i, j)) << ',' << num(m) << ','
              << num(m - V.at(i, j)) << '\n';
        }
      }
      if (!dp_summary.empty()) {
        const VerificationReport rep = oracle_compare(V, 0.05, 0.01);
        json doc = envelope("dp", grid_json(spec));
        doc["iterations"] = V.iterations();
        doc["report"] = report_json(rep);
        write_file(dp_summary, doc.dump(2));
      }
      return 0;
    }

    if (*sweep) {
      const double g_max = std::max(4.0, to + 1.0);
      const GridSpec spec = grid_from(-2.0, 2.0, g_max, s_nu, s_ng, s_depth, threads);
      const ValueGrid V = value_iteration(spec);
      std::vector<double> Fs(static_cast<std::size_t>(steps));
      for (int k = 0; k < steps; ++k) Fs[k] = steps == 1 ? from : from + (to - from) * k / (steps - 1);
      std::vector<double> achieved(Fs.size());
      parallel_for(Fs.size(), threads, [&](std::size_t k) {
        achieved[k] = build_extremizer(Fs[k], params).certificate.achieved_measure;
      });
      out << "F,M_closed_form,dp_value,extremizer_achieved\n";
      for (std::size_t k = 0; k < Fs.size(); ++k) {
        out << num(Fs[k]) << ',' << num(bellman_M({1.0, 1.0, Fs[k]})) << ','
            << num(V.interpolate(1.0, Fs[k])) << ',' << num(achieved[k]) << '\n';
      }
      if (!sw_summary.empty()) {
        json doc = envelope("sweep", {{"var", var}, {"from", from}, {"to", to}, {"steps", steps},
                                      {"grid", grid_json(spec)}, {"params", params_json(params)}});
        write_file(sw_summary, doc.dump(2));
      }
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace martweak
