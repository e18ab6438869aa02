// Command-line front end: Gaussian moments, asymptotic curves, the regime
// optimizers, minimal-norm activation synthesis, and the finite-size
// Monte-Carlo simulator. CSV/JSON outputs are byte-reproducible.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfr/asymptotics.hpp"
#include "rfr/io.hpp"
#include "rfr/moments.hpp"
#include "rfr/optimizer.hpp"
#include "rfr/simulator.hpp"
#include "rfr/synthesis.hpp"

namespace {

constexpr int kExitParse = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitTieBreak = 4;
constexpr int kExitDiverged = 5;

rfr::Regime parse_regime(const std::string& s) {
  if (s == "r1" || s == "R1") return rfr::Regime::R1;
  if (s == "r2" || s == "R2") return rfr::Regime::R2;
  if (s == "r3" || s == "R3") return rfr::Regime::R3;
  throw rfr::ParseError("unknown regime '" + s + "'");
}

struct ParamFlags {
  double psi1 = 1.0, psi2 = 1.0, lambda = 0.0, alpha = 0.0;
  double f1 = 1.0, fstar = 0.0, tau = 0.0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--psi1", psi1, "N/d ratio");
    cmd->add_option("--psi2", psi2, "n/d ratio");
    cmd->add_option("--lambda", lambda, "ridge strength");
    cmd->add_option("--alpha", alpha, "sensitivity weight in [0,1)");
    cmd->add_option("--f1", f1, "linear target magnitude");
    cmd->add_option("--fstar", fstar, "nonlinear target magnitude");
    cmd->add_option("--tau", tau, "observation noise level");
  }

  rfr::RegimeParams params() const {
    rfr::RegimeParams p;
    p.psi1 = psi1;
    p.psi2 = psi2;
    p.lambda = lambda;
    p.alpha = alpha;
    p.F1 = f1;
    p.F_star = fstar;
    p.tau = tau;
    return p;
  }

  std::string describe() const {
    std::ostringstream os;
    os << "psi1=" << rfr::csv17(psi1) << " psi2=" << rfr::csv17(psi2)
       << " lambda=" << rfr::csv17(lambda) << " alpha=" << rfr::csv17(alpha)
       << " f1=" << rfr::csv17(f1) << " fstar=" << rfr::csv17(fstar)
       << " tau=" << rfr::csv17(tau);
    return os.str();
  }
};

void write_out(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw rfr::ParseError("cannot open output file '" + path + "'");
  f << content;
}

/// One curve: objective (and error/sensitivity) against a psi1 or lambda grid.
std::string render_curve(rfr::Regime regime, const std::string& sweep, double lo, double hi,
                         int points, const std::string& scale, const std::string& af_text,
                         ParamFlags flags) {
  if (points < 2) throw rfr::ParseError("curve needs at least 2 grid points");
  if (!(lo < hi)) throw rfr::ParseError("curve needs lo < hi");
  if (scale == "log" && !(lo > 0.0)) throw rfr::ParseError("log scale requires lo > 0");
  const bool optimal = af_text == "optimal";
  std::optional<rfr::ActivationSpec> af;
  std::optional<rfr::Moments> af_moments;
  if (!optimal) {
    af = rfr::ActivationSpec::parse(af_text);
    af_moments = rfr::compute_moments(*af);
  }

  std::ostringstream os;
  os << "# params: regime=" << rfr::regime_name(regime) << " sweep=" << sweep
     << " lo=" << rfr::csv17(lo) << " hi=" << rfr::csv17(hi) << " points=" << points
     << " scale=" << scale << " af=" << af_text << " " << flags.describe() << "\n";
  os << sweep << ",error,sensitivity,objective,flag\n";
  for (int i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / (points - 1);
    const double v = scale == "log" ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
    rfr::RegimeParams p = flags.params();
    if (sweep == "psi1")
      p.psi1 = v;
    else if (sweep == "lambda")
      p.lambda = v;
    else
      throw rfr::ParseError("sweep must be psi1 or lambda");
    os << rfr::csv17(v) << ",";
    try {
      rfr::RegimeEvaluation ev;
      if (optimal) {
        rfr::Optimum o;
        switch (regime) {
          case rfr::Regime::R1: o = rfr::solve_r1(p); break;
          case rfr::Regime::R2: o = rfr::solve_r2(p); break;
          case rfr::Regime::R3: o = rfr::solve_r3(p); break;
        }
        if (std::isfinite(o.canonical_moments.mu1)) {
          ev = rfr::objective(regime, o.canonical_moments, p);
        } else {
          // diverging-mu1 sentinel: only the limiting objective is defined
          ev.error = std::numeric_limits<double>::quiet_NaN();
          ev.sensitivity = std::numeric_limits<double>::quiet_NaN();
          ev.objective = o.objective;
        }
      } else {
        ev = rfr::objective(regime, *af_moments, p);
      }
      os << rfr::csv17(ev.error) << "," << rfr::csv17(ev.sensitivity) << ","
         << rfr::csv17(ev.objective) << ",ok\n";
    } catch (const rfr::InterpolationThreshold&) {
      os << ",,,interpolation-threshold\n";
    } catch (const rfr::TieBreakAmbiguous&) {
      // a sweep point grazed a case-table threshold; the optimum is not
      // unique exactly there
      os << ",,,tie-break\n";
    }
  }
  return os.str();
}

rfr::SimConfig load_sim_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw rfr::ParseError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    throw rfr::ParseError(std::string("bad JSON config: ") + e.what());
  }
  rfr::SimConfig cfg;
  cfg.d = j.value("d", cfg.d);
  cfg.psi1 = j.value("psi1", cfg.psi1);
  cfg.psi2 = j.value("psi2", cfg.psi2);
  cfg.lambda = j.value("lambda", cfg.lambda);
  if (j.contains("af")) cfg.af = rfr::ActivationSpec::parse(j["af"].get<std::string>());
  cfg.F0 = j.value("F0", cfg.F0);
  cfg.F1 = j.value("F1", cfg.F1);
  cfg.F_star = j.value("F_star", cfg.F_star);
  cfg.tau = j.value("tau", cfg.tau);
  cfg.n_test = j.value("n_test", cfg.n_test);
  cfg.trials = j.value("trials", cfg.trials);
  cfg.seed = j.value("seed", cfg.seed);
  if (const char* env = std::getenv("RFR_SEED")) cfg.seed = std::strtoull(env, nullptr, 10);
  return cfg;
}

std::string sim_estimate_json(const rfr::SimConfig& cfg, const rfr::SimEstimate& est) {
  std::ostringstream os;
  os << "{\"d\": " << cfg.d << ", \"psi1\": " << rfr::fmt17(cfg.psi1)
     << ", \"psi2\": " << rfr::fmt17(cfg.psi2) << ", \"lambda\": " << rfr::fmt17(cfg.lambda)
     << ", \"af\": \"" << cfg.af.name() << "\""
     << ", \"error_mean\": " << rfr::fmt17(est.error_mean)
     << ", \"error_se\": " << rfr::fmt17(est.error_se)
     << ", \"sens_mean\": " << rfr::fmt17(est.sens_mean)
     << ", \"sens_se\": " << rfr::fmt17(est.sens_se) << ", \"trials\": " << cfg.trials
     << ", \"seed\": " << cfg.seed << ", \"per_trial\": [";
  for (size_t i = 0; i < est.per_trial.size(); ++i) {
    if (i) os << ", ";
    os << "[" << rfr::fmt17(est.per_trial[i].first) << ", " << rfr::fmt17(est.per_trial[i].second)
       << "]";
  }
  os << "]}\n";
  return os.str();
}

std::string sim_estimate_csv_row(const rfr::SimConfig& cfg, const rfr::SimEstimate& est) {
  std::ostringstream os;
  os << cfg.d << "," << rfr::csv17(cfg.psi1) << "," << rfr::csv17(cfg.psi2) << ","
     << rfr::csv17(cfg.lambda) << "," << cfg.af.name() << "," << rfr::csv17(est.error_mean) << ","
     << rfr::csv17(est.error_se) << "," << rfr::csv17(est.sens_mean) << ","
     << rfr::csv17(est.sens_se) << "," << cfg.trials << "," << cfg.seed << "\n";
  return os.str();
}

constexpr const char* kSimCsvHeader =
    "d,psi1,psi2,lambda,af,error_mean,error_se,sens_mean,sens_se,trials,seed\n";

int run(int argc, char** argv) {
  CLI::App app{"random features regression: asymptotic theory and simulation"};
  app.require_subcommand(1);

  // ---- moments ----
  auto* cmd_moments = app.add_subcommand("moments", "Gaussian moments and norms of an activation");
  std::string af_text = "relu";
  int nodes = 201;
  cmd_moments->add_option("--af", af_text, "activation spec, e.g. relu or quadratic:a,b,c")
      ->required();
  cmd_moments->add_option("--nodes", nodes, "quadrature size");

  // ---- curve ----
  auto* cmd_curve = app.add_subcommand("curve", "objective along a psi1 or lambda grid (CSV)");
  std::string curve_regime = "r1", sweep = "psi1", scale = "linear", curve_af = "optimal";
  std::string out_path;
  double lo = 0.1, hi = 2.0;
  int points = 101;
  ParamFlags curve_flags;
  cmd_curve->add_option("--regime", curve_regime, "r1|r2|r3")->required();
  cmd_curve->add_option("--sweep", sweep, "psi1|lambda")->required();
  cmd_curve->add_option("--lo", lo)->required();
  cmd_curve->add_option("--hi", hi)->required();
  cmd_curve->add_option("--points", points);
  cmd_curve->add_option("--scale", scale, "linear|log");
  cmd_curve->add_option("--af", curve_af, "activation spec or 'optimal'");
  cmd_curve->add_option("-o,--out", out_path, "output CSV path (stdout if omitted)");
  curve_flags.attach(cmd_curve);

  // ---- optimize ----
  auto* cmd_optimize = app.add_subcommand("optimize", "optimal activation moments per regime");
  std::string opt_regime = "r1";
  int emit_af = 0;
  ParamFlags opt_flags;
  cmd_optimize->add_option("--regime", opt_regime, "r1|r2|r3")->required();
  cmd_optimize->add_option("--emit-af", emit_af, "also synthesize a norm-1 or norm-2 activation");
  opt_flags.attach(cmd_optimize);

  // ---- synthesize ----
  auto* cmd_synth = app.add_subcommand("synthesize", "minimal-norm activation for given moments");
  double mu0 = 0.0, mu1 = 1.0, mu2 = 2.0;
  int norm = 2, sign = +1;
  cmd_synth->add_option("--mu0", mu0)->required();
  cmd_synth->add_option("--mu1", mu1)->required();
  cmd_synth->add_option("--mu2", mu2)->required();
  cmd_synth->add_option("--norm", norm, "1|2");
  cmd_synth->add_option("--sign", sign, "+1|-1 quadratic branch (norm 2)");

  // ---- simulate ----
  auto* cmd_sim = app.add_subcommand("simulate", "finite-size Monte-Carlo run from a JSON config");
  std::string config_path, csv_path;
  cmd_sim->add_option("config", config_path, "JSON config file")->required();
  cmd_sim->add_option("--csv", csv_path, "append a CSV summary row to this file");

  // ---- figure ----
  auto* cmd_fig = app.add_subcommand("figure", "preset curves behind the four summary panels");
  std::string panel = "A", out_dir = ".";
  double fig_psi2 = -1.0;  // panel default if negative
  cmd_fig->add_option("--panel", panel, "A|B|C|D")->required();
  cmd_fig->add_option("--out-dir", out_dir, "directory for the CSV files");
  cmd_fig->add_option("--psi2", fig_psi2, "override the panel's psi2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return kExitParse;
  }

  if (cmd_moments->parsed()) {
    const auto af = rfr::ActivationSpec::parse(af_text);
    const auto m = rfr::compute_moments(af, nodes);
    const auto n = rfr::functional_norms(af, nodes);
    std::cout << rfr::moments_json(m, n) << "\n";
    return 0;
  }

  if (cmd_curve->parsed()) {
    write_out(out_path, render_curve(parse_regime(curve_regime), sweep, lo, hi, points, scale,
                                     curve_af, curve_flags));
    return 0;
  }

  if (cmd_optimize->parsed()) {
    const auto p = opt_flags.params();
    rfr::Optimum o;
    switch (parse_regime(opt_regime)) {
      case rfr::Regime::R1: o = rfr::solve_r1(p); break;
      case rfr::Regime::R2: o = rfr::solve_r2(p); break;
      case rfr::Regime::R3: o = rfr::solve_r3(p); break;
    }
    if (emit_af == 0) {
      std::cout << rfr::optimum_json(o) << "\n";
      return 0;
    }
    if (!std::isfinite(o.canonical_moments.mu1))
      throw rfr::SolverDiverged("optimal moments diverge; no activation to synthesize");
    const auto syn = emit_af == 1 ? rfr::synthesize_l1(o.canonical_moments)
                                  : rfr::synthesize_l2(o.canonical_moments, sign);
    std::cout << "{\"optimum\": " << rfr::optimum_json(o) << ", \"af\": \"" << syn.af.name()
              << "\", \"norm\": " << emit_af << ", \"norm_value\": " << rfr::fmt17(syn.norm_value)
              << "}\n";
    return 0;
  }

  if (cmd_synth->parsed()) {
    const auto target = rfr::Moments::from_raw(mu0, mu1, mu2);
    const auto syn =
        norm == 1 ? rfr::synthesize_l1(target) : rfr::synthesize_l2(target, sign);
    std::cout << "{\"af\": \"" << syn.af.name() << "\", \"norm\": " << norm
              << ", \"norm_value\": " << rfr::fmt17(syn.norm_value)
              << ", \"s\": " << rfr::fmt17(syn.s_param) << ", \"target_mu0\": " << rfr::fmt17(mu0)
              << ", \"target_mu1\": " << rfr::fmt17(mu1)
              << ", \"target_mu2\": " << rfr::fmt17(mu2) << "}\n";
    return 0;
  }

  if (cmd_sim->parsed()) {
    const auto cfg = load_sim_config(config_path);
    const auto est = rfr::estimate(cfg);
    std::cout << sim_estimate_json(cfg, est);
    if (!csv_path.empty()) {
      const bool fresh = !std::ifstream(csv_path).good();
      std::ofstream f(csv_path, std::ios::app | std::ios::binary);
      if (!f) throw rfr::ParseError("cannot open CSV file '" + csv_path + "'");
      if (fresh) f << kSimCsvHeader;
      f << sim_estimate_csv_row(cfg, est);
    }
    return 0;
  }

  if (cmd_fig->parsed()) {
    auto emit = [&](const std::string& name, const std::string& content) {
      write_out(out_dir + "/" + name, content);
      std::cerr << "wrote " << out_dir << "/" << name << "\n";
    };
    ParamFlags f;
    if (panel == "A" || panel == "B") {
      f.psi2 = fig_psi2 > 0 ? fig_psi2 : 3.0;
      f.f1 = 1.0;
      f.alpha = 0.0;
      f.tau = panel == "B" ? 1.0 : 0.0;
      const double lo_psi = 0.02 * f.psi2, hi_psi = 2.0 * f.psi2;
      emit("figure" + panel + "_optimal.csv",
           render_curve(rfr::Regime::R1, "psi1", lo_psi, hi_psi, 199, "linear", "optimal", f));
      emit("figure" + panel + "_relu.csv",
           render_curve(rfr::Regime::R1, "psi1", lo_psi, hi_psi, 199, "linear", "relu", f));
      if (panel == "B")
        emit("figureB_linear.csv",
             render_curve(rfr::Regime::R1, "psi1", lo_psi, hi_psi, 199, "linear", "linear:1,0", f));
      return 0;
    }
    if (panel == "C" || panel == "D") {
      f.psi2 = fig_psi2 > 0 ? fig_psi2 : 10.0;
      f.f1 = panel == "D" ? 10.0 : 1.0;
      f.alpha = 0.0;
      const std::vector<double> tau2s =
          panel == "C" ? std::vector<double>{10.0, 5.0} : std::vector<double>{5.0};
      for (double t2 : tau2s) {
        f.tau = std::sqrt(t2);
        std::ostringstream tag;
        tag << "figure" << panel << "_tau2_" << t2;
        emit(tag.str() + "_relu.csv",
             render_curve(rfr::Regime::R2, "lambda", 1e-4, 1e2, 121, "log", "relu", f));
        emit(tag.str() + "_optimal.csv",
             render_curve(rfr::Regime::R2, "lambda", 1e-4, 1e2, 121, "log", "optimal", f));
      }
      return 0;
    }
    throw rfr::ParseError("unknown panel '" + panel + "'");
  }

  return kExitParse;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rfr::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const rfr::TieBreakAmbiguous& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitTieBreak;
  } catch (const rfr::SolverDiverged& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
}
