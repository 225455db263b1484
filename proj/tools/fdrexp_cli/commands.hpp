#pragma once

// Subcommands of the fdrexp command-line tool. run_cli parses arguments,
// dispatches and maps failures to exit codes:
//   0 success, 2 input/usage error, 3 domain or degenerate input,
//   4 numerical failure, 1 anything else.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fdrexp/envelope.hpp"
#include "fdrexp/errors.hpp"
#include "fdrexp/fdr.hpp"
#include "fdrexp/io.hpp"
#include "fdrexp/mc.hpp"
#include "fdrexp/mixtures.hpp"
#include "fdrexp/risk.hpp"

namespace fdrexp::cli {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kInputError = 2,
  kDomainError = 3,
  kNumericalError = 4,
};

/// FDR_SEED if set, else the built-in default. A --seed flag wins over both.
inline std::uint64_t default_seed() {
  const char* env = std::getenv("FDR_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  std::uint64_t seed = 0;
  const std::string_view text(env);
  const auto res = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError("FDR_SEED must be an unsigned 64-bit integer, got '" + std::string(text) + "'");
  }
  return seed;
}

inline FdrConfig checked_config(double q) {
  if (!(q > 0.0 && q < 1.0)) throw InputError("--q must lie in (0, 1)");
  return FdrConfig(q);
}

inline std::string q_tag(double q) { return io::format_number(q); }

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string command_line;
};

struct ThresholdArgs {
  std::string input;
  double q = 0.25;
  bool capped = false;
};

inline int cmd_threshold(const ThresholdArgs& a, Context& ctx) {
  const auto cfg = checked_config(a.q);
  std::ifstream in(a.input);
  if (!in) throw InputError("cannot open '" + a.input + "'");
  const auto batch = io::read_batch_csv(in);
  const auto result = a.capped ? capped_threshold(batch, cfg) : step_up_threshold(batch, cfg);
  ctx.out << io::to_json(result).dump() << '\n';
  return kSuccess;
}

struct FunctionalArgs {
  std::optional<double> eps;
  std::optional<double> mu;
  std::string mixture;
  double q = 0.25;
  bool bounds = false;
};

inline MixingDistribution load_mixture(const std::string& source) {
  std::string text = source;
  if (source.find('{') == std::string::npos) {
    std::ifstream in(source);
    if (!in) throw InputError("cannot open mixture file '" + source + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("mixture JSON: ") + e.what());
  }
  return io::mixture_from_json(j);
}

inline int cmd_functional(const FunctionalArgs& a, Context& ctx) {
  const auto cfg = checked_config(a.q);
  MixingDistribution f = MixingDistribution::point_mass(1.0);
  if (!a.mixture.empty()) {
    if (a.eps || a.mu) throw InputError("give either --mixture or --eps/--mu, not both");
    f = load_mixture(a.mixture);
  } else {
    if (!a.eps || !a.mu) throw InputError("need --eps and --mu, or --mixture");
    f = make_two_point(*a.eps, *a.mu);
  }
  const ExpScaleMixture g(f);
  const double t = fdr_functional(g, cfg);
  if (!a.bounds) {
    ctx.out << io::format_number(t) << '\n';
    return kSuccess;
  }
  const auto b = functional_bounds(g, cfg);
  Json j{{"threshold", io::number(t)},
         {"lower", io::number(b.lower)},
         {"upper", io::number(b.upper)},
         {"ks_distance", io::number(ks_distance_to_exp(f))}};
  ctx.out << j.dump() << '\n';
  return kSuccess;
}

inline void write_manifest(const std::filesystem::path& path, io::RunManifest manifest) {
  manifest.finished = io::utc_timestamp(std::chrono::system_clock::now());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << manifest.to_json().dump(2) << '\n';
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

struct RiskCurveArgs {
  double p = 1.0;
  double eta = 1e-3;
  std::vector<double> qs{0.05, 0.15, 0.25, 0.5};
  double mu_min = 2.0;
  double mu_max = 30.0;
  double mu_step = 1.0;
  std::size_t n = 100000;
  std::size_t reps = 16;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "risk_curve";
  unsigned threads = 1;
};

inline int cmd_risk_curve(const RiskCurveArgs& a, Context& ctx) {
  for (double q : a.qs) checked_config(q);
  if (a.reps == 0 || a.n == 0) throw InputError("--n and --reps must be >= 1");
  if (!(a.mu_step > 0.0) || !(a.mu_max >= a.mu_min)) throw InputError("bad mu range");
  const SparsityBall ball(a.p, a.eta);
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();

  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double mu = a.mu_min + static_cast<double>(i) * a.mu_step;
    if (mu > a.mu_max * (1.0 + 1e-12)) break;
    grid.push_back(mu);
  }
  io::RunManifest manifest;
  manifest.command_line = ctx.command_line;
  manifest.seed = seed;
  manifest.started = io::utc_timestamp(std::chrono::system_clock::now());
  manifest.parameters = {{"p", a.p},     {"eta", a.eta},   {"q", a.qs},
                         {"mu_min", a.mu_min}, {"mu_max", a.mu_max}, {"mu_step", a.mu_step},
                         {"n", a.n},     {"reps", a.reps}};

  const auto curve = risk_curve(ball, a.qs, grid, a.n, a.reps, seed, a.threads);
  const std::filesystem::path dir(a.out_dir);
  Json summary = Json::array();
  for (std::size_t k = 0; k < a.qs.size(); ++k) {
    const std::vector<CurvePoint> slice(curve.begin() + static_cast<std::ptrdiff_t>(k * grid.size()),
                                        curve.begin() + static_cast<std::ptrdiff_t>((k + 1) * grid.size()));
    const auto path = dir / ("risk_curve_q" + q_tag(a.qs[k]) + ".csv");
    auto out = open_output(path);
    io::write_curve_csv(out, slice);
    manifest.outputs.push_back(path.string());

    double worst = -1.0, argmax = std::nan("");
    for (const auto& c : slice) {
      if (std::isnan(c.mean_loss)) {
        ctx.err << "warning: mu=" << io::format_number(c.mu)
                << " cannot be calibrated (eps > 1); row written as nan\n";
      } else if (c.mean_loss > worst) {
        worst = c.mean_loss;
        argmax = c.mu;
      }
    }
    summary.push_back({{"q", io::number(a.qs[k])},
                       {"max_mean_loss", io::number(worst)},
                       {"argmax_mu", io::number(argmax)},
                       {"file", path.string()}});
  }
  write_manifest(dir / "risk_curve_manifest.json", manifest);
  ctx.out << summary.dump() << '\n';
  return kSuccess;
}

struct EnvelopeArgs {
  std::string problem;
  double p = 1.0;
  double eta = 1e-3;
  std::optional<double> t;
  std::optional<double> q;
};

inline int cmd_envelope(const EnvelopeArgs& a, Context& ctx) {
  const SparsityBall ball(a.p, a.eta);
  const double t = a.t ? *a.t : minimax_threshold(ball);
  EnvelopeResult result;
  Json j;
  if (a.problem == "bias") {
    result = worst_bias(ball, t);
  } else if (a.problem == "variance") {
    result = worst_variance(ball, t);
  } else if (a.problem == "hstar") {
    result = envelope_value(hstar_problem(ball, t));
  } else {
    throw InputError("unknown problem '" + a.problem + "' (bias|variance|hstar)");
  }
  j = {{"problem", a.problem}, {"p", io::number(a.p)}, {"eta", io::number(a.eta)},
       {"t", io::number(t)}};
  j.update(io::to_json(result));
  if (a.q && a.problem == "hstar") {
    const auto cfg = checked_config(*a.q);
    j["level"] = io::number((1.0 - cfg.q()) / cfg.q());
    j["crosses_level"] = result.value >= (1.0 - cfg.q()) / cfg.q();
  }
  ctx.out << j.dump() << '\n';
  return kSuccess;
}

struct ConvergenceArgs {
  double eps = 0.01;
  double mu = 10.0;
  double q = 0.5;
  std::vector<std::size_t> n_list{1000, 10000, 100000};
  std::size_t reps = 200;
  std::optional<std::uint64_t> seed;
  std::string out = "convergence.csv";
  unsigned threads = 1;
};

inline int cmd_convergence(const ConvergenceArgs& a, Context& ctx) {
  const auto cfg = checked_config(a.q);
  if (a.n_list.size() < 3) throw InputError("--n-list needs at least 3 sample sizes");
  if (a.reps == 0) throw InputError("--reps must be >= 1");
  const std::uint64_t seed = a.seed ? *a.seed : default_seed();
  io::RunManifest manifest;
  manifest.command_line = ctx.command_line;
  manifest.seed = seed;
  manifest.started = io::utc_timestamp(std::chrono::system_clock::now());
  manifest.parameters = {{"eps", a.eps}, {"mu", a.mu},     {"q", a.q},
                         {"n_list", a.n_list}, {"reps", a.reps}};

  const auto result =
      convergence_experiment(make_two_point(a.eps, a.mu), cfg, a.n_list, a.reps, seed, a.threads);
  const std::filesystem::path path(a.out);
  auto out = open_output(path);
  io::write_convergence_csv(out, result);
  manifest.outputs.push_back(path.string());
  write_manifest(path.string() + ".manifest.json", manifest);
  ctx.out << io::format_number(result.slope) << '\n';
  return kSuccess;
}

struct ScanArgs {
  double p = 1.0;
  double eta = 1e-6;
  double q = 0.25;
  double mu_min = 1.5;
  double mu_max = 200.0;
  std::size_t points = 200;
  std::string out;
};

inline int cmd_scan(const ScanArgs& a, Context& ctx) {
  const auto cfg = checked_config(a.q);
  if (a.points < 2 || !(a.mu_min > 1.0) || !(a.mu_max > a.mu_min)) {
    throw InputError("scan needs --points >= 2 and 1 < --mu-min < --mu-max");
  }
  const SparsityBall ball(a.p, a.eta);
  const auto grid = numerics::logspace(a.mu_min, a.mu_max, a.points);
  const auto scan = worst_ideal_risk_scan(ball, cfg, grid);
  if (a.out.empty()) {
    io::write_scan_csv(ctx.out, scan);
    return kSuccess;
  }
  io::RunManifest manifest;
  manifest.command_line = ctx.command_line;
  manifest.started = io::utc_timestamp(std::chrono::system_clock::now());
  manifest.parameters = {{"p", a.p},           {"eta", a.eta},       {"q", a.q},
                         {"mu_min", a.mu_min}, {"mu_max", a.mu_max}, {"points", a.points}};
  auto out = open_output(a.out);
  io::write_scan_csv(out, scan);
  manifest.outputs.push_back(a.out);
  write_manifest(a.out + ".manifest.json", manifest);
  ctx.out << Json{{"max_total", io::number(scan.max_total)},
                  {"argmax_mu", io::number(scan.argmax_mu)}}
                 .dump()
          << '\n';
  return kSuccess;
}

struct AsymptoticsArgs {
  double p = 1.0;
  double eta = 1e-3;
  double q = 0.5;
};

inline int cmd_asymptotics(const AsymptoticsArgs& a, Context& ctx) {
  const auto cfg = checked_config(a.q);
  const auto pt = asymptotic_point(SparsityBall(a.p, a.eta), cfg);
  ctx.out << Json{{"t0", io::number(pt.t0)},
                  {"tq_star", io::number(pt.tq_star)},
                  {"tq_star_formula", io::number(pt.tq_star_formula)},
                  {"tq_star_gap", io::number(std::abs(pt.tq_star - pt.tq_star_formula))},
                  {"rate", io::number(pt.rate)},
                  {"mu_b_star", io::number(pt.mu_b_star)},
                  {"mu_v_star", io::number(pt.mu_v_star)}}
                 .dump()
          << '\n';
  return kSuccess;
}

/// Parses and runs one invocation; args excludes the program name.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"FDR thresholding for sparse exponential means", "fdrexp"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value file pre-seeding flags; flags win");

  ThresholdArgs threshold;
  auto* sub_threshold = app.add_subcommand("threshold", "Step-up threshold of a sample CSV");
  sub_threshold->add_option("--input", threshold.input, "CSV with column x")->required();
  sub_threshold->add_option("--q", threshold.q, "FDR level")->capture_default_str();
  sub_threshold->add_flag("--capped", threshold.capped, "Use the capped threshold log(n/q) on no crossing");

  FunctionalArgs functional;
  auto* sub_functional = app.add_subcommand("functional", "Population FDR functional T_q(G)");
  sub_functional->add_option("--eps", functional.eps, "Signal fraction of a two-point mixture");
  sub_functional->add_option("--mu", functional.mu, "Signal mean of a two-point mixture");
  sub_functional->add_option("--mixture", functional.mixture, "Mixture JSON file or inline JSON");
  sub_functional->add_option("--q", functional.q, "FDR level")->capture_default_str();
  sub_functional->add_flag("--bounds", functional.bounds, "Also print the boundedness sandwich");

  RiskCurveArgs curve;
  auto* sub_curve = app.add_subcommand("risk-curve", "Monte Carlo risk curves over (q, mu)");
  sub_curve->add_option("--p", curve.p)->capture_default_str();
  sub_curve->add_option("--eta", curve.eta)->capture_default_str();
  sub_curve->add_option("--q", curve.qs, "FDR levels")->delimiter(',')->capture_default_str();
  sub_curve->add_option("--mu-min", curve.mu_min)->capture_default_str();
  sub_curve->add_option("--mu-max", curve.mu_max)->capture_default_str();
  sub_curve->add_option("--mu-step", curve.mu_step)->capture_default_str();
  sub_curve->add_option("--n", curve.n)->capture_default_str();
  sub_curve->add_option("--reps", curve.reps)->capture_default_str();
  sub_curve->add_option("--seed", curve.seed, "Master seed (default: FDR_SEED or built-in)");
  sub_curve->add_option("--out", curve.out_dir, "Output directory")->capture_default_str();
  sub_curve->add_option("--threads", curve.threads)->capture_default_str();

  EnvelopeArgs envelope;
  auto* sub_envelope = app.add_subcommand("envelope", "Worst-case envelope over the sparsity ball");
  sub_envelope->add_option("--problem", envelope.problem, "bias | variance | hstar")->required();
  sub_envelope->add_option("--p", envelope.p)->capture_default_str();
  sub_envelope->add_option("--eta", envelope.eta)->capture_default_str();
  sub_envelope->add_option("--t", envelope.t, "Threshold (default: minimax t0)");
  sub_envelope->add_option("--q", envelope.q, "FDR level for the h* crossing check");

  ConvergenceArgs convergence;
  auto* sub_conv = app.add_subcommand("convergence", "Convergence of the empirical threshold");
  sub_conv->add_option("--eps", convergence.eps)->capture_default_str();
  sub_conv->add_option("--mu", convergence.mu)->capture_default_str();
  sub_conv->add_option("--q", convergence.q)->capture_default_str();
  sub_conv->add_option("--n-list", convergence.n_list)->delimiter(',')->capture_default_str();
  sub_conv->add_option("--reps", convergence.reps)->capture_default_str();
  sub_conv->add_option("--seed", convergence.seed, "Master seed (default: FDR_SEED or built-in)");
  sub_conv->add_option("--out", convergence.out, "CSV path")->capture_default_str();
  sub_conv->add_option("--threads", convergence.threads)->capture_default_str();

  ScanArgs scan;
  auto* sub_scan = app.add_subcommand("scan", "Worst-case ideal risk over calibrated two-point mixtures");
  sub_scan->add_option("--p", scan.p)->capture_default_str();
  sub_scan->add_option("--eta", scan.eta)->capture_default_str();
  sub_scan->add_option("--q", scan.q)->capture_default_str();
  sub_scan->add_option("--mu-min", scan.mu_min)->capture_default_str();
  sub_scan->add_option("--mu-max", scan.mu_max)->capture_default_str();
  sub_scan->add_option("--points", scan.points)->capture_default_str();
  sub_scan->add_option("--out", scan.out, "CSV path (default: CSV on stdout)");

  AsymptoticsArgs asym;
  auto* sub_asym = app.add_subcommand("asymptotics", "t0, T_q*, rate and least favorable means");
  sub_asym->add_option("--p", asym.p)->capture_default_str();
  sub_asym->add_option("--eta", asym.eta)->capture_default_str();
  sub_asym->add_option("--q", asym.q)->capture_default_str();

  std::vector<const char*> argv{"fdrexp"};
  std::string command_line = "fdrexp";
  for (const auto& a : args) {
    argv.push_back(a.c_str());
    command_line += " " + a;
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kInputError;
  }

  Context ctx{out, err, command_line};
  try {
    if (*sub_threshold) return cmd_threshold(threshold, ctx);
    if (*sub_functional) return cmd_functional(functional, ctx);
    if (*sub_curve) return cmd_risk_curve(curve, ctx);
    if (*sub_envelope) return cmd_envelope(envelope, ctx);
    if (*sub_conv) return cmd_convergence(convergence, ctx);
    if (*sub_scan) return cmd_scan(scan, ctx);
    if (*sub_asym) return cmd_asymptotics(asym, ctx);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DegenerateMixtureError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const OutOfRangeError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainError;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kInputError;
}

}  // namespace fdrexp::cli
