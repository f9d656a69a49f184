#include "qmorse_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <random>
#include <set>

#include "CLI11.hpp"
#include "qmorse/error.hpp"
#include "qmorse/hyperkahler.hpp"
#include "qmorse/poincare.hpp"
#include "qmorse/strata.hpp"
#include "qmorse_cli/io.hpp"

namespace qmorse::cli {

bool is_input_error(const std::string& code) {
  static const std::set<std::string> input_codes{
      "invalid_quiver", "unknown_vertex", "invalid_dimension", "trace_free_violation", "dimension_mismatch",
      "bad_rational",   "shape_mismatch", "non_finite",        "parse_error",          "invalid_config",
      "unknown_builtin", "invalid_argument", "io_error",       "usage",                "off_level"};
  return input_codes.count(code) > 0;
}

namespace {

void emit_error(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << '\n';
}

// Output goes to a file (atomically) when a path is given, else to `out`.
void deliver(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_atomic(path, content);
  }
}

FlowConfig flow_config(double tol, double max_t, int stride) {
  FlowConfig cfg;
  cfg.grad_tol = tol;
  cfg.max_time = max_t;
  cfg.sample_stride = stride;
  cfg.validate();
  return cfg;
}

json rationals(const std::vector<Rational>& xs) {
  json out = json::array();
  for (const auto& x : xs) out.push_back(to_string(x));
  return out;
}

// Each command fills its options and returns a closure that runs it.
struct FlowOpts {
  std::string quiver, init, out_traj, out_final;
  std::uint64_t seed = 0;
  double tol = 1e-8, max_t = 1e4, cluster_tol = 1e-4;
  int stride = 1;
};

int cmd_flow(const FlowOpts& o, std::ostream& out, std::ostream& err) {
  const QuiverData d = load_quiver(o.quiver);
  const FlowConfig cfg = flow_config(o.tol, o.max_t, o.stride);
  Representation A0;
  if (!o.init.empty()) {
    A0 = load_rep(d.quiver, d.dims, o.init);
  } else {
    std::mt19937_64 rng(o.seed);
    A0 = random_representation(d.quiver, d.dims, rng);
  }
  const FlowResult r = integrate_flow(d.quiver, A0, d.alpha, cfg);

  json fin = rep_to_json(r.final);
  fin["f"] = r.f;
  fin["grad_norm"] = r.grad_norm;
  fin["time"] = r.time;
  fin["converged"] = r.converged;
  fin["accepted_steps"] = r.accepted_steps;
  fin["rejected_steps"] = r.rejected_steps;
  fin["hn_type"] = nullptr;
  if (r.converged) {
    try {
      const CriticalType c = classify_critical(d.quiver, r.final, d.alpha, o.cluster_tol);
      fin["hn_type"] = hn_type_to_json(c.type);
      fin["eigenvalues"] = c.eigenvalues;
      fin["critical_value"] = to_string(critical_value(d.quiver, c.type, d.alpha));
    } catch (const Error& e) {
      fin["classification_error"] = e.code();
    }
  }
  if (!o.out_traj.empty()) write_atomic(o.out_traj, trajectory_csv(r.trajectory));
  deliver(o.out_final, fin.dump(2) + "\n", out);
  if (!r.converged) {
    emit_error(err, "not_converged", "flow stopped at t = " + format_double(r.time) +
                                         " with |grad f| = " + format_double(r.grad_norm));
    return kExitRuntime;
  }
  return kExitOk;
}

struct StrataOpts {
  std::string quiver, out;
  int max_length = 0;
};

int cmd_strata(const StrataOpts& o, std::ostream& out) {
  const QuiverData d = load_quiver(o.quiver);
  json list = json::array();
  for (const HNType& t : enumerate_hn_types(d.quiver, d.dims, d.alpha)) {
    if (o.max_length > 0 && static_cast<int>(t.length()) > o.max_length) continue;
    list.push_back({{"type", hn_type_to_json(t)},
                    {"length", t.length()},
                    {"slope_vector", rationals(slope_vector(d.quiver, t, d.alpha))},
                    {"codimension", signed_codimension(d.quiver, t)},
                    {"critical_value", to_string(critical_value(d.quiver, t, d.alpha))}});
  }
  deliver(o.out, list.dump(2) + "\n", out);
  return kExitOk;
}

struct PoincareOpts {
  std::string quiver, out, csv;
  int max_deg = 20;
  bool no_memo = false;
};

int cmd_poincare(const PoincareOpts& o, std::ostream& out, std::ostream& err) {
  const QuiverData d = load_quiver(o.quiver);
  PoincareSolver solver(d.quiver, !o.no_memo);
  const TruncatedSeries p = solver.semistable(d.dims, d.alpha, o.max_deg);
  json terms = json::array();
  std::string csv = "degree,coefficient\n";
  bool negative = false;
  for (int k = 0; k <= p.max_degree(); ++k) {
    csv += std::to_string(k) + "," + std::to_string(p[k]) + "\n";
    if (p[k] != 0) terms.push_back({{"degree", k}, {"coefficient", p[k]}});
    negative = negative || p[k] < 0;
  }
  json doc{{"max_degree", o.max_deg}, {"coefficients", p.coefficients()}, {"terms", terms}};
  if (!o.csv.empty()) write_atomic(o.csv, csv);
  deliver(o.out, doc.dump(2) + "\n", out);
  if (negative) {
    emit_error(err, "negative_coefficient", "a Poincare coefficient came out negative");
    return kExitRuntime;
  }
  return kExitOk;
}

struct SigmaOpts {
  std::string quiver, g0 = "random", out;
  std::uint64_t seed = 0;
  double tol = 1e-8, max_t = 1e4;
  int stride = 1;
};

int cmd_sigma(const SigmaOpts& o, std::ostream& out) {
  const QuiverData d = load_quiver(o.quiver);
  const FlowConfig cfg = flow_config(o.tol, o.max_t, o.stride);
  std::mt19937_64 rng(o.seed);
  const Representation A0 = random_representation(d.quiver, d.dims, rng);
  GaugeElement g0;
  if (o.g0 == "identity") {
    g0 = GaugeElement::identity(d.dims);
  } else if (o.g0 == "unitary") {
    g0 = random_unitary(d.dims, rng);
  } else if (o.g0 == "random") {
    g0 = random_invertible(d.dims, rng);
  } else {
    throw Error("invalid_argument", "--g0 must be identity, unitary or random");
  }
  const SigmaTrace tr = paired_flow_sigma(d.quiver, A0, g0, d.alpha, cfg);
  deliver(o.out, trajectory_csv(tr.flow1.trajectory), out);
  return kExitOk;
}

struct HkOpts {
  std::string quiver, out_traj;
  std::uint64_t seed = 0;
  double tol = 1e-8, max_t = 1e4, level_tol = 1e-9;
  int stride = 1;
  bool no_gauge = false;
};

int cmd_hkflow(const HkOpts& o, std::ostream& out, std::ostream& err) {
  const QuiverData d = load_quiver(o.quiver);
  const FlowConfig cfg = flow_config(o.tol, o.max_t, o.stride);
  std::mt19937_64 rng(o.seed);
  const DoubledRep x0 = random_level_point(d.quiver, d.dims, rng, !o.no_gauge);
  const LevelFlowResult r = flow_on_level(x0, d.alpha, cfg, o.level_tol);
  const std::string csv = trajectory_csv(r.flow.trajectory);
  if (o.out_traj.empty()) {
    out << csv;
  } else {
    write_atomic(o.out_traj, csv);
    out << json{{"converged", r.flow.converged},
                {"f", r.flow.f},
                {"grad_norm", r.flow.grad_norm},
                {"max_phi_c_norm", r.max_phi_c}}
               .dump(2)
        << '\n';
  }
  if (!r.flow.converged) {
    emit_error(err, "not_converged", "flow stopped at t = " + format_double(r.flow.time));
    return kExitRuntime;
  }
  return kExitOk;
}

struct CheckgradOpts {
  std::vector<std::string> quivers;
  std::uint64_t seed = 0;
  int trials = 20, directions = 20;
  double threshold = 1e-6;
};

// Directional derivative of f by the five-point stencil. f is a quartic
// polynomial along any line, so the stencil is exact up to rounding.
double fd_derivative(const Quiver& q, const Representation& A, const Representation& D, const StabilityParam& a,
                     double h) {
  auto f_at = [&](double s) { return f_value(q, A + s * D, a); };
  return (-f_at(2 * h) + 8 * f_at(h) - 8 * f_at(-h) + f_at(-2 * h)) / (12 * h);
}

int cmd_checkgrad(const CheckgradOpts& o, std::ostream& out) {
  std::vector<std::string> sources = o.quivers;
  if (sources.empty()) sources = {"builtin:a2", "builtin:jordan", "builtin:two-loop"};
  std::mt19937_64 rng(o.seed);
  json per = json::array();
  double worst = 0;
  for (const auto& src : sources) {
    const QuiverData d = load_quiver(src);
    double local = 0;
    for (int t = 0; t < o.trials; ++t) {
      const Representation A = random_representation(d.quiver, d.dims, rng);
      const Representation grad = -1.0 * neg_gradient(d.quiver, A, d.alpha);
      for (int k = 0; k < o.directions; ++k) {
        Representation D = random_representation(d.quiver, d.dims, rng);
        const double dn = D.norm();
        if (dn == 0) continue;
        D *= 1.0 / dn;
        const double analytic = real_inner(grad, D);
        const double fd = fd_derivative(d.quiver, A, D, d.alpha, 1e-3 * std::max(1.0, A.norm()));
        // Relative to the gradient norm, so directions nearly orthogonal to
        // the gradient do not divide by ~0.
        const double scale = std::max(grad.norm(), 1e-300);
        local = std::max(local, std::abs(fd - analytic) / scale);
      }
    }
    per.push_back({{"quiver", src}, {"max_rel_error", local}});
    worst = std::max(worst, local);
  }
  const bool pass = worst < o.threshold;
  out << json{{"quivers", per}, {"max_rel_error", worst}, {"threshold", o.threshold}, {"pass", pass}}.dump(2)
      << '\n';
  return pass ? kExitOk : kExitRuntime;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient flows, strata and Poincare series for quiver representations", "qmorse"};
  app.require_subcommand(1);
  const std::string quiver_help = "quiver spec JSON, or builtin:a2 | builtin:jordan | builtin:two-loop";

  FlowOpts flow;
  auto* sc_flow = app.add_subcommand("flow", "integrate the gradient flow from an initial representation");
  sc_flow->add_option("--quiver", flow.quiver, quiver_help)->required();
  auto* init_opt = sc_flow->add_option("--init", flow.init, "initial representation JSON");
  sc_flow->add_option("--seed", flow.seed, "seed (mt19937_64) for a random initial representation")->excludes(init_opt);
  sc_flow->add_option("--tol", flow.tol, "stop when |grad f| < tol");
  sc_flow->add_option("--max-t", flow.max_t, "time horizon");
  sc_flow->add_option("--cluster-tol", flow.cluster_tol, "eigenvalue clustering tolerance for the critical type");
  sc_flow->add_option("--stride", flow.stride, "record every n-th accepted step");
  sc_flow->add_option("--out-traj", flow.out_traj, "trajectory CSV");
  sc_flow->add_option("--out-final", flow.out_final, "final state JSON (default: stdout)");

  StrataOpts strata;
  auto* sc_strata = app.add_subcommand("strata", "list HN types with slope vectors and codimensions");
  sc_strata->add_option("--quiver", strata.quiver, quiver_help)->required();
  sc_strata->add_option("--max-length", strata.max_length, "only types with at most this many parts (0: all)");
  sc_strata->add_option("--out", strata.out, "output JSON (default: stdout)");

  PoincareOpts poincare;
  auto* sc_poincare = app.add_subcommand("poincare", "equivariant Poincare series of the semistable locus");
  sc_poincare->add_option("--quiver", poincare.quiver, quiver_help)->required();
  sc_poincare->add_option("--max-deg", poincare.max_deg, "truncation degree")->check(CLI::NonNegativeNumber);
  sc_poincare->add_flag("--no-memo", poincare.no_memo, "disable the recursion cache");
  sc_poincare->add_option("--out", poincare.out, "output JSON (default: stdout)");
  sc_poincare->add_option("--csv", poincare.csv, "also write degree,coefficient CSV");

  SigmaOpts sigma_o;
  auto* sc_sigma = app.add_subcommand("sigma", "sigma distance between two group flows started g0 apart");
  sc_sigma->add_option("--quiver", sigma_o.quiver, quiver_help)->required();
  sc_sigma->add_option("--seed", sigma_o.seed, "seed (mt19937_64) for A0 and g0");
  sc_sigma->add_option("--g0", sigma_o.g0, "identity | unitary | random");
  sc_sigma->add_option("--tol", sigma_o.tol, "stop when |grad f| < tol");
  sc_sigma->add_option("--max-t", sigma_o.max_t, "time horizon");
  sc_sigma->add_option("--stride", sigma_o.stride, "record every n-th accepted step");
  sc_sigma->add_option("--out", sigma_o.out, "CSV path (default: stdout)");

  HkOpts hk;
  auto* sc_hk = app.add_subcommand("hkflow", "flow on the doubled quiver from a point of Phi_C = 0");
  sc_hk->add_option("--quiver", hk.quiver, quiver_help)->required();
  sc_hk->add_option("--seed", hk.seed, "seed (mt19937_64) for the initial point");
  sc_hk->add_option("--tol", hk.tol, "stop when |grad f| < tol");
  sc_hk->add_option("--max-t", hk.max_t, "time horizon");
  sc_hk->add_option("--level-tol", hk.level_tol, "largest admissible |Phi_C| at the start");
  sc_hk->add_option("--stride", hk.stride, "record every n-th accepted step");
  sc_hk->add_flag("--no-gauge", hk.no_gauge, "start from (A, 0) without a random complex gauge");
  sc_hk->add_option("--out-traj", hk.out_traj, "trajectory CSV (default: stdout)");

  CheckgradOpts cg;
  auto* sc_cg = app.add_subcommand("checkgrad", "compare the analytic gradient with finite differences");
  sc_cg->add_option("--quiver", cg.quivers, quiver_help + " (repeatable; default: all builtins)");
  sc_cg->add_option("--trials", cg.trials, "random base points per quiver")->check(CLI::PositiveNumber);
  sc_cg->add_option("--directions", cg.directions, "random directions per point")->check(CLI::PositiveNumber);
  sc_cg->add_option("--seed", cg.seed, "seed (mt19937_64)");
  sc_cg->add_option("--threshold", cg.threshold, "fail when the maximum relative error reaches this");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try {
    app.parse(argv_rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    emit_error(err, "usage", e.what());
    return kExitInput;
  }

  try {
    if (sc_flow->parsed()) return cmd_flow(flow, out, err);
    if (sc_strata->parsed()) return cmd_strata(strata, out);
    if (sc_poincare->parsed()) return cmd_poincare(poincare, out, err);
    if (sc_sigma->parsed()) return cmd_sigma(sigma_o, out);
    if (sc_hk->parsed()) return cmd_hkflow(hk, out, err);
    if (sc_cg->parsed()) return cmd_checkgrad(cg, out);
  } catch (const Error& e) {
    emit_error(err, e.code(), e.what());
    return is_input_error(e.code()) ? kExitInput : kExitRuntime;
  } catch (const std::exception& e) {
    emit_error(err, "internal", e.what());
    return kExitRuntime;
  }
  return kExitInput;
}

}  // namespace qmorse::cli
