#include "qmorse/flow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include <complex>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace qmorse {

void FlowConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error("invalid_config", msg); };
  if (!(grad_tol > 0)) fail("grad_tol must be positive");
  if (!(min_step > 0 && min_step <= initial_step && initial_step <= max_step)) {
    fail("need 0 < min_step <= initial_step <= max_step");
  }
  if (!(max_time > 0)) fail("max_time must be positive");
  if (!(safety > 0 && safety <= 1)) fail("safety must lie in (0, 1]");
  if (!(rtol > 0 && atol > 0)) fail("rtol and atol must be positive");
  if (sample_stride < 1) fail("sample_stride must be >= 1");
}

namespace {

// The engine runs in extended precision. Integration error stays on the
// G_C-orbit, so rounding is the only source of drift off a (saddle) stratum;
// the extra digits delay its exponential growth near non-minimal critical sets.
using LComplex = std::complex<long double>;
using LMatrix = Eigen::Matrix<LComplex, Eigen::Dynamic, Eigen::Dynamic>;
using LBlocks = std::vector<LMatrix>;
using LArrows = std::vector<LMatrix>;

// Dormand-Prince 5(4) tableau.
constexpr int kStages = 7;
constexpr std::array<std::array<long double, 6>, kStages> kA{{
    {{0, 0, 0, 0, 0, 0}},
    {{1.0L / 5, 0, 0, 0, 0, 0}},
    {{3.0L / 40, 9.0L / 40, 0, 0, 0, 0}},
    {{44.0L / 45, -56.0L / 15, 32.0L / 9, 0, 0, 0}},
    {{19372.0L / 6561, -25360.0L / 2187, 64448.0L / 6561, -212.0L / 729, 0, 0}},
    {{9017.0L / 3168, -355.0L / 33, 46732.0L / 5247, 49.0L / 176, -5103.0L / 18656, 0}},
    {{35.0L / 384, 0, 500.0L / 1113, 125.0L / 192, -2187.0L / 6784, 11.0L / 84}},
}};
constexpr std::array<long double, kStages> kB4{5179.0L / 57600, 0,          7571.0L / 16695, 393.0L / 640,
                                               -92097.0L / 339200, 187.0L / 2100, 1.0L / 40};

constexpr double kNoConditionBound = std::numeric_limits<double>::infinity();

// f may not rise by more than this relative amount on an accepted step.
constexpr long double kMonotoneSlack = 1e-14L;

struct Problem {
  const Quiver& q;
  DimVector dims;
  std::vector<long double> a;
};

struct Eval {
  LBlocks xi;  // 2H, the Hermitian flow generator
  long double f = 0;
  long double grad_norm = 0;
};

LArrows widen(const Representation& A) {
  LArrows out;
  for (const auto& m : A.arrows()) out.push_back(m.cast<LComplex>());
  return out;
}

Blocks narrow(const LBlocks& b) {
  Blocks out;
  for (const auto& m : b) out.push_back(m.cast<Complex>());
  return out;
}

Representation narrow(const Problem& p, const LArrows& Y) {
  std::vector<Matrix> arrows;
  for (const auto& m : Y) arrows.push_back(m.cast<Complex>());
  return Representation(p.q, p.dims, std::move(arrows));
}

LBlocks identity_blocks(const DimVector& dims) {
  LBlocks b;
  for (std::size_t l = 0; l < dims.size(); ++l) b.push_back(LMatrix::Identity(dims[l], dims[l]));
  return b;
}

long double squared_norm(const LMatrix& m) {
  long double s = 0;
  for (Eigen::Index k = 0; k < m.size(); ++k) s += std::norm(m(k));
  return s;
}

// rho(Y, u)_a = u_in Y_a - Y_a u_out
LArrows rho_l(const Problem& p, const LArrows& Y, const LBlocks& u) {
  LArrows out(Y.size());
  for (std::size_t a = 0; a < Y.size(); ++a) {
    const auto& e = p.q.edge(a);
    out[a] = u[e.in] * Y[a] - Y[a] * u[e.out];
  }
  return out;
}

Eval evaluate(const Problem& p, const LArrows& Y) {
  Eval e;
  e.xi = LBlocks(p.dims.size());
  for (std::size_t l = 0; l < p.dims.size(); ++l) e.xi[l] = LMatrix::Zero(p.dims[l], p.dims[l]);
  for (std::size_t a = 0; a < Y.size(); ++a) {
    const auto& edge = p.q.edge(a);
    e.xi[edge.in] -= Y[a] * Y[a].adjoint();
    e.xi[edge.out] += Y[a].adjoint() * Y[a];
  }
  // xi = 2H = -(sum_in A A^* - sum_out A^* A) - 2a
  for (std::size_t l = 0; l < p.dims.size(); ++l) {
    e.xi[l].diagonal().array() -= LComplex(2 * p.a[l], 0);
    e.f += squared_norm(e.xi[l]) / 4;
  }
  long double g2 = 0;
  for (const auto& m : rho_l(p, Y, e.xi)) g2 += squared_norm(m);
  e.grad_norm = std::sqrt(g2);
  return e;
}

// Truncated inverse derivative of exp: xi - [theta, xi]/2 + [theta, [theta, xi]]/12.
LBlocks dexpinv(const LBlocks& theta, const LBlocks& xi) {
  LBlocks out(xi.size());
  for (std::size_t l = 0; l < xi.size(); ++l) {
    if (xi[l].size() == 0) {
      out[l] = xi[l];
      continue;
    }
    const LMatrix c1 = theta[l] * xi[l] - xi[l] * theta[l];
    const LMatrix c2 = theta[l] * c1 - c1 * theta[l];
    out[l] = xi[l] - 0.5L * c1 + (1.0L / 12.0L) * c2;
  }
  return out;
}

LBlocks exp_blocks(const LBlocks& theta, long double sign) {
  LBlocks out;
  for (const auto& t : theta) out.push_back(t.size() == 0 ? t : LMatrix((sign * t).exp()));
  return out;
}

LArrows apply(const Problem& p, const LBlocks& fwd, const LBlocks& bwd, const LArrows& Y) {
  LArrows out(Y.size());
  for (std::size_t a = 0; a < Y.size(); ++a) {
    const auto& e = p.q.edge(a);
    out[a] = fwd[e.in] * Y[a] * bwd[e.out];
  }
  return out;
}

long double error_norm(const LArrows& err, const LArrows& y0, const LArrows& y1, const FlowConfig& cfg) {
  long double sum = 0;
  std::size_t count = 0;
  for (std::size_t a = 0; a < err.size(); ++a) {
    for (Eigen::Index k = 0; k < err[a].size(); ++k) {
      const long double scale = cfg.atol + cfg.rtol * std::max(std::abs(y0[a](k)), std::abs(y1[a](k)));
      const long double r = std::abs(err[a](k)) / scale;
      sum += r * r;
      ++count;
    }
  }
  return count == 0 ? 0.0L : std::sqrt(sum / static_cast<long double>(count));
}

struct EngineState {
  const Representation& Y;
  const LBlocks* g;
  const LBlocks* g_inv;
};

using EngineHook = std::function<void(FlowSample&, const EngineState&)>;

struct EngineOutput {
  FlowResult flow;
  LBlocks g;
  LBlocks g_inv;
  double max_generator_skew = 0;
};

EngineOutput run_engine(const Quiver& q, const Representation& A0, const StabilityParam& a,
                        const FlowConfig& cfg, bool track_gauge, const EngineHook& hook) {
  cfg.validate();
  A0.validate(q);
  if (a.size() != q.vertex_count()) throw Error("dimension_mismatch", "stability parameter length mismatch");

  Problem p{q, A0.dims(), {}};
  for (const auto& r : a.values()) {
    p.a.push_back(static_cast<long double>(r.numerator()) / static_cast<long double>(r.denominator()));
  }

  EngineOutput out;
  FlowResult& res = out.flow;
  if (track_gauge) {
    out.g = identity_blocks(p.dims);
    out.g_inv = out.g;
  }

  LArrows Y = widen(A0);
  Eval cur = evaluate(p, Y);
  long double t = 0;
  long double h = cfg.initial_step;
  std::size_t since_sample = 0;

  auto record = [&](bool force) {
    if (!force && since_sample < static_cast<std::size_t>(cfg.sample_stride)) return;
    since_sample = 0;
    FlowSample s{static_cast<double>(t), static_cast<double>(cur.f), static_cast<double>(cur.grad_norm),
                 std::nullopt, std::nullopt};
    if (hook) {
      const Representation Yd = narrow(p, Y);
      hook(s, EngineState{Yd, track_gauge ? &out.g : nullptr, track_gauge ? &out.g_inv : nullptr});
    }
    res.trajectory.push_back(s);
  };
  record(true);

  std::array<LBlocks, kStages> K;
  while (true) {
    if (cur.grad_norm < cfg.grad_tol) {
      res.converged = true;
      break;
    }
    if (t >= cfg.max_time || res.accepted_steps >= cfg.max_steps) break;

    h = std::min({h, static_cast<long double>(cfg.max_step), static_cast<long double>(cfg.max_time) - t});
    K[0] = cur.xi;
    LArrows Y_new;
    Eval next;
    LBlocks theta, fwd, bwd;
    bool accepted = false;

    while (!accepted) {
      for (int i = 1; i < kStages; ++i) {
        theta = K[0];
        for (auto& blk : theta) blk *= h * kA[i][0];
        for (int j = 1; j < i; ++j) {
          if (kA[i][j] == 0) continue;
          for (std::size_t l = 0; l < theta.size(); ++l) theta[l] += (h * kA[i][j]) * K[j][l];
        }
        fwd = exp_blocks(theta, 1);
        bwd = exp_blocks(theta, -1);
        LArrows Yi = apply(p, fwd, bwd, Y);
        Eval ei = evaluate(p, Yi);
        K[i] = dexpinv(theta, ei.xi);
        if (i == kStages - 1) {
          Y_new = std::move(Yi);
          next = std::move(ei);
        }
      }
      // theta now holds the fifth-order increment (last tableau row equals b).
      LBlocks err_theta = theta;
      for (int i = 0; i < kStages; ++i) {
        if (kB4[i] == 0) continue;
        for (std::size_t l = 0; l < err_theta.size(); ++l) err_theta[l] -= (h * kB4[i]) * K[i][l];
      }
      const long double err = error_norm(rho_l(p, Y, err_theta), Y, Y_new, cfg);
      const bool monotone = next.f <= cur.f + kMonotoneSlack * (1 + cur.f);
      const bool finite = std::isfinite(next.f) && std::isfinite(err);

      if (finite && err <= 1 && monotone) {
        accepted = true;
        res.max_f_increase = std::max(res.max_f_increase, static_cast<double>(next.f - cur.f));
        if (track_gauge) {
          for (std::size_t l = 0; l < out.g.size(); ++l) {
            if (out.g[l].size() == 0) continue;
            out.g[l] = fwd[l] * out.g[l];
            out.g_inv[l] = out.g_inv[l] * bwd[l];
            const long double tn = std::sqrt(squared_norm(theta[l]));
            const double skew =
                tn == 0 ? 0.0 : static_cast<double>(std::sqrt(squared_norm(theta[l] - theta[l].adjoint())) / (2 * tn));
            out.max_generator_skew = std::max(out.max_generator_skew, skew);
          }
        }
        t += h;
        Y = std::move(Y_new);
        cur = std::move(next);
        ++res.accepted_steps;
        ++since_sample;
        const long double grow =
            err == 0 ? 5.0L : std::clamp(static_cast<long double>(cfg.safety) * std::pow(err, -0.2L), 0.2L, 5.0L);
        h *= grow;
      } else {
        ++res.rejected_steps;
        if (finite && err > 1) {
          h *= std::clamp(static_cast<long double>(cfg.safety) * std::pow(err, -0.2L), 0.1L, 0.9L);
        } else {
          h *= 0.5L;
        }
        if (!(h >= cfg.min_step)) {
          throw StepUnderflow("step size fell below min_step at t = " + std::to_string(static_cast<double>(t)),
                              narrow(p, Y), static_cast<double>(t));
        }
      }
    }
    record(false);
  }

  if (res.trajectory.empty() || res.trajectory.back().t != static_cast<double>(t) || since_sample != 0) {
    since_sample = static_cast<std::size_t>(cfg.sample_stride);
    record(true);
  }
  res.final = narrow(p, Y);
  res.f = static_cast<double>(cur.f);
  res.grad_norm = static_cast<double>(cur.grad_norm);
  res.time = static_cast<double>(t);
  return out;
}

}  // namespace

FlowResult integrate_flow(const Quiver& q, const Representation& A0, const StabilityParam& a,
                          const FlowConfig& cfg, const SampleObserver& observer) {
  EngineHook hook;
  if (observer) hook = [&](FlowSample& s, const EngineState& st) { observer(s, st.Y); };
  return run_engine(q, A0, a, cfg, false, hook).flow;
}

GroupFlowResult integrate_group_flow(const Quiver& q, const Representation& A0, const StabilityParam& a,
                                     const FlowConfig& cfg, double drift_tol, bool record_gauge,
                                     const SampleObserver& observer) {
  GroupFlowResult out;
  const DimVector& dims = A0.dims();
  const LArrows A0l = widen(A0);
  auto hook = [&](FlowSample& s, const EngineState& st) {
    Representation tracked(A0);
    for (std::size_t e = 0; e < q.edge_count(); ++e) {
      const auto& edge = q.edge(e);
      tracked.arrow(e) = ((*st.g)[edge.in] * A0l[e] * (*st.g_inv)[edge.out]).cast<Complex>();
    }
    out.max_drift = std::max(out.max_drift, (tracked - st.Y).norm());
    if (record_gauge) out.gauge_curve.push_back({s.t, GaugeElement(dims, narrow(*st.g), false, kNoConditionBound)});
    if (observer) observer(s, st.Y);
  };
  EngineOutput eo = run_engine(q, A0, a, cfg, true, hook);
  out.flow = std::move(eo.flow);
  out.g = GaugeElement(dims, narrow(eo.g), false, kNoConditionBound);
  out.g_inverse = GaugeElement(dims, narrow(eo.g_inv), false, kNoConditionBound);
  out.max_generator_skew = eo.max_generator_skew;
  out.drift_warning = out.max_drift > drift_tol;
  return out;
}

double sigma(const Blocks& h, int rank) {
  double s = 0;
  int total = 0;
  for (const auto& b : h) {
    if (b.size() == 0) continue;
    if ((b - b.adjoint()).norm() > 1e-8 * std::max(1.0, b.norm())) {
      throw Error("not_positive_definite", "sigma: block is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(b, Eigen::EigenvaluesOnly);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const double mu = es.eigenvalues()(i);
      if (!(mu > 0)) throw Error("not_positive_definite", "sigma: block is not positive definite");
      // mu + 1/mu - 2 written without cancellation.
      s += (mu - 1.0) * (mu - 1.0) / mu;
      ++total;
    }
  }
  if (rank != total) throw Error("dimension_mismatch", "sigma: rank does not match block sizes");
  return s;
}

namespace {

Quiver disjoint_double(const Quiver& q) {
  std::vector<std::string> names;
  for (const auto& n : q.vertices()) names.push_back("a:" + n);
  for (const auto& n : q.vertices()) names.push_back("b:" + n);
  std::vector<Edge> edges(q.edges());
  const std::size_t n = q.vertex_count();
  for (const auto& e : q.edges()) edges.push_back({e.out + n, e.in + n});
  return Quiver(std::move(names), std::move(edges));
}

}  // namespace

SigmaTrace paired_flow_sigma(const Quiver& q, const Representation& A0, const GaugeElement& g0,
                             const StabilityParam& a, const FlowConfig& cfg, bool record_gauge) {
  A0.validate(q);
  const DimVector& v = A0.dims();
  const std::size_t nv = q.vertex_count();
  const std::size_t ne = q.edge_count();
  const Representation A2 = act(q, g0, A0);

  const Quiver qq = disjoint_double(q);
  std::vector<int> dd(v.values());
  dd.insert(dd.end(), v.values().begin(), v.values().end());
  const DimVector vv(dd);
  std::vector<Rational> aa(a.values());
  aa.insert(aa.end(), a.values().begin(), a.values().end());
  const StabilityParam pa = StabilityParam::unchecked(aa);

  std::vector<Matrix> arrows(A0.arrows().begin(), A0.arrows().end());
  arrows.insert(arrows.end(), A2.arrows().begin(), A2.arrows().end());
  const Representation joint(qq, vv, std::move(arrows));

  auto split = [&](const Representation& Y, bool second) {
    std::vector<Matrix> part(Y.arrows().begin() + (second ? ne : 0),
                             Y.arrows().begin() + (second ? 2 * ne : ne));
    return Representation(q, v, std::move(part));
  };

  SigmaTrace trace;
  auto hook = [&](FlowSample& s, const EngineState& st) {
    Blocks h_inv(nv);
    for (std::size_t l = 0; l < nv; ++l) {
      const LMatrix gbar = (*st.g)[nv + l] * g0.block(l).cast<LComplex>() * (*st.g_inv)[l];
      h_inv[l] = (gbar.adjoint() * gbar).cast<Complex>();
    }
    const double sg = sigma(h_inv, v.rank());
    s.sigma = sg;
    if (!trace.samples.empty()) trace.max_increase = std::max(trace.max_increase, sg - trace.samples.back().second);
    trace.max_value = std::max(trace.max_value, sg);
    trace.samples.emplace_back(s.t, sg);

    for (int k = 0; k < 2; ++k) {
      const Representation Yk = split(st.Y, k == 1);
      FlowResult& fr = k == 0 ? trace.flow1 : trace.flow2;
      fr.trajectory.push_back({s.t, f_value(q, Yk, a), neg_gradient(q, Yk, a).norm(), sg, std::nullopt});
    }
    if (record_gauge) {
      const Blocks g = narrow(*st.g);
      trace.g1_curve.push_back({s.t, GaugeElement(v, Blocks(g.begin(), g.begin() + nv), false, kNoConditionBound)});
      trace.g2_curve.push_back({s.t, GaugeElement(v, Blocks(g.begin() + nv, g.end()), false, kNoConditionBound)});
    }
  };

  EngineOutput eo = run_engine(qq, joint, pa, cfg, true, hook);
  for (int k = 0; k < 2; ++k) {
    FlowResult& fr = k == 0 ? trace.flow1 : trace.flow2;
    fr.final = split(eo.flow.final, k == 1);
    fr.f = f_value(q, fr.final, a);
    fr.grad_norm = neg_gradient(q, fr.final, a).norm();
    fr.time = eo.flow.time;
    fr.converged = eo.flow.converged;
    fr.accepted_steps = eo.flow.accepted_steps;
    fr.rejected_steps = eo.flow.rejected_steps;
  }
  const Blocks g = narrow(eo.g);
  trace.g1 = GaugeElement(v, Blocks(g.begin(), g.begin() + nv), false, kNoConditionBound);
  trace.g2 = GaugeElement(v, Blocks(g.begin() + nv, g.end()), false, kNoConditionBound);
  return trace;
}

}  // namespace qmorse
