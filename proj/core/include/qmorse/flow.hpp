#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "qmorse/error.hpp"
#include "qmorse/repspace.hpp"

namespace qmorse {

struct FlowConfig {
  double grad_tol = 1e-8;      ///< stop once ||grad f|| < grad_tol
  double max_time = 1e4;
  double initial_step = 1e-2;
  double min_step = 1e-12;
  double max_step = 5.0;
  double safety = 0.9;
  double rtol = 1e-13;         ///< local error tolerances of the embedded pair
  double atol = 1e-15;
  int sample_stride = 1;       ///< record every n-th accepted step
  std::uint64_t seed = 0;      ///< for callers that sample initial data
  std::size_t max_steps = 5'000'000;

  /// Throws Error("invalid_config").
  void validate() const;
};

struct FlowSample {
  double t = 0;
  double f = 0;
  double grad_norm = 0;
  std::optional<double> sigma;
  std::optional<double> phi_c_norm;
};

struct FlowResult {
  Representation final;
  double f = 0;
  double grad_norm = 0;
  double time = 0;
  bool converged = false;
  std::vector<FlowSample> trajectory;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  /// Largest f(A_{n+1}) - f(A_n) over accepted steps (<= 0 up to rounding).
  double max_f_increase = 0;
};

/// Raised when the step size falls below min_step without an accepted step.
class StepUnderflow : public Error {
 public:
  StepUnderflow(const std::string& message, Representation last_state, double t)
      : Error("step_underflow", message), last_state_(std::move(last_state)), t_(t) {}
  const Representation& last_state() const noexcept { return last_state_; }
  double time() const noexcept { return t_; }

 private:
  Representation last_state_;
  double t_;
};

/// Called on every recorded sample; may fill the optional columns.
using SampleObserver = std::function<void(FlowSample&, const Representation&)>;

/// Integrates dA/dt = -grad f from A0.
///
/// The stepper is the Dormand-Prince 5(4) pair written in Munthe-Kaas form:
/// each stage evaluates the Hermitian generator xi = 2H at an orbit point and
/// the update is A <- exp(Theta) . A with Theta in g_C, so every iterate lies on
/// the G_C-orbit of A0 up to rounding. Steps that increase f are rejected.
FlowResult integrate_flow(const Quiver& q, const Representation& A0, const StabilityParam& a,
                          const FlowConfig& cfg, const SampleObserver& observer = {});

struct GaugeSample {
  double t = 0;
  GaugeElement g;
};

struct GroupFlowResult {
  FlowResult flow;
  GaugeElement g;          ///< g(T)
  GaugeElement g_inverse;  ///< g(T)^{-1}, propagated alongside g
  std::vector<GaugeSample> gauge_curve;
  /// max over samples of ||g(t) . A0 - A(t)||.
  double max_drift = 0;
  /// max over steps of ||Theta - Theta^*|| / (2 ||Theta||). The step generator
  /// picks up skew commutator terms of order dt; dg/dt g^{-1} itself is Hermitian.
  double max_generator_skew = 0;
  bool drift_warning = false;
};

/// Co-integrates g(t) with dg/dt g^{-1} = 2i(Phi(g . A0) - alpha), g(0) = id,
/// using the same step generators as integrate_flow.
GroupFlowResult integrate_group_flow(const Quiver& q, const Representation& A0, const StabilityParam& a,
                                     const FlowConfig& cfg, double drift_tol = 1e-6,
                                     bool record_gauge = false, const SampleObserver& observer = {});

/// sigma(h) = tr h + tr h^{-1} - 2 rank for positive-definite Hermitian blocks.
/// Throws Error("not_positive_definite").
double sigma(const Blocks& h, int rank);

struct SigmaTrace {
  std::vector<std::pair<double, double>> samples;  ///< (t, sigma)
  double max_increase = 0;                          ///< max forward difference
  double max_value = 0;
  GaugeElement g1;
  GaugeElement g2;
  std::vector<GaugeSample> g1_curve;
  std::vector<GaugeSample> g2_curve;
  FlowResult flow1;
  FlowResult flow2;
};

/// Runs the group flow from A0 and from g0 . A0 with shared time steps and
/// samples sigma(h(t)), h = gbar^{-1} (gbar^*)^{-1}, gbar = g2 g0 g1^{-1}.
SigmaTrace paired_flow_sigma(const Quiver& q, const Representation& A0, const GaugeElement& g0,
                             const StabilityParam& a, const FlowConfig& cfg, bool record_gauge = false);

}  // namespace qmorse
