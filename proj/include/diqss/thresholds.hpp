#pragma once

// Root finding over the closed-form rate: detection-efficiency, channel-QBER,
// fidelity, coupling-efficiency, and fiber-distance thresholds, plus the
// parameter sweeps behind the published rate curves.

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "diqss/keyrate.hpp"

namespace diqss {

// Star topology: the source sits at the circumcenter of an equilateral
// triangle of users, a fiber arm of length d to each. Transmissivity follows
// the standard attenuation law 10^(-alpha*d/10).
struct FiberModel {
  double eta_d = 1.0;     // detector efficiency
  double eta_c = 1.0;     // coupling efficiency
  double alpha = 0.2;     // attenuation, dB/km
  double distance_km = 0; // source-to-user arm length d

  FiberModel with_distance(double d) const {
    FiberModel m = *this;
    m.distance_km = d;
    return m;
  }
  FiberModel with_coupling(double eta_c_value) const {
    FiberModel m = *this;
    m.eta_c = eta_c_value;
    return m;
  }
};

// Throws std::domain_error unless efficiencies lie in [0,1], alpha > 0, d >= 0.
void validate_fiber(const FiberModel& m);

// eta = 10^(-alpha*d/10) * eta_d * eta_c
double global_efficiency(const FiberModel& m);

// Pairwise user separation: sqrt(3) * d for the equilateral star geometry.
double user_distance(double arm_km);

// FlipProb is sweepable only; threshold solving targets the first five.
enum class ThresholdVar { Eta, Delta, Fidelity, Distance, Coupling, FlipProb };
const char* threshold_var_name(ThresholdVar var);
ThresholdVar threshold_var_from_name(const std::string& name);

struct Bracket {
  double lo;
  double hi;
};

struct ThresholdResult {
  ThresholdVar variable;
  double value;
  Bracket bracket;      // bracket actually bisected (after any widening)
  double residual_rate; // rate at value; |residual| is at float resolution
  int iterations;
  bool widened; // initial bracket had no sign change and was widened once
};

struct NoThresholdError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bisection on the sign change of `rate`. The caller's tol bounds the final
// bracket width; iteration continues to floating-point exhaustion so the
// residual rate is pinned near machine precision. When both endpoints have
// the same rate sign the bracket is widened once to `limit`; if the sign
// still does not change, throws NoThresholdError. The returned value is the
// endpoint of the final bracket on the nonnegative-rate side.
ThresholdResult solve_threshold(ThresholdVar var,
                                const std::function<double(double)>& rate,
                                Bracket bracket, Bracket limit,
                                double tol = 1e-7);

// Fidelity of the white-noise state whose plain-protocol channel QBER at
// efficiency eta equals delta: F = (2 - 2*delta - eta^3) / eta^3.
double fidelity_for_delta(double delta, double eta);

// Rate as a function of the channel QBER with the fidelity linked as above;
// preprocessing (if configured) applies on top of the channel QBER.
RateBreakdown rate_at_delta(double delta, double eta,
                            const StrategyConfig& strategy,
                            SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);

// Single-variable thresholds. Each fixes the remaining parameters from
// `base` (and `fiber` where relevant) and solves rate = 0 over a documented
// default bracket, widening once if needed.
ThresholdResult efficiency_threshold(
    const ProtocolParams& base,
    SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);
ThresholdResult qber_threshold(
    const StrategyConfig& strategy, double eta = 1.0,
    SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);
ThresholdResult fidelity_threshold(
    const ProtocolParams& base,
    SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);
ThresholdResult distance_threshold(
    const ProtocolParams& base, const FiberModel& fiber,
    SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);
ThresholdResult coupling_threshold(
    const ProtocolParams& base, const FiberModel& fiber,
    SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);

struct ThresholdSuite {
  ThresholdResult eta;      // minimal global detection efficiency
  ThresholdResult delta;    // maximal channel QBER (fidelity-linked, at base.eta)
  ThresholdResult fidelity; // minimal fidelity (at base.eta)
  ThresholdResult coupling; // minimal coupling efficiency (fiber, at fiber d)
  ThresholdResult distance; // maximal fiber arm length
  double user_distance_km;  // sqrt(3) * distance.value
};

ThresholdSuite threshold_suite(
    const ProtocolParams& base, const FiberModel& fiber,
    SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);

// Imperfect-source report for per-emission fidelity F_s: the minimal white
// noise fidelity F* keeping the composed QBER below the channel-QBER
// threshold at eta = 1, the corresponding white-noise tolerance (1 - F*)/2,
// and the maximal fiber arm. The distance is computed with the composition
// entering the QBER only (the Bell value keeps the raw fidelity), matching
// the published distance curves; the flag records that convention.
struct ImperfectSourceReport {
  double source_fidelity;
  double q;                  // flip probability used for the thresholds
  double delta_threshold;    // channel-QBER threshold backing F*
  double fidelity_threshold; // F* = (1/2 - delta*) / (F_s - 1/2)
  double max_white_noise;    // (1 - F*) / 2
  double distance_km;
  double user_distance_km;
  bool distance_qber_only_convention; // always true, echoed in reports
};

ImperfectSourceReport imperfect_source_report(double source_fidelity, double q,
                                              const FiberModel& fiber);

// Sweeps: evaluate the rate on a uniform grid for one or more labeled
// parameter sets. For Delta sweeps the fidelity is linked per
// fidelity_for_delta at each series' eta.
struct SweepSeries {
  std::string label;
  ProtocolParams params;
  SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere;
};

struct SweepSpec {
  ThresholdVar var;
  double from = 0;
  double to = 1;
  int steps = 100; // intervals; steps + 1 grid points
  std::vector<SweepSeries> series;
  FiberModel fiber; // used for Distance and Coupling sweeps
};

struct SweepTable {
  ThresholdVar var;
  std::vector<std::string> labels;
  std::vector<double> x;
  std::vector<std::vector<RateBreakdown>> cells; // [point][series]
};

SweepTable sweep(const SweepSpec& spec);

} // namespace diqss
