#include "diqss/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace diqss {

namespace {

constexpr Bracket kEtaBracket{0.90, 1.0};
constexpr Bracket kEtaLimit{0.50, 1.0};
constexpr Bracket kDeltaBracketHi{0.0, 0.12}; // lo adjusted per eta
constexpr double kDeltaLimitHi = 0.45;
constexpr Bracket kFidelityBracket{0.80, 1.0};
constexpr Bracket kFidelityLimit{0.50, 1.0};
constexpr Bracket kDistanceBracket{0.0, 5.0};
constexpr Bracket kDistanceLimit{0.0, 25.0};
constexpr Bracket kCouplingBracket{0.90, 1.0};
constexpr Bracket kCouplingLimit{0.50, 1.0};

std::string bracket_str(const Bracket& b) {
  std::ostringstream os;
  os << "[" << b.lo << ", " << b.hi << "]";
  return os.str();
}

} // namespace

void validate_fiber(const FiberModel& m) {
  if (!(m.eta_d >= 0.0 && m.eta_d <= 1.0)) {
    throw std::domain_error("detector efficiency must lie in [0, 1]");
  }
  if (!(m.eta_c >= 0.0 && m.eta_c <= 1.0)) {
    throw std::domain_error("coupling efficiency must lie in [0, 1]");
  }
  if (!(m.alpha > 0.0)) {
    throw std::domain_error("fiber attenuation must be positive");
  }
  if (!(m.distance_km >= 0.0)) {
    throw std::domain_error("fiber distance must be nonnegative");
  }
}

double global_efficiency(const FiberModel& m) {
  validate_fiber(m);
  const double transmissivity =
      std::pow(10.0, -m.alpha * m.distance_km / 10.0);
  return transmissivity * m.eta_d * m.eta_c;
}

double user_distance(double arm_km) {
  if (!(arm_km >= 0.0)) {
    throw std::domain_error("distance must be nonnegative");
  }
  return std::sqrt(3.0) * arm_km;
}

const char* threshold_var_name(ThresholdVar var) {
  switch (var) {
    case ThresholdVar::Eta: return "eta";
    case ThresholdVar::Delta: return "delta";
    case ThresholdVar::Fidelity: return "fidelity";
    case ThresholdVar::Distance: return "distance";
    case ThresholdVar::Coupling: return "eta_c";
    case ThresholdVar::FlipProb: return "q";
  }
  throw std::logic_error("unknown threshold variable");
}

ThresholdVar threshold_var_from_name(const std::string& name) {
  if (name == "eta") return ThresholdVar::Eta;
  if (name == "delta" || name == "qber") return ThresholdVar::Delta;
  if (name == "fidelity" || name == "F") return ThresholdVar::Fidelity;
  if (name == "distance" || name == "d") return ThresholdVar::Distance;
  if (name == "eta_c" || name == "coupling") return ThresholdVar::Coupling;
  if (name == "q") return ThresholdVar::FlipProb;
  throw std::domain_error("unknown variable '" + name +
                          "' (expected eta|delta|fidelity|distance|eta_c|q)");
}

ThresholdResult solve_threshold(ThresholdVar var,
                                const std::function<double(double)>& rate,
                                Bracket bracket, Bracket limit, double tol) {
  (void)tol; // bisection runs to float exhaustion, tighter than any tol
  if (!(bracket.lo < bracket.hi)) {
    throw NoThresholdError(std::string("empty bracket for ") +
                           threshold_var_name(var) + " " +
                           bracket_str(bracket));
  }
  double lo = bracket.lo;
  double hi = bracket.hi;
  double f_lo = rate(lo);
  double f_hi = rate(hi);
  const auto feasible = [](double f) { return f >= 0.0; };
  bool widened = false;
  if (feasible(f_lo) == feasible(f_hi)) {
    if (limit.lo < bracket.lo || limit.hi > bracket.hi) {
      lo = std::min(limit.lo, bracket.lo);
      hi = std::max(limit.hi, bracket.hi);
      f_lo = rate(lo);
      f_hi = rate(hi);
      widened = true;
    }
    if (feasible(f_lo) == feasible(f_hi)) {
      throw NoThresholdError(std::string("no rate sign change for ") +
                             threshold_var_name(var) + " in " +
                             bracket_str({lo, hi}));
    }
  }
  const Bracket searched{lo, hi};
  int iterations = 0;
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    const double f_mid = rate(mid);
    ++iterations;
    if (feasible(f_mid) == feasible(f_hi)) {
      hi = mid;
      f_hi = f_mid;
    } else {
      lo = mid;
      f_lo = f_mid;
    }
  }
  ThresholdResult out;
  out.variable = var;
  if (feasible(f_lo)) {
    out.value = lo;
    out.residual_rate = f_lo;
  } else {
    out.value = hi;
    out.residual_rate = f_hi;
  }
  out.bracket = searched;
  out.iterations = iterations;
  out.widened = widened;
  return out;
}

double fidelity_for_delta(double delta, double eta) {
  const double eta3 = eta * eta * eta;
  if (!(eta3 > 0.0)) {
    throw std::domain_error("eta must be positive for the fidelity link");
  }
  return (2.0 - 2.0 * delta - eta3) / eta3;
}

RateBreakdown rate_at_delta(double delta, double eta,
                            const StrategyConfig& strategy,
                            SourceNoiseMode mode) {
  double f = fidelity_for_delta(delta, eta);
  if (f > 1.0 && f < 1.0 + 1e-9) f = 1.0;
  if (f < 0.0 && f > -1e-9) f = 0.0;
  ProtocolParams params;
  params.fidelity = f;
  params.eta = eta;
  params.strategy = strategy;
  return key_rate(params, mode);
}

ThresholdResult efficiency_threshold(const ProtocolParams& base,
                                     SourceNoiseMode mode) {
  validate_params(base);
  const auto rate = [&](double x) {
    ProtocolParams p = base;
    p.eta = x;
    return key_rate(p, mode).rate;
  };
  return solve_threshold(ThresholdVar::Eta, rate, kEtaBracket, kEtaLimit);
}

ThresholdResult qber_threshold(const StrategyConfig& strategy, double eta,
                               SourceNoiseMode mode) {
  validate_strategy(strategy);
  const double eta3 = eta * eta * eta;
  const double lo = std::max(0.0, 1.0 - eta3);
  const auto rate = [&](double x) {
    return rate_at_delta(x, eta, strategy, mode).rate;
  };
  return solve_threshold(ThresholdVar::Delta, rate,
                         {lo, std::max(kDeltaBracketHi.hi, lo + 1e-6)},
                         {lo, kDeltaLimitHi});
}

ThresholdResult fidelity_threshold(const ProtocolParams& base,
                                   SourceNoiseMode mode) {
  validate_params(base);
  const auto rate = [&](double x) {
    ProtocolParams p = base;
    p.fidelity = x;
    return key_rate(p, mode).rate;
  };
  return solve_threshold(ThresholdVar::Fidelity, rate, kFidelityBracket,
                         kFidelityLimit);
}

ThresholdResult distance_threshold(const ProtocolParams& base,
                                   const FiberModel& fiber,
                                   SourceNoiseMode mode) {
  validate_params(base);
  validate_fiber(fiber);
  const auto rate = [&](double x) {
    ProtocolParams p = base;
    p.eta = global_efficiency(fiber.with_distance(x));
    return key_rate(p, mode).rate;
  };
  return solve_threshold(ThresholdVar::Distance, rate, kDistanceBracket,
                         kDistanceLimit);
}

ThresholdResult coupling_threshold(const ProtocolParams& base,
                                   const FiberModel& fiber,
                                   SourceNoiseMode mode) {
  validate_params(base);
  validate_fiber(fiber);
  const auto rate = [&](double x) {
    ProtocolParams p = base;
    p.eta = global_efficiency(fiber.with_coupling(x));
    return key_rate(p, mode).rate;
  };
  return solve_threshold(ThresholdVar::Coupling, rate, kCouplingBracket,
                         kCouplingLimit);
}

ThresholdSuite threshold_suite(const ProtocolParams& base,
                               const FiberModel& fiber, SourceNoiseMode mode) {
  ThresholdSuite suite{
      efficiency_threshold(base, mode),
      qber_threshold(base.strategy, base.eta, mode),
      fidelity_threshold(base, mode),
      coupling_threshold(base, fiber, mode),
      distance_threshold(base, fiber, mode),
      0.0,
  };
  suite.user_distance_km = user_distance(suite.distance.value);
  return suite;
}

ImperfectSourceReport imperfect_source_report(double source_fidelity, double q,
                                              const FiberModel& fiber) {
  if (!(source_fidelity > 0.5 && source_fidelity <= 1.0)) {
    throw std::domain_error("source fidelity must lie in (0.5, 1]");
  }
  StrategyConfig strategy{StrategyKind::Advanced, q};
  validate_strategy(strategy);

  ImperfectSourceReport report;
  report.source_fidelity = source_fidelity;
  report.q = q;
  report.delta_threshold = qber_threshold(strategy, 1.0).value;
  report.fidelity_threshold =
      (0.5 - report.delta_threshold) / (source_fidelity - 0.5);
  if (report.fidelity_threshold > 1.0) {
    throw NoThresholdError(
        "source fidelity too low: no white-noise fidelity keeps the composed "
        "error rate below threshold");
  }
  report.max_white_noise = 0.5 * (1.0 - report.fidelity_threshold);

  ProtocolParams params;
  params.fidelity = 1.0;
  params.source_fidelity = source_fidelity;
  params.strategy = strategy;
  report.distance_km =
      distance_threshold(params, fiber, SourceNoiseMode::QberOnly).value;
  report.user_distance_km = user_distance(report.distance_km);
  report.distance_qber_only_convention = true;
  return report;
}

SweepTable sweep(const SweepSpec& spec) {
  if (spec.steps < 1) {
    throw std::domain_error("sweep needs at least one step");
  }
  if (spec.series.empty()) {
    throw std::domain_error("sweep needs at least one series");
  }
  SweepTable table;
  table.var = spec.var;
  for (const auto& s : spec.series) table.labels.push_back(s.label);
  table.x.resize(spec.steps + 1);
  table.cells.resize(spec.steps + 1);
  for (int i = 0; i <= spec.steps; ++i) {
    const double x =
        spec.from + (spec.to - spec.from) * static_cast<double>(i) /
                        static_cast<double>(spec.steps);
    table.x[i] = x;
    table.cells[i].reserve(spec.series.size());
    for (const auto& s : spec.series) {
      ProtocolParams p = s.params;
      switch (spec.var) {
        case ThresholdVar::Eta:
          p.eta = x;
          break;
        case ThresholdVar::Delta: {
          table.cells[i].push_back(rate_at_delta(x, p.eta, p.strategy, s.mode));
          continue;
        }
        case ThresholdVar::Fidelity:
          p.fidelity = x;
          break;
        case ThresholdVar::Distance:
          p.eta = global_efficiency(spec.fiber.with_distance(x));
          break;
        case ThresholdVar::Coupling:
          p.eta = global_efficiency(spec.fiber.with_coupling(x));
          break;
        case ThresholdVar::FlipProb:
          p.strategy.q = x;
          break;
      }
      table.cells[i].push_back(key_rate(p, s.mode));
    }
  }
  return table;
}

} // namespace diqss
