#pragma once

// Closed-form asymptotic key rate for the three-party protocol.
//
// The rate is a Devetak-Winter difference: a bound on the eavesdropper's
// information derived from the conditioned two-party Bell value, minus the
// error-correction cost h(QBER). Strategies change both terms:
//
//   none        delta   = 1 - eta^3/2 - eta^3*F/2,   S = 2*sqrt(2)*eta^3*F
//   preprocess  delta_q = q + (1-2q)*delta,          S unchanged, Eve term
//               gains back h(.) through the flip-noise argument
//   postselect  delta_p = (1-F)*eta^3/2 + 1.5*eta*(1-eta)
//               S_p     = 2*sqrt(2)*eta^3*F + 2*(1-eta)^3
//   advanced    postselect then preprocess
//
// F above is the effective fidelity. An imperfect source (fidelity F_s per
// pair) composes with white noise as F_eff = F*(2*F_s - 1). SourceNoiseMode
// selects whether that composition also enters the Bell value or only the
// QBER (the latter matches published distance curves for imperfect sources
// and is reported with a flag).

#include "diqss/strategies.hpp"

namespace diqss {

inline constexpr double kClassicalChsh = 2.0;
inline constexpr double kQuantumChsh = 2.8284271247461903; // 2*sqrt(2)
inline constexpr double kSuperQuantumTol = 1e-9;

struct ProtocolParams {
  double fidelity = 1.0;        // weight of the GHZ state vs white noise
  double source_fidelity = 1.0; // per-emission fidelity of the source
  double eta = 1.0;             // per-party detection efficiency
  StrategyConfig strategy;
};

// Throws std::domain_error on out-of-range fields. fidelity and eta must lie
// in [0, 1]; source_fidelity in [0.5, 1]; strategy per validate_strategy.
void validate_params(const ProtocolParams& params);

enum class SourceNoiseMode {
  ComposedEverywhere, // F_eff enters QBER and Bell value alike
  QberOnly,           // F_eff enters QBER only; Bell value keeps raw fidelity
};

// Shannon entropy of a bit, in bits. Domain [0, 1]; 0 at the endpoints.
double binary_entropy(double x);

// QBER of the key rounds after the configured strategy.
double qber(const ProtocolParams& params,
            SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);

// Conditioned two-party Bell value (half the three-party combination).
double chsh_value(const ProtocolParams& params,
                  SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);

struct EveBound {
  double bits;   // bound on key bits safe from the eavesdropper
  bool nonlocal; // whether chsh exceeded the classical bound
};

// 1 - h(1/2 + 1/2*sqrt(chsh^2/4 - 1)). Below the classical bound the result
// is 0 with nonlocal=false; above the quantum bound (plus kSuperQuantumTol)
// throws std::domain_error.
EveBound eve_bound(double chsh);

// Preprocessing variant: the flip costs Eve
//   1 - h(1/2 + 1/2*sqrt(w)) + h(1/2 + 1/2*sqrt((1-2q)^2 + 4q(1-q)w)),
// w = chsh^2/4 - 1. Continuous at the classical bound, where it equals h(q).
EveBound eve_bound_preprocessed(double chsh, double q);

struct RateBreakdown {
  double delta;     // error rate entering error correction
  double chsh;      // Bell value used for the adversary bound
  double eve_bound; // adversary term, bits
  double key_error; // h(delta), bits
  double rate;      // eve_bound - key_error
  bool nonlocal;    // Bell value exceeded the classical bound
};

RateBreakdown key_rate(const ProtocolParams& params,
                       SourceNoiseMode mode = SourceNoiseMode::ComposedEverywhere);

} // namespace diqss
