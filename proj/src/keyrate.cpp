#include "diqss/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace diqss {

namespace {

void require_unit(double value, const char* name, double lo, double hi) {
  if (!(value >= lo && value <= hi)) {
    throw std::domain_error(std::string(name) + " must lie in [" +
                            std::to_string(lo) + ", " + std::to_string(hi) +
                            "], got " + std::to_string(value));
  }
}

double effective_fidelity(const ProtocolParams& params) {
  return compose_source(params.source_fidelity, params.fidelity);
}

double bell_fidelity(const ProtocolParams& params, SourceNoiseMode mode) {
  return mode == SourceNoiseMode::QberOnly ? params.fidelity
                                           : effective_fidelity(params);
}

} // namespace

void validate_params(const ProtocolParams& params) {
  require_unit(params.fidelity, "fidelity", 0.0, 1.0);
  require_unit(params.source_fidelity, "source_fidelity", 0.5, 1.0);
  require_unit(params.eta, "eta", 0.0, 1.0);
  validate_strategy(params.strategy);
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error("binary_entropy argument must lie in [0, 1], got " +
                            std::to_string(x));
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double qber(const ProtocolParams& params, SourceNoiseMode) {
  validate_params(params);
  const double f = effective_fidelity(params);
  const double eta = params.eta;
  const double eta3 = eta * eta * eta;
  double delta;
  if (params.strategy.postselects()) {
    delta = 0.5 * (1.0 - f) * eta3 + 1.5 * eta * (1.0 - eta);
  } else {
    delta = 1.0 - 0.5 * eta3 - 0.5 * eta3 * f;
  }
  if (params.strategy.preprocesses()) {
    const double q = params.strategy.q;
    delta = q + (1.0 - 2.0 * q) * delta;
  }
  return delta;
}

double chsh_value(const ProtocolParams& params, SourceNoiseMode mode) {
  validate_params(params);
  const double f = bell_fidelity(params, mode);
  const double eta = params.eta;
  const double eta3 = eta * eta * eta;
  double s = kQuantumChsh * eta3 * f;
  if (params.strategy.postselects()) {
    const double miss = 1.0 - eta;
    s += 2.0 * miss * miss * miss;
  }
  return s;
}

EveBound eve_bound(double chsh) {
  if (chsh > kQuantumChsh + kSuperQuantumTol) {
    throw std::domain_error("Bell value " + std::to_string(chsh) +
                            " exceeds the quantum bound");
  }
  const double w = chsh * chsh / 4.0 - 1.0;
  if (w <= 0.0) return {0.0, false};
  const double root = std::sqrt(std::min(w, 1.0));
  return {1.0 - binary_entropy(0.5 + 0.5 * root), true};
}

EveBound eve_bound_preprocessed(double chsh, double q) {
  preprocess_flip_distribution(q); // range check
  if (chsh > kQuantumChsh + kSuperQuantumTol) {
    throw std::domain_error("Bell value " + std::to_string(chsh) +
                            " exceeds the quantum bound");
  }
  const double w = chsh * chsh / 4.0 - 1.0;
  if (w <= 0.0) return {binary_entropy(q), false};
  const double wc = std::min(w, 1.0);
  const double one_minus_2q = 1.0 - 2.0 * q;
  const double flip_arg =
      std::min(one_minus_2q * one_minus_2q + 4.0 * q * (1.0 - q) * wc, 1.0);
  const double bits = 1.0 - binary_entropy(0.5 + 0.5 * std::sqrt(wc)) +
                      binary_entropy(0.5 + 0.5 * std::sqrt(flip_arg));
  return {bits, true};
}

RateBreakdown key_rate(const ProtocolParams& params, SourceNoiseMode mode) {
  validate_params(params);
  RateBreakdown out;
  out.delta = qber(params, mode);
  out.chsh = chsh_value(params, mode);
  const EveBound eb = params.strategy.preprocesses()
                          ? eve_bound_preprocessed(out.chsh, params.strategy.q)
                          : eve_bound(out.chsh);
  out.eve_bound = eb.bits;
  out.nonlocal = eb.nonlocal;
  out.key_error = binary_entropy(out.delta);
  out.rate = out.eve_bound - out.key_error;
  return out;
}

} // namespace diqss
