#include "diqss/strategies.hpp"

#include <stdexcept>
#include <string>

namespace diqss {

void validate_strategy(const StrategyConfig& config) {
  if (config.preprocesses()) {
    if (!(config.q >= 0.0 && config.q <= 0.5)) {
      throw std::domain_error("flip probability q must lie in [0, 0.5], got " +
                              std::to_string(config.q));
    }
  } else if (config.q != 0.0) {
    throw std::domain_error("strategy '" +
                            std::string(strategy_name(config.kind)) +
                            "' does not take a flip probability");
  }
}

const char* strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::None: return "none";
    case StrategyKind::Preprocess: return "preprocess";
    case StrategyKind::Postselect: return "postselect";
    case StrategyKind::Advanced: return "advanced";
  }
  throw std::logic_error("unknown strategy kind");
}

StrategyKind strategy_from_name(const std::string& name) {
  if (name == "none") return StrategyKind::None;
  if (name == "preprocess") return StrategyKind::Preprocess;
  if (name == "postselect") return StrategyKind::Postselect;
  if (name == "advanced") return StrategyKind::Advanced;
  throw std::domain_error("unknown strategy '" + name +
                          "' (expected none|preprocess|postselect|advanced)");
}

Trit postselect_trit(Trit t) { return t == Trit::NoClick ? Trit::Plus : t; }

Outcome3 postselect_map(const Outcome3& outcome) {
  return {postselect_trit(outcome[0]), postselect_trit(outcome[1]),
          postselect_trit(outcome[2])};
}

OutcomeTable postselect_table(const OutcomeTable& table) {
  OutcomeTable mapped;
  mapped.basis = table.basis;
  mapped.efficiency = 1.0;
  mapped.probs.fill(0.0);
  for (int idx = 0; idx < 27; ++idx) {
    const Outcome3 image = postselect_map(OutcomeTable::outcome_at(idx));
    mapped.probs[OutcomeTable::index(image[0], image[1], image[2])] +=
        table.probs[idx];
  }
  return mapped;
}

FlipDistribution preprocess_flip_distribution(double q) {
  if (!(q >= 0.0 && q <= 0.5)) {
    throw std::domain_error("flip probability q must lie in [0, 0.5], got " +
                            std::to_string(q));
  }
  return {q, 1.0 - q};
}

Outcome3 flip_alice(const Outcome3& outcome, SiftCase sift) {
  if (sift != SiftCase::Key) {
    throw std::logic_error("preprocessing flip applied to a non-key round");
  }
  Outcome3 flipped = outcome;
  if (flipped[0] == Trit::Plus) {
    flipped[0] = Trit::Minus;
  } else if (flipped[0] == Trit::Minus) {
    flipped[0] = Trit::Plus;
  }
  return flipped;
}

Outcome3 apply_strategy(const Outcome3& outcome, SiftCase sift,
                        const StrategyConfig& config, bool flip_drawn) {
  Outcome3 result = outcome;
  if (config.postselects()) result = postselect_map(result);
  if (config.preprocesses() && flip_drawn && sift == SiftCase::Key) {
    result = flip_alice(result, sift);
  }
  return result;
}

} // namespace diqss
