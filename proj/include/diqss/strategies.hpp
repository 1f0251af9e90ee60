#pragma once

// Classical post-processing strategies applied to measurement records.
//
// Postselection replaces every no-click trit by +1, turning the three-valued
// record into a binary one (27 raw outcomes collapse onto 8). Noise
// preprocessing flips Alice's key-round bit with probability q before error
// correction; test rounds are never flipped. "advanced" composes both.

#include <array>

#include "diqss/noisemodel.hpp"

namespace diqss {

enum class StrategyKind { None, Preprocess, Postselect, Advanced };

struct StrategyConfig {
  StrategyKind kind = StrategyKind::None;
  double q = 0.0; // Alice's flip probability; used by Preprocess/Advanced

  bool postselects() const {
    return kind == StrategyKind::Postselect || kind == StrategyKind::Advanced;
  }
  bool preprocesses() const {
    return kind == StrategyKind::Preprocess || kind == StrategyKind::Advanced;
  }
};

// Throws std::domain_error unless q is in [0, 0.5] (and 0 for strategies
// without preprocessing).
void validate_strategy(const StrategyConfig& config);

const char* strategy_name(StrategyKind kind);
StrategyKind strategy_from_name(const std::string& name);

enum class SiftCase { Key, Test, Discard };

// No-click trits become +1; +1/-1 pass through.
Trit postselect_trit(Trit t);
Outcome3 postselect_map(const Outcome3& outcome);

// Push a distribution through the postselection map. The result has support
// only on the eight all-click outcomes.
OutcomeTable postselect_table(const OutcomeTable& table);

// Bernoulli(q) distribution of Alice's flip. q outside [0, 0.5] is rejected.
struct FlipDistribution {
  double p_flip;
  double p_keep;
};
FlipDistribution preprocess_flip_distribution(double q);

// Flip Alice's recorded bit in a key round. Throws std::logic_error when the
// record is not a key round (test/discard records must never be flipped); a
// no-click record is returned unchanged since there is no bit to flip --
// callers account for the flip at the error-indicator level in that case.
Outcome3 flip_alice(const Outcome3& outcome, SiftCase sift);

// Apply a strategy to one round's record: postselection (if configured) for
// every sifting case, then Alice's flip (if configured, `flip_drawn` true and
// the round is a key round). Returns the transformed outcome.
Outcome3 apply_strategy(const Outcome3& outcome, SiftCase sift,
                        const StrategyConfig& config, bool flip_drawn);

} // namespace diqss
