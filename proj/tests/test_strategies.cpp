#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "diqss/strategies.hpp"

using namespace diqss;

namespace {

double mapped_error_probability(const OutcomeTable& table) {
  double p = 0.0;
  for (int idx = 0; idx < 27; ++idx) {
    const Outcome3 o = OutcomeTable::outcome_at(idx);
    const int product = trit_sign(o[0]) * trit_sign(o[1]) * trit_sign(o[2]);
    if (product <= 0) p += table.probs[idx];
  }
  return p;
}

} // namespace

TEST_CASE("strategy names round-trip") {
  for (StrategyKind kind : {StrategyKind::None, StrategyKind::Preprocess,
                            StrategyKind::Postselect, StrategyKind::Advanced}) {
    CHECK(strategy_from_name(strategy_name(kind)) == kind);
  }
  CHECK(std::string(strategy_name(StrategyKind::None)) == "none");
  CHECK(std::string(strategy_name(StrategyKind::Advanced)) == "advanced");
  CHECK_THROWS_AS(strategy_from_name("bogus"), std::domain_error);
}

TEST_CASE("strategy configs are validated") {
  CHECK_NOTHROW(validate_strategy({StrategyKind::None, 0.0}));
  CHECK_NOTHROW(validate_strategy({StrategyKind::Preprocess, 0.5}));
  CHECK_NOTHROW(validate_strategy({StrategyKind::Advanced, 0.0}));
  CHECK_THROWS_AS(validate_strategy({StrategyKind::Preprocess, 0.51}),
                  std::domain_error);
  CHECK_THROWS_AS(validate_strategy({StrategyKind::Advanced, -0.1}),
                  std::domain_error);
  CHECK_THROWS_AS(validate_strategy({StrategyKind::None, 0.1}),
                  std::domain_error);
  CHECK_THROWS_AS(validate_strategy({StrategyKind::Postselect, 0.1}),
                  std::domain_error);
}

TEST_CASE("strategy predicates") {
  CHECK_FALSE(StrategyConfig{StrategyKind::None, 0.0}.postselects());
  CHECK_FALSE(StrategyConfig{StrategyKind::None, 0.0}.preprocesses());
  CHECK(StrategyConfig{StrategyKind::Preprocess, 0.1}.preprocesses());
  CHECK_FALSE(StrategyConfig{StrategyKind::Preprocess, 0.1}.postselects());
  CHECK(StrategyConfig{StrategyKind::Postselect, 0.0}.postselects());
  CHECK(StrategyConfig{StrategyKind::Advanced, 0.1}.postselects());
  CHECK(StrategyConfig{StrategyKind::Advanced, 0.1}.preprocesses());
}

TEST_CASE("postselection maps lost photons to plus") {
  CHECK(postselect_trit(Trit::NoClick) == Trit::Plus);
  CHECK(postselect_trit(Trit::Plus) == Trit::Plus);
  CHECK(postselect_trit(Trit::Minus) == Trit::Minus);
  const Outcome3 o{Trit::Minus, Trit::NoClick, Trit::NoClick};
  const Outcome3 mapped = postselect_map(o);
  CHECK(mapped == Outcome3{Trit::Minus, Trit::Plus, Trit::Plus});
}

TEST_CASE("postselect_table folds 27 outcomes onto 8 and keeps the mass") {
  const DensityMatrix rho = white_noise_state(0.95);
  const SettingTriple basis = SettingGrid::protocol().triple(1, 1, 1);
  const OutcomeTable raw = outcome_table(rho, 0.9, basis);
  const OutcomeTable mapped = postselect_table(raw);

  CHECK(mapped.efficiency == 1.0);
  CHECK_NOTHROW(validate_outcome_table(mapped));

  double total = 0.0;
  for (int idx = 0; idx < 27; ++idx) {
    const Outcome3 o = OutcomeTable::outcome_at(idx);
    const bool all_click = o[0] != Trit::NoClick && o[1] != Trit::NoClick &&
                           o[2] != Trit::NoClick;
    if (!all_click) CHECK(mapped.probs[idx] == 0.0);
    total += mapped.probs[idx];
  }
  CHECK(std::abs(total - 1.0) < 1e-12);

  // Aggregation rule: the (+,+,+) cell collects every outcome whose clicked
  // parties all read plus.
  double expected = 0.0;
  for (int idx = 0; idx < 27; ++idx) {
    const Outcome3 o = OutcomeTable::outcome_at(idx);
    bool maps_to_all_plus = true;
    for (int party = 0; party < 3; ++party) {
      if (o[party] == Trit::Minus) maps_to_all_plus = false;
    }
    if (maps_to_all_plus) expected += raw.probs[idx];
  }
  CHECK(mapped.at(Trit::Plus, Trit::Plus, Trit::Plus) ==
        doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("postselected key-basis error matches its closed form") {
  const SettingTriple basis = SettingGrid::protocol().triple(1, 1, 1);
  for (double f : {1.0, 0.95, 0.85}) {
    for (double eta : {1.0, 0.95, 0.9, 0.7}) {
      const OutcomeTable raw = outcome_table(white_noise_state(f), eta, basis);
      const OutcomeTable mapped = postselect_table(raw);
      const double eta3 = eta * eta * eta;
      const double expected =
          0.5 * (1.0 - f) * eta3 + 1.5 * eta * (1.0 - eta);
      CHECK(mapped_error_probability(mapped) ==
            doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("flip distribution is a Bernoulli pair") {
  const FlipDistribution d = preprocess_flip_distribution(0.2);
  CHECK(d.p_flip == doctest::Approx(0.2));
  CHECK(d.p_keep == doctest::Approx(0.8));
  CHECK_THROWS_AS(preprocess_flip_distribution(0.6), std::domain_error);
  CHECK_THROWS_AS(preprocess_flip_distribution(-0.01), std::domain_error);
}

TEST_CASE("flip_alice toggles only Alice and only in key rounds") {
  const Outcome3 o{Trit::Plus, Trit::Minus, Trit::Plus};
  const Outcome3 flipped = flip_alice(o, SiftCase::Key);
  CHECK(flipped == Outcome3{Trit::Minus, Trit::Minus, Trit::Plus});
  CHECK(flip_alice(flipped, SiftCase::Key) == o);

  // A lost photon has no bit to flip.
  const Outcome3 lost{Trit::NoClick, Trit::Minus, Trit::Plus};
  CHECK(flip_alice(lost, SiftCase::Key) == lost);

  CHECK_THROWS_AS(flip_alice(o, SiftCase::Test), std::logic_error);
  CHECK_THROWS_AS(flip_alice(o, SiftCase::Discard), std::logic_error);
}

TEST_CASE("apply_strategy composes postselection and the flip") {
  const Outcome3 o{Trit::Plus, Trit::NoClick, Trit::Minus};

  const StrategyConfig none{StrategyKind::None, 0.0};
  CHECK(apply_strategy(o, SiftCase::Key, none, false) == o);

  const StrategyConfig post{StrategyKind::Postselect, 0.0};
  CHECK(apply_strategy(o, SiftCase::Test, post, false) ==
        Outcome3{Trit::Plus, Trit::Plus, Trit::Minus});
  CHECK(apply_strategy(o, SiftCase::Discard, post, false) ==
        Outcome3{Trit::Plus, Trit::Plus, Trit::Minus});

  const StrategyConfig pre{StrategyKind::Preprocess, 0.3};
  CHECK(apply_strategy(o, SiftCase::Key, pre, true) ==
        Outcome3{Trit::Minus, Trit::NoClick, Trit::Minus});
  CHECK(apply_strategy(o, SiftCase::Key, pre, false) == o);
  // The flip never touches test rounds, drawn or not.
  CHECK(apply_strategy(o, SiftCase::Test, pre, false) == o);

  const StrategyConfig advanced{StrategyKind::Advanced, 0.3};
  CHECK(apply_strategy(o, SiftCase::Key, advanced, true) ==
        Outcome3{Trit::Minus, Trit::Plus, Trit::Minus});
  CHECK(apply_strategy(o, SiftCase::Key, advanced, false) ==
        Outcome3{Trit::Plus, Trit::Plus, Trit::Minus});
}
