#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "diqss/keyrate.hpp"

using namespace diqss;

namespace {

ProtocolParams make_params(StrategyKind kind, double q, double eta, double f,
                           double fs = 1.0) {
  ProtocolParams p;
  p.fidelity = f;
  p.source_fidelity = fs;
  p.eta = eta;
  p.strategy = {kind, q};
  return p;
}

// Second algebraic form of the preprocessed adversary bound, via
// (1-2q)^2 + 4q(1-q)w = 1 - 4q(1-q)(1-w).
double preprocessed_bound_alt(double chsh, double q) {
  const double w = std::min(chsh * chsh / 4.0 - 1.0, 1.0);
  const double flip_arg = 1.0 - 4.0 * q * (1.0 - q) * (1.0 - w);
  return 1.0 - binary_entropy(0.5 + 0.5 * std::sqrt(w)) +
         binary_entropy(0.5 + 0.5 * std::sqrt(std::min(flip_arg, 1.0)));
}

} // namespace

TEST_CASE("binary entropy endpoints and frozen interior values") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(binary_entropy(0.11) ==
        doctest::Approx(0.499915958164528).epsilon(1e-12));
  CHECK(binary_entropy(0.2) ==
        doctest::Approx(0.7219280948873623).epsilon(1e-12));
  CHECK(binary_entropy(0.3) == binary_entropy(0.7));
  CHECK_THROWS_AS(binary_entropy(-0.001), std::domain_error);
  CHECK_THROWS_AS(binary_entropy(1.001), std::domain_error);
}

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(validate_params(make_params(StrategyKind::None, 0, 1, 1)));
  CHECK_THROWS_AS(validate_params(make_params(StrategyKind::None, 0, 1.1, 1)),
                  std::domain_error);
  CHECK_THROWS_AS(validate_params(make_params(StrategyKind::None, 0, 1, -0.1)),
                  std::domain_error);
  CHECK_THROWS_AS(
      validate_params(make_params(StrategyKind::None, 0, 1, 1, 0.49)),
      std::domain_error);
  CHECK_THROWS_AS(
      validate_params(make_params(StrategyKind::None, 0, 1, 1, 1.01)),
      std::domain_error);
  CHECK_THROWS_AS(
      validate_params(make_params(StrategyKind::Preprocess, 0.6, 1, 1)),
      std::domain_error);
}

TEST_CASE("plain channel error rate") {
  CHECK(qber(make_params(StrategyKind::None, 0, 1.0, 1.0)) == 0.0);
  for (double f : {1.0, 0.95, 0.8}) {
    for (double eta : {1.0, 0.97, 0.9}) {
      const double eta3 = eta * eta * eta;
      CHECK(qber(make_params(StrategyKind::None, 0, eta, f)) ==
            doctest::Approx(1.0 - 0.5 * eta3 - 0.5 * eta3 * f).epsilon(1e-14));
    }
  }
  // At unit efficiency the error is the white-noise term alone, with or
  // without postselection.
  for (double f : {1.0, 0.95, 0.8}) {
    CHECK(qber(make_params(StrategyKind::None, 0, 1.0, f)) ==
          doctest::Approx((1.0 - f) / 2.0).epsilon(1e-14));
    CHECK(qber(make_params(StrategyKind::Postselect, 0, 1.0, f)) ==
          doctest::Approx((1.0 - f) / 2.0).epsilon(1e-14));
  }
}

TEST_CASE("flip preprocessing shifts the error affinely") {
  const double base = qber(make_params(StrategyKind::None, 0, 0.96, 0.98));
  for (double q : {0.0, 0.05, 0.2, 0.4, 0.5}) {
    CHECK(qber(make_params(StrategyKind::Preprocess, q, 0.96, 0.98)) ==
          doctest::Approx(q + (1 - 2 * q) * base).epsilon(1e-14));
  }
  // q = 1/2 erases everything.
  CHECK(qber(make_params(StrategyKind::Preprocess, 0.5, 0.9, 0.9)) ==
        doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("postselected error and Bell value, frozen spot values") {
  CHECK(qber(make_params(StrategyKind::Postselect, 0, 0.95, 1.0)) ==
        doctest::Approx(0.07125).epsilon(1e-14));
  CHECK(chsh_value(make_params(StrategyKind::Postselect, 0, 0.9499, 1.0)) ==
        doctest::Approx(2.4245084930445846).epsilon(1e-13));
  CHECK(chsh_value(make_params(StrategyKind::Postselect, 0, 0.95, 1.0)) ==
        doctest::Approx(2.4252727060792645).epsilon(1e-13));
  // advanced = postselect error pushed through the flip
  const double dp = qber(make_params(StrategyKind::Postselect, 0, 0.93, 0.97));
  CHECK(qber(make_params(StrategyKind::Advanced, 0.2, 0.93, 0.97)) ==
        doctest::Approx(0.2 + 0.6 * dp).epsilon(1e-14));
}

TEST_CASE("postselection never hurts: smaller error, larger Bell value") {
  for (int ei = 0; ei <= 20; ++ei) {
    for (int fi = 0; fi <= 20; ++fi) {
      const double eta = 0.5 + 0.5 * ei / 20.0;
      const double f = fi / 20.0;
      const ProtocolParams plain = make_params(StrategyKind::None, 0, eta, f);
      const ProtocolParams post =
          make_params(StrategyKind::Postselect, 0, eta, f);
      CHECK(qber(post) <= qber(plain) + 1e-12);
      CHECK(chsh_value(post) >= chsh_value(plain) - 1e-12);
    }
  }
}

TEST_CASE("plain Bell value scales with fidelity and efficiency cubed") {
  for (double f : {1.0, 0.9}) {
    for (double eta : {1.0, 0.95}) {
      CHECK(chsh_value(make_params(StrategyKind::None, 0, eta, f)) ==
            doctest::Approx(kQuantumChsh * eta * eta * eta * f).epsilon(1e-14));
    }
  }
}

TEST_CASE("adversary bound: frozen values and edge behavior") {
  CHECK(eve_bound(kQuantumChsh).bits == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(eve_bound(kQuantumChsh).nonlocal);
  CHECK(eve_bound(2.5).bits ==
        doctest::Approx(0.4564355568004036).epsilon(1e-12));
  CHECK(eve_bound(2.0).bits == 0.0);
  CHECK_FALSE(eve_bound(2.0).nonlocal);
  CHECK(eve_bound(1.2).bits == 0.0);
  CHECK(eve_bound(kQuantumChsh + 5e-10).bits ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(eve_bound(2.83), std::domain_error);
  CHECK_THROWS_AS(eve_bound(kQuantumChsh + 1e-6), std::domain_error);
}

TEST_CASE("preprocessed adversary bound: continuity and frozen values") {
  // At the classical bound the flip term hands back exactly h(q).
  CHECK(eve_bound_preprocessed(2.0, 0.2).bits ==
        doctest::Approx(0.7219280948873623).epsilon(1e-12));
  CHECK_FALSE(eve_bound_preprocessed(2.0, 0.2).nonlocal);
  CHECK(eve_bound_preprocessed(1.5, 0.2).bits ==
        doctest::Approx(binary_entropy(0.2)).epsilon(1e-14));
  // Continuity from above.
  CHECK(eve_bound_preprocessed(2.0 + 1e-9, 0.2).bits ==
        doctest::Approx(binary_entropy(0.2)).epsilon(1e-6));
  // The quantum bound is immune to the flip.
  for (double q : {0.0, 0.1, 0.3, 0.5}) {
    CHECK(eve_bound_preprocessed(kQuantumChsh, q).bits ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  // q = 0 degenerates to the plain bound.
  for (double s : {2.1, 2.4, 2.7}) {
    CHECK(eve_bound_preprocessed(s, 0.0).bits ==
          doctest::Approx(eve_bound(s).bits).epsilon(1e-14));
  }
  CHECK_THROWS_AS(eve_bound_preprocessed(2.5, 0.6), std::domain_error);
  CHECK_THROWS_AS(eve_bound_preprocessed(2.83, 0.2), std::domain_error);
}

TEST_CASE("the two forms of the preprocessed bound agree") {
  for (double s = 2.0; s <= kQuantumChsh + 1e-12; s += 0.01) {
    for (double q : {0.01, 0.05, 0.2, 0.4, 0.49}) {
      const double a = eve_bound_preprocessed(std::min(s, kQuantumChsh), q).bits;
      const double b = preprocessed_bound_alt(std::min(s, kQuantumChsh), q);
      CHECK(std::abs(a - b) <= 1e-12);
    }
  }
}

TEST_CASE("the flip term never lowers the adversary bound") {
  for (double s = 2.0; s <= kQuantumChsh; s += 0.02) {
    for (double q : {0.05, 0.2, 0.4}) {
      CHECK(eve_bound_preprocessed(s, q).bits >= eve_bound(s).bits - 1e-12);
    }
  }
}

TEST_CASE("rate breakdown is internally consistent") {
  for (StrategyKind kind : {StrategyKind::None, StrategyKind::Preprocess,
                            StrategyKind::Postselect, StrategyKind::Advanced}) {
    const double q =
        (kind == StrategyKind::Preprocess || kind == StrategyKind::Advanced)
            ? 0.2
            : 0.0;
    const RateBreakdown rb = key_rate(make_params(kind, q, 0.97, 0.99));
    CHECK(rb.delta == doctest::Approx(qber(make_params(kind, q, 0.97, 0.99)))
                          .epsilon(1e-14));
    CHECK(rb.chsh ==
          doctest::Approx(chsh_value(make_params(kind, q, 0.97, 0.99)))
              .epsilon(1e-14));
    CHECK(rb.key_error == doctest::Approx(binary_entropy(rb.delta)).epsilon(1e-14));
    CHECK(rb.rate == doctest::Approx(rb.eve_bound - rb.key_error).epsilon(1e-14));
    CHECK(rb.nonlocal == (rb.chsh > kClassicalChsh));
  }
}

TEST_CASE("the noiseless lossless protocol yields one bit per key round") {
  const RateBreakdown rb = key_rate(make_params(StrategyKind::None, 0, 1, 1));
  CHECK(rb.delta == 0.0);
  CHECK(rb.chsh == doctest::Approx(kQuantumChsh).epsilon(1e-15));
  CHECK(rb.eve_bound == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rb.key_error == 0.0);
  CHECK(rb.rate == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rb.nonlocal);
}

TEST_CASE("frozen spot rate: plain protocol at eta 0.97, fidelity 0.99") {
  const RateBreakdown rb =
      key_rate(make_params(StrategyKind::None, 0, 0.97, 0.99));
  CHECK(rb.delta == doctest::Approx(0.09189036500000008).epsilon(1e-13));
  CHECK(rb.chsh == doctest::Approx(2.555614778531245).epsilon(1e-13));
  CHECK(rb.rate == doctest::Approx(0.08113595478632729).epsilon(1e-11));
}

TEST_CASE("rate is monotone in efficiency and fidelity near the corner") {
  // 21 x 21 grid on [0.9, 1]^2, spacing 0.005.
  auto rate = [](int ei, int fi) {
    return key_rate(make_params(StrategyKind::None, 0, 0.9 + 0.1 * ei / 20.0,
                                0.9 + 0.1 * fi / 20.0))
        .rate;
  };
  for (int ei = 0; ei < 20; ++ei) {
    for (int fi = 0; fi < 20; ++fi) {
      CHECK(rate(ei + 1, fi) >= rate(ei, fi) - 1e-12);
      CHECK(rate(ei, fi + 1) >= rate(ei, fi) - 1e-12);
    }
  }
}

TEST_CASE("source imperfection composes into the effective fidelity") {
  const ProtocolParams composed =
      make_params(StrategyKind::None, 0, 1.0, 0.95, 0.9);
  const ProtocolParams equivalent = make_params(
      StrategyKind::None, 0, 1.0, compose_source(0.9, 0.95));
  CHECK(qber(composed) == doctest::Approx(qber(equivalent)).epsilon(1e-14));
  CHECK(chsh_value(composed) ==
        doctest::Approx(chsh_value(equivalent)).epsilon(1e-14));

  // Composed error at unit efficiency: 1/2 + F/2 - F_s F.
  CHECK(qber(composed) ==
        doctest::Approx(0.5 + 0.5 * 0.95 - 0.9 * 0.95).epsilon(1e-14));
}

TEST_CASE("qber-only composition keeps the Bell value at the raw fidelity") {
  const ProtocolParams p = make_params(StrategyKind::Advanced, 0.4, 0.96, 0.98,
                                       0.96);
  CHECK(qber(p, SourceNoiseMode::QberOnly) ==
        doctest::Approx(qber(p, SourceNoiseMode::ComposedEverywhere))
            .epsilon(1e-14));
  const ProtocolParams raw = make_params(StrategyKind::Advanced, 0.4, 0.96,
                                         0.98);
  CHECK(chsh_value(p, SourceNoiseMode::QberOnly) ==
        doctest::Approx(chsh_value(raw)).epsilon(1e-14));
  CHECK(chsh_value(p, SourceNoiseMode::QberOnly) >
        chsh_value(p, SourceNoiseMode::ComposedEverywhere));
  const RateBreakdown qo = key_rate(p, SourceNoiseMode::QberOnly);
  const RateBreakdown ce = key_rate(p, SourceNoiseMode::ComposedEverywhere);
  CHECK(qo.delta == doctest::Approx(ce.delta).epsilon(1e-14));
  CHECK(qo.rate > ce.rate);
}
