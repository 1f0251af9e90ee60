#include "doctest.h"

#include <array>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include "diqss/montecarlo.hpp"

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

bool same_counts(const BucketCounts& a, const BucketCounts& b) {
  return a.rounds == b.rounds && a.sum == b.sum && a.nonzero == b.nonzero;
}

} // namespace

TEST_CASE("keyed randomness uses the standard mixer with separated purposes") {
  CHECK(splitmix64(0) == 16294208416658607535ULL);
  CHECK(splitmix64(1234567) == 6457827717110365317ULL);
  CHECK(draw_key(42, 7, 3) == 14608953929149626388ULL);

  std::set<std::uint64_t> keys;
  for (std::uint64_t purpose = 0; purpose <= 5; ++purpose) {
    keys.insert(draw_key(9, 11, purpose));
  }
  CHECK(keys.size() == 6);
  CHECK(draw_key(9, 0, 0) != draw_key(9, 1, 0));
  CHECK(draw_key(9, 0, 0) != draw_key(10, 0, 0));

  CHECK(uniform01(0) == 0.0);
  CHECK(uniform01(~std::uint64_t{0}) == 0.9999999999999999);
  CHECK(uniform01(splitmix64(0)) == doctest::Approx(0.8833108082136426)
                                        .epsilon(1e-15));
  std::uint64_t key = 3;
  for (int i = 0; i < 1000; ++i) {
    key = splitmix64(key);
    const double u = uniform01(key);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("inverse-CDF sampling walks the parity-locked key table") {
  const SettingGrid grid = SettingGrid::protocol();
  const OutcomeTable table =
      outcome_table(white_noise_state(1.0), 1.0, grid.triple(1, 1, 1));
  const OutcomeSampler sampler(table);

  // Support cells in index order: (+,+,+)=0, (+,-,-)=4, (-,+,-)=10,
  // (-,-,+)=12, each with probability 1/4.
  const Outcome3 ppp{Trit::Plus, Trit::Plus, Trit::Plus};
  const Outcome3 pmm{Trit::Plus, Trit::Minus, Trit::Minus};
  const Outcome3 mpm{Trit::Minus, Trit::Plus, Trit::Minus};
  const Outcome3 mmp{Trit::Minus, Trit::Minus, Trit::Plus};
  CHECK(sampler.sample(0.0) == ppp);
  CHECK(sampler.sample(0.2) == ppp);
  CHECK(sampler.sample(0.3) == pmm);
  CHECK(sampler.sample(0.6) == mpm);
  CHECK(sampler.sample(0.8) == mmp);
  CHECK(sampler.sample(0.9999999) == mmp);

  // With loss the last cell is total vacuum, and the closed CDF reaches it.
  const OutcomeTable lossy =
      outcome_table(white_noise_state(1.0), 0.8, grid.triple(1, 1, 1));
  const OutcomeSampler lossy_sampler(lossy);
  const Outcome3 vac{Trit::NoClick, Trit::NoClick, Trit::NoClick};
  CHECK(lossy_sampler.sample(1.0 - 1e-12) == vac);

  OutcomeTable broken;
  broken.basis = grid.triple(1, 1, 1);
  broken.efficiency = 1.0;
  CHECK_THROWS_AS(OutcomeSampler{broken}, std::domain_error);
}

TEST_CASE("a fixed seed reproduces the report bit for bit") {
  const ProtocolParams params = make_params(StrategyKind::None, 0, 0.95, 0.97);
  const SimulationReport a = simulate(params, 20000, 77);
  const SimulationReport b = simulate(params, 20000, 77);
  CHECK(same_counts(a.buckets, b.buckets));
  CHECK(a.key_rounds == b.key_rounds);
  CHECK(a.test_rounds == b.test_rounds);
  CHECK(a.discard_rounds == b.discard_rounds);
  CHECK(a.qber_sampled_rounds == b.qber_sampled_rounds);
  CHECK(a.qber_errors == b.qber_errors);

  // A different seed produces different raw data somewhere in 100 rounds.
  Simulator sim(white_noise_state(0.97), 0.95, {StrategyKind::None, 0.0});
  bool differs = false;
  for (std::uint64_t i = 0; i < 100 && !differs; ++i) {
    const RoundRecord x = sim.round(77, i);
    const RoundRecord y = sim.round(78, i);
    differs = x.alice_basis != y.alice_basis || x.bob_basis != y.bob_basis ||
              x.charlie_basis != y.charlie_basis || x.raw != y.raw;
  }
  CHECK(differs);
}

TEST_CASE("worker partitioning does not change any counter") {
  const ProtocolParams params =
      make_params(StrategyKind::Advanced, 0.2, 0.95, 0.98);
  SimulateOptions one;
  one.workers = 1;
  SimulateOptions four;
  four.workers = 4;
  const SimulationReport a = simulate(params, 30000, 5, one);
  const SimulationReport b = simulate(params, 30000, 5, four);
  CHECK(same_counts(a.buckets, b.buckets));
  CHECK(a.key_rounds == b.key_rounds);
  CHECK(a.test_rounds == b.test_rounds);
  CHECK(a.discard_rounds == b.discard_rounds);
  CHECK(a.qber_sampled_rounds == b.qber_sampled_rounds);
  CHECK(a.qber_errors == b.qber_errors);
  REQUIRE(a.qber.has_value());
  REQUIRE(b.qber.has_value());
  CHECK(a.qber->value == b.qber->value);
}

TEST_CASE("sifting fractions follow the basis probabilities") {
  const ProtocolParams params = make_params(StrategyKind::None, 0, 0.97, 0.99);
  const SimulationReport r = simulate(params, 120000, 11);
  CHECK(r.key_rounds + r.test_rounds + r.discard_rounds == r.n_rounds);
  CHECK(r.fraction_key == doctest::Approx(1.0 / 12).epsilon(0.1));
  CHECK(std::abs(r.fraction_key - 1.0 / 12) < 0.008);
  CHECK(std::abs(r.fraction_test - 2.0 / 3) < 0.008);
  CHECK(std::abs(r.fraction_discard - 0.25) < 0.008);
}

TEST_CASE("pure key-parity eigenstates give an exactly classified error rate") {
  for (int variant = 1; variant <= 4; ++variant) {
    for (int sign : {+1, -1}) {
      const DensityMatrix rho{ghz(variant, sign)};
      const SimulationReport r =
          simulate_state(rho, 1.0, {StrategyKind::None, 0.0}, 400, 5);
      REQUIRE(r.qber.has_value());
      CHECK(r.qber->value == (sign < 0 ? 1.0 : 0.0));
      CHECK(r.qber->std_error == 0.0);
      CHECK_FALSE(r.qber_undefined);
    }
  }
}

TEST_CASE("key-round errors are the parity of the key bits") {
  Simulator plain(white_noise_state(0.97), 0.95, {StrategyKind::Preprocess, 0.3});
  int keyed = 0;
  int lossy_key = 0;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    const RoundRecord rec = plain.round(3, i);
    if (rec.sift != SiftCase::Key) {
      CHECK_FALSE(rec.flip_drawn);
      continue;
    }
    if (rec.key_bits.has_value()) {
      ++keyed;
      const auto& k = *rec.key_bits;
      CHECK(rec.error == ((k[0] ^ k[1] ^ k[2]) == 1));
      for (const Trit t : rec.processed) CHECK(t != Trit::NoClick);
    } else {
      // A lost detection is an error unless Alice's flip toggles it back.
      ++lossy_key;
      CHECK(rec.error == !rec.flip_drawn);
    }
  }
  CHECK(keyed > 100);
  CHECK(lossy_key > 10);

  // Postselection maps every key round onto definite bits.
  Simulator mapped(white_noise_state(0.9), 0.8, {StrategyKind::Postselect, 0.0});
  int mapped_keys = 0;
  for (std::uint64_t i = 0; i < 3000; ++i) {
    const RoundRecord rec = mapped.round(4, i);
    if (rec.sift != SiftCase::Key) continue;
    ++mapped_keys;
    REQUIRE(rec.key_bits.has_value());
    const auto& k = *rec.key_bits;
    CHECK(rec.error == ((k[0] ^ k[1] ^ k[2]) == 1));
  }
  CHECK(mapped_keys > 100);
}

TEST_CASE("raw outcomes are independent of the strategy") {
  const DensityMatrix rho = white_noise_state(0.95);
  Simulator none(rho, 0.9, {StrategyKind::None, 0.0});
  Simulator post(rho, 0.9, {StrategyKind::Postselect, 0.0});
  Simulator adv(rho, 0.9, {StrategyKind::Advanced, 0.2});
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const RoundRecord a = none.round(21, i);
    const RoundRecord b = post.round(21, i);
    const RoundRecord c = adv.round(21, i);
    CHECK(a.raw == b.raw);
    CHECK(a.raw == c.raw);
    CHECK(a.alice_basis == b.alice_basis);
    CHECK(a.bob_basis == c.bob_basis);
    CHECK(a.charlie_basis == c.charlie_basis);
  }
}

TEST_CASE("test buckets are untouched by preprocessing") {
  const SimulationReport a =
      simulate(make_params(StrategyKind::None, 0, 0.95, 0.97), 30000, 9);
  const SimulationReport b =
      simulate(make_params(StrategyKind::Preprocess, 0.3, 0.95, 0.97), 30000, 9);
  CHECK(same_counts(a.buckets, b.buckets));
}

TEST_CASE("missing statistics degrade the report instead of faking it") {
  BucketCounts empty;
  CHECK_THROWS_WITH_AS(svetlichny_estimator(empty),
                       doctest::Contains("empty test buckets"),
                       std::domain_error);

  SimulateOptions skew;
  skew.alice_basis_probs = {0.0, 1.0};
  const SimulationReport r =
      simulate(make_params(StrategyKind::None, 0, 1.0, 1.0), 3000, 13, skew);
  CHECK(r.key_rounds == 0);
  CHECK(r.qber_undefined);
  CHECK_FALSE(r.qber.has_value());
  CHECK_FALSE(r.s_abc.has_value());
  CHECK_FALSE(r.estimated_rate.has_value());
  REQUIRE_FALSE(r.empty_buckets.empty());
  bool has_a1 = false;
  for (const std::string& label : r.empty_buckets) {
    if (label == "A1B2C1") has_a1 = true;
  }
  CHECK(has_a1);

  SimulateOptions unsampled;
  unsampled.key_sample_fraction = 0.0;
  const SimulationReport u =
      simulate(make_params(StrategyKind::None, 0, 1.0, 1.0), 20000, 13,
               unsampled);
  CHECK(u.qber_undefined);
  CHECK_FALSE(u.qber.has_value());
  CHECK(u.chsh.has_value());
  CHECK_FALSE(u.estimated_rate.has_value());
}

TEST_CASE("options and arguments are validated") {
  const ProtocolParams params = make_params(StrategyKind::None, 0, 1.0, 1.0);
  SimulateOptions bad;
  bad.workers = 0;
  CHECK_THROWS_AS(simulate(params, 10, 1, bad), std::domain_error);
  bad = {};
  bad.key_sample_fraction = 1.5;
  CHECK_THROWS_AS(simulate(params, 10, 1, bad), std::domain_error);
  bad = {};
  bad.bob_basis_probs = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(simulate(params, 10, 1, bad), std::domain_error);
  bad = {};
  bad.charlie_basis_probs = {-0.25, 1.25};
  CHECK_THROWS_AS(simulate(params, 10, 1, bad), std::domain_error);

  CHECK_THROWS_AS(simulate(params, 0, 1), std::domain_error);
  CHECK_THROWS_AS(validate_against_analytic(params, 10, 1, 0.0),
                  std::domain_error);
  CHECK_THROWS_AS(validate_against_analytic(params, 10, 1, -2.0),
                  std::domain_error);
}

TEST_CASE("the sampler reproduces the closed forms within four sigma") {
  SimulateOptions opts;
  opts.workers = 2;

  const ValidationReport plain = validate_against_analytic(
      make_params(StrategyKind::None, 0, 0.97, 0.99), 200000, 1, 4.0, opts);
  CHECK(plain.qber_check.pass);
  CHECK(plain.chsh_check.pass);
  CHECK(plain.pass);
  CHECK(plain.detail.empty());
  CHECK(plain.qber_check.sigmas <= 4.0);
  CHECK(plain.chsh_check.sigmas <= 4.0);

  const ValidationReport adv = validate_against_analytic(
      make_params(StrategyKind::Advanced, 0.2, 0.9499, 1.0), 300000, 2, 4.0,
      opts);
  CHECK(adv.pass);
  REQUIRE(adv.sim.qber.has_value());
  CHECK(adv.qber_check.analytic ==
        doctest::Approx(qber(make_params(StrategyKind::Advanced, 0.2, 0.9499,
                                         1.0)))
            .epsilon(1e-12));
}
