#pragma once

// Round-by-round protocol simulation: random basis selection, outcome
// sampling from exact per-basis distributions, sifting, strategy application,
// and empirical QBER / Bell-value estimation with standard errors.
//
// Randomness is counter-based: every draw is keyed by (seed, round index,
// purpose), so results are bit-identical for a fixed seed regardless of how
// rounds are partitioned across workers. Accumulation uses integer counts
// only, which makes merging exact and order-independent.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diqss/keyrate.hpp"

namespace diqss {

// --- keyed randomness -------------------------------------------------------

std::uint64_t splitmix64(std::uint64_t x);

enum : std::uint64_t {
  kDrawAliceBasis = 0,
  kDrawBobBasis = 1,
  kDrawCharlieBasis = 2,
  kDrawOutcome = 3,
  kDrawFlip = 4,
  kDrawQberSample = 5,
};

// 64-bit key for one (seed, round, purpose) draw.
std::uint64_t draw_key(std::uint64_t seed, std::uint64_t round,
                       std::uint64_t purpose);

// Uniform double in [0, 1) from a 64-bit key (53 mantissa bits).
double uniform01(std::uint64_t key);

// --- sampling ----------------------------------------------------------------

// Inverse-CDF sampler over the 27 trit outcomes of one basis triple.
class OutcomeSampler {
 public:
  explicit OutcomeSampler(const OutcomeTable& table);
  Outcome3 sample(double u) const; // u in [0, 1)

 private:
  std::array<double, 27> cumulative_;
};

// --- per-round record --------------------------------------------------------

struct RoundRecord {
  int alice_basis = 1; // 1-based setting indices
  int bob_basis = 1;
  int charlie_basis = 1;
  Outcome3 raw{};       // sampled trits
  Outcome3 processed{}; // after postselection map and Alice's flip
  SiftCase sift = SiftCase::Discard;
  bool flip_drawn = false; // preprocessing flip drawn (key rounds only)
  bool error = false;      // key rounds: error indicator after the strategy
  // Key bits (0/1 per party) when defined: always after postselection,
  // only for all-click records otherwise.
  std::optional<std::array<int, 3>> key_bits;
};

// --- simulation --------------------------------------------------------------

struct SimulateOptions {
  int workers = 1;
  // Fraction of key rounds sampled for QBER estimation (draw kDrawQberSample).
  double key_sample_fraction = 1.0;
  // Basis choice distributions, uniform by default.
  std::array<double, 2> alice_basis_probs{0.5, 0.5};
  std::array<double, 3> bob_basis_probs{1.0 / 3, 1.0 / 3, 1.0 / 3};
  std::array<double, 2> charlie_basis_probs{0.5, 0.5};
};

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Integer sufficient statistics of the eight test-basis buckets, indexed by
// (i-1)*4 + (j-2)*2 + (k-1). `sum` accumulates the signed outcome products
// (no-click contributes 0); `nonzero` counts rounds with all parties clicking
// (after the postselection map, when active).
struct BucketCounts {
  std::array<std::uint64_t, 8> rounds{};
  std::array<std::int64_t, 8> sum{};
  std::array<std::uint64_t, 8> nonzero{};
};

struct SvetlichnyEstimate {
  Estimate s_abc; // eight-term combination
  Estimate chsh;  // s_abc / 2, the value entering the adversary bound
};

// Signed combination of the bucket means with binomial standard errors summed
// in quadrature. Throws std::domain_error listing empty buckets.
SvetlichnyEstimate svetlichny_estimator(const BucketCounts& counts);

struct SimulationReport {
  std::uint64_t n_rounds = 0;
  std::uint64_t seed = 0;

  std::uint64_t key_rounds = 0;
  std::uint64_t test_rounds = 0;
  std::uint64_t discard_rounds = 0;
  double fraction_key = 0.0;
  double fraction_test = 0.0;
  double fraction_discard = 0.0;

  std::uint64_t qber_sampled_rounds = 0;
  std::uint64_t qber_errors = 0;
  std::optional<Estimate> qber; // absent when no key round was sampled
  bool qber_undefined = false;

  BucketCounts buckets;
  std::optional<Estimate> s_abc; // absent when any bucket is empty
  std::optional<Estimate> chsh;
  std::vector<std::string> empty_buckets; // e.g. "A2B3C1"

  // Devetak-Winter rate from the empirical delta and Bell value; absent when
  // either estimate is missing. The Bell value is clamped to the quantum
  // bound first (chsh_clamped records that).
  std::optional<double> estimated_rate;
  bool chsh_clamped = false;
};

// Simulator over an explicit three-qubit state. Tables are precomputed once
// from the exact outcome distributions.
class Simulator {
 public:
  Simulator(const DensityMatrix& rho, double eta, StrategyConfig strategy,
            SimulateOptions options = {});

  RoundRecord round(std::uint64_t seed, std::uint64_t index) const;
  SimulationReport run(std::uint64_t n_rounds, std::uint64_t seed) const;

  const OutcomeTableSet& tables() const { return tables_; }
  const StrategyConfig& strategy() const { return strategy_; }

 private:
  StrategyConfig strategy_;
  SimulateOptions options_;
  OutcomeTableSet tables_;
  std::vector<OutcomeSampler> samplers_; // indexed like OutcomeTableSet
};

// Simulate the protocol channel: composed source and white noise state at
// params' fidelities, loss at params' eta, params' strategy.
SimulationReport simulate(const ProtocolParams& params, std::uint64_t n_rounds,
                          std::uint64_t seed,
                          const SimulateOptions& options = {});

// Simulate an arbitrary input state (e.g. a pure GHZ variant).
SimulationReport simulate_state(const DensityMatrix& rho, double eta,
                                const StrategyConfig& strategy,
                                std::uint64_t n_rounds, std::uint64_t seed,
                                const SimulateOptions& options = {});

// --- analytic cross-check ----------------------------------------------------

struct ValidationCheck {
  std::string quantity;
  double analytic = 0.0;
  double empirical = 0.0;
  double std_error = 0.0;
  double sigmas = 0.0; // |empirical - analytic| / std_error; inf if SE = 0
  bool pass = false;
};

struct ValidationReport {
  SimulationReport sim;
  ValidationCheck qber_check;
  ValidationCheck chsh_check;
  double k_sigma = 4.0;
  bool pass = false;
  std::string detail; // names the offending quantity on failure
};

// Runs simulate() and compares empirical QBER and Bell value against the
// closed forms. A check passes when |difference| <= k_sigma * SE; when the
// standard error is zero the values must agree exactly.
ValidationReport validate_against_analytic(const ProtocolParams& params,
                                           std::uint64_t n_rounds,
                                           std::uint64_t seed,
                                           double k_sigma = 4.0,
                                           const SimulateOptions& options = {});

} // namespace diqss
