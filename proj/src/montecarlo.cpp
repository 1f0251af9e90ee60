#include "diqss/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace diqss {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t draw_key(std::uint64_t seed, std::uint64_t round,
                       std::uint64_t purpose) {
  std::uint64_t x = splitmix64(seed);
  x = splitmix64(x ^ round);
  x = splitmix64(x ^ (purpose * 0xd1342543de82ef95ULL));
  return x;
}

double uniform01(std::uint64_t key) {
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

OutcomeSampler::OutcomeSampler(const OutcomeTable& table) {
  validate_outcome_table(table);
  double acc = 0.0;
  for (int idx = 0; idx < 27; ++idx) {
    acc += table.probs[idx];
    cumulative_[idx] = acc;
  }
  cumulative_[26] = 1.0; // close the CDF against rounding in the sum
}

Outcome3 OutcomeSampler::sample(double u) const {
  const auto it =
      std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const int idx = std::min<int>(
      26, static_cast<int>(std::distance(cumulative_.begin(), it)));
  return OutcomeTable::outcome_at(idx);
}

namespace {

int table_index(int i, int j, int k) {
  return (i - 1) * 6 + (j - 1) * 2 + (k - 1);
}

int bucket_index(int i, int j, int k) {
  return (i - 1) * 4 + (j - 2) * 2 + (k - 1);
}

std::string bucket_label(int i, int j, int k) {
  return "A" + std::to_string(i) + "B" + std::to_string(j) + "C" +
         std::to_string(k);
}

template <std::size_t N>
int pick_basis(const std::array<double, N>& probs, double u) {
  double acc = 0.0;
  for (std::size_t idx = 0; idx + 1 < N; ++idx) {
    acc += probs[idx];
    if (u < acc) return static_cast<int>(idx) + 1;
  }
  return static_cast<int>(N);
}

template <std::size_t N>
void validate_probs(const std::array<double, N>& probs, const char* who) {
  double sum = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) {
      throw std::domain_error(std::string(who) +
                              " basis probabilities must be nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw std::domain_error(std::string(who) +
                            " basis probabilities must sum to 1");
  }
}

void validate_options(const SimulateOptions& options) {
  if (options.workers < 1) {
    throw std::domain_error("worker count must be at least 1");
  }
  if (!(options.key_sample_fraction >= 0.0 &&
        options.key_sample_fraction <= 1.0)) {
    throw std::domain_error("key sample fraction must lie in [0, 1]");
  }
  validate_probs(options.alice_basis_probs, "Alice");
  validate_probs(options.bob_basis_probs, "Bob");
  validate_probs(options.charlie_basis_probs, "Charlie");
}

SiftCase classify(int i, int j, int k) {
  if (i == 1 && j == 1 && k == 1) return SiftCase::Key;
  if (j == 1) return SiftCase::Discard;
  return SiftCase::Test;
}

bool any_no_click(const Outcome3& o) {
  return o[0] == Trit::NoClick || o[1] == Trit::NoClick ||
         o[2] == Trit::NoClick;
}

int outcome_product(const Outcome3& o) {
  return trit_sign(o[0]) * trit_sign(o[1]) * trit_sign(o[2]);
}

struct Accum {
  std::uint64_t key = 0;
  std::uint64_t test = 0;
  std::uint64_t discard = 0;
  std::uint64_t qber_n = 0;
  std::uint64_t qber_err = 0;
  BucketCounts buckets;

  void merge(const Accum& other) {
    key += other.key;
    test += other.test;
    discard += other.discard;
    qber_n += other.qber_n;
    qber_err += other.qber_err;
    for (int b = 0; b < 8; ++b) {
      buckets.rounds[b] += other.buckets.rounds[b];
      buckets.sum[b] += other.buckets.sum[b];
      buckets.nonzero[b] += other.buckets.nonzero[b];
    }
  }
};

} // namespace

SvetlichnyEstimate svetlichny_estimator(const BucketCounts& counts) {
  std::string missing;
  for (int i : {1, 2}) {
    for (int j : {2, 3}) {
      for (int k : {1, 2}) {
        if (counts.rounds[bucket_index(i, j, k)] == 0) {
          if (!missing.empty()) missing += ", ";
          missing += bucket_label(i, j, k);
        }
      }
    }
  }
  if (!missing.empty()) {
    throw std::domain_error("empty test buckets: " + missing);
  }
  double value = 0.0;
  double variance = 0.0;
  for (int i : {1, 2}) {
    for (int j : {2, 3}) {
      for (int k : {1, 2}) {
        const int b = bucket_index(i, j, k);
        const double n = static_cast<double>(counts.rounds[b]);
        const double mean = static_cast<double>(counts.sum[b]) / n;
        const double second_moment =
            static_cast<double>(counts.nonzero[b]) / n;
        value += svetlichny_sign(i, j, k) * mean;
        variance += std::max(0.0, second_moment - mean * mean) / n;
      }
    }
  }
  SvetlichnyEstimate est;
  est.s_abc = {value, std::sqrt(variance)};
  est.chsh = {value / 2.0, std::sqrt(variance) / 2.0};
  return est;
}

Simulator::Simulator(const DensityMatrix& rho, double eta,
                     StrategyConfig strategy, SimulateOptions options)
    : strategy_(strategy), options_(options) {
  validate_strategy(strategy_);
  validate_options(options_);
  tables_ = outcome_table_set(rho, eta);
  samplers_.reserve(12);
  for (int i : {1, 2}) {
    for (int j : {1, 2, 3}) {
      for (int k : {1, 2}) {
        samplers_.emplace_back(tables_.at(i, j, k));
      }
    }
  }
}

RoundRecord Simulator::round(std::uint64_t seed, std::uint64_t index) const {
  RoundRecord r;
  r.alice_basis = pick_basis(options_.alice_basis_probs,
                             uniform01(draw_key(seed, index, kDrawAliceBasis)));
  r.bob_basis = pick_basis(options_.bob_basis_probs,
                           uniform01(draw_key(seed, index, kDrawBobBasis)));
  r.charlie_basis =
      pick_basis(options_.charlie_basis_probs,
                 uniform01(draw_key(seed, index, kDrawCharlieBasis)));
  const int ti = table_index(r.alice_basis, r.bob_basis, r.charlie_basis);
  r.raw = samplers_[static_cast<std::size_t>(ti)].sample(
      uniform01(draw_key(seed, index, kDrawOutcome)));
  r.sift = classify(r.alice_basis, r.bob_basis, r.charlie_basis);

  bool flip = false;
  if (r.sift == SiftCase::Key && strategy_.preprocesses()) {
    flip = uniform01(draw_key(seed, index, kDrawFlip)) < strategy_.q;
  }
  r.flip_drawn = flip;
  r.processed = apply_strategy(r.raw, r.sift, strategy_, flip);

  if (r.sift == SiftCase::Key) {
    // Base error: any lost photon or odd parity, on the postselection-mapped
    // record; Alice's flip toggles the indicator (her lost-photon rounds have
    // no bit to flip, but discarding the flip there would bias the rate).
    const Outcome3 mapped =
        strategy_.postselects() ? postselect_map(r.raw) : r.raw;
    const bool base_error = any_no_click(mapped) || outcome_product(mapped) < 0;
    r.error = base_error != flip;
  }
  if (!any_no_click(r.processed)) {
    r.key_bits = std::array<int, 3>{r.processed[0] == Trit::Minus ? 1 : 0,
                                    r.processed[1] == Trit::Minus ? 1 : 0,
                                    r.processed[2] == Trit::Minus ? 1 : 0};
  }
  return r;
}

SimulationReport Simulator::run(std::uint64_t n_rounds,
                                std::uint64_t seed) const {
  if (n_rounds < 1) {
    throw std::domain_error("simulation needs at least one round");
  }

  const auto process = [&](std::uint64_t lo, std::uint64_t hi) {
    Accum acc;
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      const RoundRecord r = round(seed, idx);
      switch (r.sift) {
        case SiftCase::Key: {
          acc.key += 1;
          bool sampled = options_.key_sample_fraction >= 1.0;
          if (!sampled && options_.key_sample_fraction > 0.0) {
            sampled = uniform01(draw_key(seed, idx, kDrawQberSample)) <
                      options_.key_sample_fraction;
          }
          if (sampled) {
            acc.qber_n += 1;
            acc.qber_err += r.error ? 1 : 0;
          }
          break;
        }
        case SiftCase::Discard:
          acc.discard += 1;
          break;
        case SiftCase::Test: {
          acc.test += 1;
          const int b = bucket_index(r.alice_basis, r.bob_basis,
                                     r.charlie_basis);
          const int product = outcome_product(r.processed);
          acc.buckets.rounds[b] += 1;
          acc.buckets.sum[b] += product;
          acc.buckets.nonzero[b] += product != 0 ? 1 : 0;
          break;
        }
      }
    }
    return acc;
  };

  Accum total;
  const int workers =
      static_cast<int>(std::min<std::uint64_t>(
          static_cast<std::uint64_t>(options_.workers), n_rounds));
  if (workers <= 1) {
    total = process(0, n_rounds);
  } else {
    std::vector<Accum> parts(static_cast<std::size_t>(workers));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      const std::uint64_t lo =
          n_rounds * static_cast<std::uint64_t>(w) / workers;
      const std::uint64_t hi =
          n_rounds * (static_cast<std::uint64_t>(w) + 1) / workers;
      threads.emplace_back(
          [&, w, lo, hi] { parts[static_cast<std::size_t>(w)] = process(lo, hi); });
    }
    for (auto& t : threads) t.join();
    for (const auto& part : parts) total.merge(part);
  }

  SimulationReport report;
  report.n_rounds = n_rounds;
  report.seed = seed;
  report.key_rounds = total.key;
  report.test_rounds = total.test;
  report.discard_rounds = total.discard;
  const double n = static_cast<double>(n_rounds);
  report.fraction_key = static_cast<double>(total.key) / n;
  report.fraction_test = static_cast<double>(total.test) / n;
  report.fraction_discard = static_cast<double>(total.discard) / n;

  report.qber_sampled_rounds = total.qber_n;
  report.qber_errors = total.qber_err;
  if (total.qber_n > 0) {
    const double p = static_cast<double>(total.qber_err) /
                     static_cast<double>(total.qber_n);
    const double se =
        std::sqrt(p * (1.0 - p) / static_cast<double>(total.qber_n));
    report.qber = Estimate{p, se};
  } else {
    report.qber_undefined = true;
  }

  report.buckets = total.buckets;
  bool buckets_complete = true;
  for (int i : {1, 2}) {
    for (int j : {2, 3}) {
      for (int k : {1, 2}) {
        if (total.buckets.rounds[bucket_index(i, j, k)] == 0) {
          report.empty_buckets.push_back(bucket_label(i, j, k));
          buckets_complete = false;
        }
      }
    }
  }
  if (buckets_complete) {
    const SvetlichnyEstimate est = svetlichny_estimator(total.buckets);
    report.s_abc = est.s_abc;
    report.chsh = est.chsh;
  }

  if (report.qber && report.chsh) {
    double s = report.chsh->value;
    if (s > kQuantumChsh) {
      s = kQuantumChsh;
      report.chsh_clamped = true;
    }
    const EveBound eb = strategy_.preprocesses()
                            ? eve_bound_preprocessed(s, strategy_.q)
                            : eve_bound(s);
    report.estimated_rate = eb.bits - binary_entropy(report.qber->value);
  }
  return report;
}

SimulationReport simulate(const ProtocolParams& params, std::uint64_t n_rounds,
                          std::uint64_t seed, const SimulateOptions& options) {
  validate_params(params);
  const DensityMatrix rho =
      composed_state(params.fidelity, params.source_fidelity);
  Simulator sim(rho, params.eta, params.strategy, options);
  return sim.run(n_rounds, seed);
}

SimulationReport simulate_state(const DensityMatrix& rho, double eta,
                                const StrategyConfig& strategy,
                                std::uint64_t n_rounds, std::uint64_t seed,
                                const SimulateOptions& options) {
  Simulator sim(rho, eta, strategy, options);
  return sim.run(n_rounds, seed);
}

namespace {

ValidationCheck make_check(const std::string& quantity, double analytic,
                           const std::optional<Estimate>& est,
                           double k_sigma) {
  ValidationCheck check;
  check.quantity = quantity;
  check.analytic = analytic;
  if (!est) {
    check.empirical = std::numeric_limits<double>::quiet_NaN();
    check.std_error = 0.0;
    check.sigmas = std::numeric_limits<double>::infinity();
    check.pass = false;
    return check;
  }
  check.empirical = est->value;
  check.std_error = est->std_error;
  const double diff = std::abs(est->value - analytic);
  if (est->std_error == 0.0) {
    check.sigmas = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    check.pass = diff == 0.0;
  } else {
    check.sigmas = diff / est->std_error;
    check.pass = diff <= k_sigma * est->std_error;
  }
  return check;
}

} // namespace

ValidationReport validate_against_analytic(const ProtocolParams& params,
                                           std::uint64_t n_rounds,
                                           std::uint64_t seed, double k_sigma,
                                           const SimulateOptions& options) {
  if (!(k_sigma > 0.0)) {
    throw std::domain_error("k_sigma must be positive");
  }
  ValidationReport report;
  report.k_sigma = k_sigma;
  report.sim = simulate(params, n_rounds, seed, options);
  const RateBreakdown analytic = key_rate(params);
  report.qber_check = make_check("qber", analytic.delta, report.sim.qber,
                                 k_sigma);
  report.chsh_check = make_check("chsh", analytic.chsh, report.sim.chsh,
                                 k_sigma);
  report.pass = report.qber_check.pass && report.chsh_check.pass;
  if (!report.pass) {
    std::string detail;
    if (!report.qber_check.pass) {
      detail += report.sim.qber ? "qber outside the statistical band"
                                : "qber undefined (no sampled key rounds)";
    }
    if (!report.chsh_check.pass) {
      if (!detail.empty()) detail += "; ";
      detail += report.sim.chsh ? "chsh outside the statistical band"
                                : "chsh undefined (empty test buckets)";
    }
    report.detail = detail;
  }
  return report;
}

} // namespace diqss
