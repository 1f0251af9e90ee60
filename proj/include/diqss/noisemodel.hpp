#pragma once

// Channel models: white noise (GHZ fidelity F), independent photon loss
// (per-party click probability eta), and the phase-flip-only source
// imperfection (source fidelity F_s).
//
// Measurement records are trits: +1, -1, or "no click". A full round outcome
// is one trit per party; an OutcomeTable holds the 27-entry distribution for
// one basis triple. Loss is basis-independent: each party's no-click marginal
// equals 1 - eta regardless of the settings.

#include <array>
#include <optional>
#include <vector>

#include "diqss/nonlocality.hpp"
#include "diqss/qstate.hpp"

namespace diqss {

struct ChannelParams {
  double fidelity = 1.0;        // F: weight of the GHZ component
  double efficiency = 1.0;      // eta: per-party click probability
  double source_fidelity = 1.0; // F_s: weight of GHZ+ inside the source
};

enum class Trit : int8_t { Plus = 0, Minus = 1, NoClick = 2 };

inline int trit_sign(Trit t) {
  return t == Trit::Plus ? 1 : (t == Trit::Minus ? -1 : 0);
}

using Outcome3 = std::array<Trit, 3>;

// Joint outcome distribution for one basis triple.
struct OutcomeTable {
  SettingTriple basis{};
  double efficiency = 1.0;
  std::array<double, 27> probs{}; // index = 9*alice + 3*bob + charlie

  static int index(Trit a, Trit b, Trit c) {
    return 9 * static_cast<int>(a) + 3 * static_cast<int>(b) +
           static_cast<int>(c);
  }
  static Outcome3 outcome_at(int index);

  double at(Trit a, Trit b, Trit c) const { return probs[index(a, b, c)]; }
  double& at(Trit a, Trit b, Trit c) { return probs[index(a, b, c)]; }

  // Probability that every party clicked.
  double all_click_probability() const;
  // Probability that the given party (0=Alice, 1=Bob, 2=Charlie) saw no click.
  double no_click_marginal(int party) const;
};

// Throws std::domain_error unless probabilities are a distribution (within
// 1e-10) and each party's no-click marginal equals 1 - efficiency.
void validate_outcome_table(const OutcomeTable& table);

// All twelve basis triples of the protocol grid, indexed 1-based as
// (alice i, bob j, charlie k).
struct OutcomeTableSet {
  SettingGrid grid;
  std::array<OutcomeTable, 12> tables;

  const OutcomeTable& at(int i, int j, int k) const;
  OutcomeTable& at(int i, int j, int k);
};

// F |GHZ_1^+><GHZ_1^+| + (1-F)/8 * I. The white-noise term equals the uniform
// mixture of all eight GHZ projectors.
DensityMatrix white_noise_state(double fidelity);

// Source with phase-flip imperfection, then white-noise transmission:
// F * (F_s GHZ_1^+ + (1-F_s) GHZ_1^-) + (1-F)/8 * I.
DensityMatrix composed_state(double fidelity, double source_fidelity);

// Effective fidelity F_comb = F * (2 F_s - 1): the white-noise fidelity whose
// QBER and Svetlichny value match the composed state's.
double compose_source(double source_fidelity, double fidelity);

// Exact outcome distribution for one basis triple under independent loss:
// per-party POVM {eta P_+, eta P_-, (1-eta) I}.
OutcomeTable outcome_table(const DensityMatrix& rho, double efficiency,
                           const SettingTriple& basis);

OutcomeTableSet outcome_table_set(const DensityMatrix& rho, double efficiency,
                                  const SettingGrid& grid = SettingGrid::protocol());

// The loss channel written as a mixture over click patterns: the all-click
// branch keeps the noisy three-qubit state, partial-click branches carry the
// reduced states of the clicked parties, and the vacuum branch has no state.
struct MixedStateBranch {
  double weight = 0.0;
  std::array<bool, 3> clicked{};        // which parties clicked
  std::optional<DensityMatrix> state;   // dimension 2^(#clicked); absent for vacuum
};

std::vector<MixedStateBranch> full_mixed_state_description(
    const ChannelParams& channel);

// Outcome distribution induced by a branch decomposition; must coincide with
// outcome_table() for the same channel.
OutcomeTable table_from_branches(const std::vector<MixedStateBranch>& branches,
                                 const SettingTriple& basis);

// Empirical counterpart of conditioned_chsh(): signed CHSH value from the
// outcome tables of one Charlie basis, conditioned on his outcome and on all
// three parties clicking, scaled by the observed three-click rate. Throws
// std::domain_error naming the branch if the conditioning subset is empty.
double conditioned_S(const OutcomeTableSet& tables, int charlie_outcome,
                     int charlie_basis);

} // namespace diqss
