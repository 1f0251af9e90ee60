#include "diqss/noisemodel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace diqss {

namespace {

constexpr double kTableTol = 1e-10;

void require_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw std::domain_error(std::string(name) + " must lie in [0,1], got " +
                            std::to_string(x));
  }
}

} // namespace

Outcome3 OutcomeTable::outcome_at(int index) {
  if (index < 0 || index >= 27) {
    throw std::domain_error("OutcomeTable: index out of range");
  }
  return {static_cast<Trit>(index / 9), static_cast<Trit>((index / 3) % 3),
          static_cast<Trit>(index % 3)};
}

double OutcomeTable::all_click_probability() const {
  double p = 0.0;
  for (Trit a : {Trit::Plus, Trit::Minus}) {
    for (Trit b : {Trit::Plus, Trit::Minus}) {
      for (Trit c : {Trit::Plus, Trit::Minus}) {
        p += at(a, b, c);
      }
    }
  }
  return p;
}

double OutcomeTable::no_click_marginal(int party) const {
  if (party < 0 || party > 2) {
    throw std::domain_error("OutcomeTable: party must be 0, 1 or 2");
  }
  double p = 0.0;
  for (int idx = 0; idx < 27; ++idx) {
    const Outcome3 o = outcome_at(idx);
    if (o[party] == Trit::NoClick) p += probs[idx];
  }
  return p;
}

void validate_outcome_table(const OutcomeTable& table) {
  double sum = 0.0;
  for (double p : table.probs) {
    if (p < -kTableTol || p > 1.0 + kTableTol) {
      throw std::domain_error("OutcomeTable: probability out of range: " +
                              std::to_string(p));
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kTableTol) {
    throw std::domain_error("OutcomeTable: probabilities sum to " +
                            std::to_string(sum));
  }
  for (int party = 0; party < 3; ++party) {
    const double marginal = table.no_click_marginal(party);
    if (std::abs(marginal - (1.0 - table.efficiency)) > kTableTol) {
      throw std::domain_error(
          "OutcomeTable: no-click marginal of party " + std::to_string(party) +
          " is " + std::to_string(marginal) + ", expected " +
          std::to_string(1.0 - table.efficiency));
    }
  }
}

const OutcomeTable& OutcomeTableSet::at(int i, int j, int k) const {
  if (i < 1 || i > 2 || j < 1 || j > 3 || k < 1 || k > 2) {
    throw std::domain_error("OutcomeTableSet: basis index out of range");
  }
  return tables[(i - 1) * 6 + (j - 1) * 2 + (k - 1)];
}

OutcomeTable& OutcomeTableSet::at(int i, int j, int k) {
  return const_cast<OutcomeTable&>(
      static_cast<const OutcomeTableSet&>(*this).at(i, j, k));
}

DensityMatrix white_noise_state(double fidelity) {
  require_unit_interval(fidelity, "white_noise_state: fidelity");
  const Ket g = ghz(1, +1);
  Matrix m = fidelity * (g.amplitudes() * g.amplitudes().adjoint());
  m += (1.0 - fidelity) / 8.0 * Matrix::Identity(8, 8);
  return DensityMatrix(std::move(m));
}

DensityMatrix composed_state(double fidelity, double source_fidelity) {
  require_unit_interval(fidelity, "composed_state: fidelity");
  require_unit_interval(source_fidelity, "composed_state: source fidelity");
  const Ket plus = ghz(1, +1);
  const Ket minus = ghz(1, -1);
  Matrix m =
      fidelity * (source_fidelity *
                      (plus.amplitudes() * plus.amplitudes().adjoint()) +
                  (1.0 - source_fidelity) *
                      (minus.amplitudes() * minus.amplitudes().adjoint()));
  m += (1.0 - fidelity) / 8.0 * Matrix::Identity(8, 8);
  return DensityMatrix(std::move(m));
}

double compose_source(double source_fidelity, double fidelity) {
  require_unit_interval(source_fidelity, "compose_source: source fidelity");
  require_unit_interval(fidelity, "compose_source: fidelity");
  return fidelity * (2.0 * source_fidelity - 1.0);
}

OutcomeTable outcome_table(const DensityMatrix& rho, double efficiency,
                           const SettingTriple& basis) {
  require_unit_interval(efficiency, "outcome_table: efficiency");
  if (rho.dim() != 8) {
    throw std::domain_error("outcome_table: expected a three-qubit state");
  }
  const double angles[3] = {basis.alice, basis.bob, basis.charlie};
  // Per-party POVM element for each trit value.
  std::array<std::array<Matrix, 3>, 3> element;
  for (int party = 0; party < 3; ++party) {
    element[party][static_cast<int>(Trit::Plus)] =
        efficiency * equatorial_projector(angles[party], +1);
    element[party][static_cast<int>(Trit::Minus)] =
        efficiency * equatorial_projector(angles[party], -1);
    element[party][static_cast<int>(Trit::NoClick)] =
        (1.0 - efficiency) * Matrix::Identity(2, 2);
  }
  OutcomeTable table;
  table.basis = basis;
  table.efficiency = efficiency;
  for (int idx = 0; idx < 27; ++idx) {
    const Outcome3 o = OutcomeTable::outcome_at(idx);
    const Matrix povm = tensor(element[0][static_cast<int>(o[0])],
                               element[1][static_cast<int>(o[1])],
                               element[2][static_cast<int>(o[2])]);
    table.probs[idx] = (rho.matrix() * povm).trace().real();
  }
  validate_outcome_table(table);
  return table;
}

OutcomeTableSet outcome_table_set(const DensityMatrix& rho, double efficiency,
                                  const SettingGrid& grid) {
  OutcomeTableSet set;
  set.grid = grid;
  for (int i = 1; i <= 2; ++i) {
    for (int j = 1; j <= 3; ++j) {
      for (int k = 1; k <= 2; ++k) {
        set.at(i, j, k) = outcome_table(rho, efficiency, grid.triple(i, j, k));
      }
    }
  }
  return set;
}

std::vector<MixedStateBranch> full_mixed_state_description(
    const ChannelParams& channel) {
  require_unit_interval(channel.fidelity, "full_mixed_state_description: F");
  require_unit_interval(channel.efficiency, "full_mixed_state_description: eta");
  const double eta = channel.efficiency;
  const double etabar = 1.0 - eta;
  const DensityMatrix noisy =
      composed_state(channel.fidelity, channel.source_fidelity);

  std::vector<MixedStateBranch> branches;
  branches.reserve(8);
  // All eight click patterns, Alice = bit 2, Bob = bit 1, Charlie = bit 0.
  for (int pattern = 7; pattern >= 0; --pattern) {
    MixedStateBranch branch;
    branch.clicked = {(pattern & 4) != 0, (pattern & 2) != 0,
                      (pattern & 1) != 0};
    int clicks = 0;
    std::vector<int> lost;
    for (int party = 0; party < 3; ++party) {
      if (branch.clicked[party]) {
        ++clicks;
      } else {
        lost.push_back(party);
      }
    }
    branch.weight = std::pow(eta, clicks) * std::pow(etabar, 3 - clicks);
    if (branch.weight == 0.0) continue;
    if (clicks == 3) {
      branch.state = noisy;
    } else if (clicks > 0) {
      branch.state = partial_trace(noisy, lost);
    }
    branches.push_back(std::move(branch));
  }
  return branches;
}

OutcomeTable table_from_branches(const std::vector<MixedStateBranch>& branches,
                                 const SettingTriple& basis) {
  const double angles[3] = {basis.alice, basis.bob, basis.charlie};
  OutcomeTable table;
  table.basis = basis;
  double weight_sum = 0.0;
  double no_click = 0.0;
  for (const MixedStateBranch& branch : branches) {
    weight_sum += branch.weight;
    no_click += branch.clicked[0] ? 0.0 : branch.weight;
    for (int idx = 0; idx < 27; ++idx) {
      const Outcome3 o = OutcomeTable::outcome_at(idx);
      // The branch contributes only to outcomes whose no-click pattern
      // matches its click pattern exactly.
      bool compatible = true;
      for (int party = 0; party < 3; ++party) {
        if (branch.clicked[party] != (o[party] != Trit::NoClick)) {
          compatible = false;
          break;
        }
      }
      if (!compatible) continue;
      double born = 1.0;
      if (branch.state) {
        Matrix proj = Matrix::Identity(1, 1);
        for (int party = 0; party < 3; ++party) {
          if (!branch.clicked[party]) continue;
          proj = tensor(proj, equatorial_projector(angles[party],
                                                   trit_sign(o[party])));
        }
        born = (branch.state->matrix() * proj).trace().real();
      }
      table.probs[idx] += branch.weight * born;
    }
  }
  if (std::abs(weight_sum - 1.0) > kTableTol) {
    throw std::domain_error("table_from_branches: branch weights sum to " +
                            std::to_string(weight_sum));
  }
  table.efficiency = 1.0 - no_click;
  validate_outcome_table(table);
  return table;
}

double conditioned_S(const OutcomeTableSet& tables, int charlie_outcome,
                     int charlie_basis) {
  if (charlie_outcome != 1 && charlie_outcome != -1) {
    throw std::domain_error("conditioned_S: outcome must be +1 or -1");
  }
  if (charlie_basis != 1 && charlie_basis != 2) {
    throw std::domain_error("conditioned_S: Charlie basis must be 1 or 2");
  }
  const Trit c = charlie_outcome == 1 ? Trit::Plus : Trit::Minus;

  PairCorrelators corr;
  double click_rate = 0.0;
  for (int i = 1; i <= 2; ++i) {
    for (int j = 2; j <= 3; ++j) {
      const OutcomeTable& t = tables.at(i, j, charlie_basis);
      click_rate += t.all_click_probability();
      double numerator = 0.0;
      double conditioned_mass = 0.0;
      for (Trit a : {Trit::Plus, Trit::Minus}) {
        for (Trit b : {Trit::Plus, Trit::Minus}) {
          const double p = t.at(a, b, c);
          numerator += trit_sign(a) * trit_sign(b) * p;
          conditioned_mass += p;
        }
      }
      if (conditioned_mass <= 0.0) {
        throw std::domain_error(
            "conditioned_S: empty conditioning subset for basis A" +
            std::to_string(i) + "B" + std::to_string(j) + "C" +
            std::to_string(charlie_basis) + ", outcome " +
            std::to_string(charlie_outcome));
      }
      const double value = numerator / conditioned_mass;
      if (i == 1 && j == 2) corr.a1b2 = value;
      if (i == 2 && j == 2) corr.a2b2 = value;
      if (i == 1 && j == 3) corr.a1b3 = value;
      if (i == 2 && j == 3) corr.a2b3 = value;
    }
  }
  click_rate /= 4.0;
  const double combo =
      charlie_basis == 1 ? chsh(corr) : chsh_prime(corr);
  return charlie_outcome * combo * click_rate;
}

} // namespace diqss
