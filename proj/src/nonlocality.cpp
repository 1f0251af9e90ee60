#include "diqss/nonlocality.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace diqss {

SettingGrid SettingGrid::protocol() {
  SettingGrid g;
  g.alice = {0.0, M_PI / 2};
  g.bob = {0.0, -M_PI / 4, M_PI / 4};
  g.charlie = {0.0, -M_PI / 2};
  return g;
}

SettingTriple SettingGrid::triple(int i, int j, int k) const {
  if (i < 1 || i > 2 || j < 1 || j > 3 || k < 1 || k > 2) {
    throw std::domain_error("SettingGrid::triple: basis index out of range");
  }
  return {alice[i - 1], bob[j - 1], charlie[k - 1]};
}

int CorrelatorSet::slot(int i, int j, int k) {
  if (i < 1 || i > 2 || j < 2 || j > 3 || k < 1 || k > 2) {
    throw std::domain_error("CorrelatorSet: index (" + std::to_string(i) +
                            "," + std::to_string(j) + "," + std::to_string(k) +
                            ") outside the 2x{2,3}x2 test grid");
  }
  return (i - 1) * 4 + (j - 2) * 2 + (k - 1);
}

void CorrelatorSet::set(int i, int j, int k, double value) {
  values_[slot(i, j, k)] = value;
}

bool CorrelatorSet::has(int i, int j, int k) const {
  return values_[slot(i, j, k)].has_value();
}

double CorrelatorSet::at(int i, int j, int k) const {
  const auto& v = values_[slot(i, j, k)];
  if (!v) {
    throw std::domain_error("CorrelatorSet: missing correlator A" +
                            std::to_string(i) + "B" + std::to_string(j) +
                            "C" + std::to_string(k));
  }
  return *v;
}

double correlator(const DensityMatrix& rho, const SettingTriple& angles) {
  if (rho.dim() != 8) {
    throw std::domain_error("correlator: expected a three-qubit state");
  }
  const Observable joint(tensor(equatorial_observable(angles.alice).matrix(),
                                equatorial_observable(angles.bob).matrix(),
                                equatorial_observable(angles.charlie).matrix()));
  return expectation(rho, joint);
}

double pair_correlator(const DensityMatrix& rho, double theta_a,
                       double theta_b) {
  if (rho.dim() != 4) {
    throw std::domain_error("pair_correlator: expected a two-qubit state");
  }
  const Observable joint(tensor(equatorial_observable(theta_a).matrix(),
                                equatorial_observable(theta_b).matrix()));
  return expectation(rho, joint);
}

double chsh(const DensityMatrix& rho, double a1, double a2, double b2,
            double b3) {
  return pair_correlator(rho, a1, b2) + pair_correlator(rho, a2, b2) +
         pair_correlator(rho, a1, b3) - pair_correlator(rho, a2, b3);
}

double chsh_prime(const DensityMatrix& rho, double a1, double a2, double b2,
                  double b3) {
  return pair_correlator(rho, a2, b3) + pair_correlator(rho, a2, b2) +
         pair_correlator(rho, a1, b3) - pair_correlator(rho, a1, b2);
}

namespace {

double req(const std::optional<double>& v, const char* name) {
  if (!v) {
    throw std::domain_error(std::string("chsh: missing correlator ") + name);
  }
  return *v;
}

} // namespace

double chsh(const PairCorrelators& c) {
  return req(c.a1b2, "a1b2") + req(c.a2b2, "a2b2") + req(c.a1b3, "a1b3") -
         req(c.a2b3, "a2b3");
}

double chsh_prime(const PairCorrelators& c) {
  return req(c.a2b3, "a2b3") + req(c.a2b2, "a2b2") + req(c.a1b3, "a1b3") -
         req(c.a1b2, "a1b2");
}

int svetlichny_sign(int i, int j, int k) {
  if (i < 1 || i > 2 || j < 2 || j > 3 || k < 1 || k > 2) {
    throw std::domain_error("svetlichny_sign: index (" + std::to_string(i) +
                            "," + std::to_string(j) + "," + std::to_string(k) +
                            ") outside the 2x{2,3}x2 test grid");
  }
  // Negative terms: -<a2 b3 c1> in the <S_AB c1> block, -<a1 b2 c2> in the
  // <S'_AB c2> block.
  if (k == 1) return (i == 2 && j == 3) ? -1 : 1;
  return (i == 1 && j == 2) ? -1 : 1;
}

double svetlichny(const DensityMatrix& rho, const SettingGrid& g) {
  double total = 0.0;
  for (int i : {1, 2}) {
    for (int j : {2, 3}) {
      for (int k : {1, 2}) {
        total += svetlichny_sign(i, j, k) * correlator(rho, g.triple(i, j, k));
      }
    }
  }
  return total;
}

double svetlichny(const CorrelatorSet& c) {
  double total = 0.0;
  for (int i : {1, 2}) {
    for (int j : {2, 3}) {
      for (int k : {1, 2}) {
        total += svetlichny_sign(i, j, k) * c.at(i, j, k);
      }
    }
  }
  return total;
}

CharlieBranch collapse_on_charlie(const DensityMatrix& rho, double theta,
                                  int outcome) {
  if (rho.dim() != 8) {
    throw std::domain_error("collapse_on_charlie: expected a three-qubit state");
  }
  const Matrix proj = tensor(Matrix::Identity(4, 4),
                             equatorial_projector(theta, outcome));
  const Matrix projected = proj * rho.matrix() * proj;
  const double p = projected.trace().real();
  CharlieBranch branch{p, std::nullopt};
  if (p > 1e-15) {
    // Unnormalized two-qubit block: trace out Charlie (qubit index 2).
    const DensityMatrix normalized(Matrix(projected / p));
    branch.state = partial_trace(normalized, {2});
  }
  return branch;
}

double conditioned_chsh(const DensityMatrix& rho, int charlie_basis,
                        int outcome, const SettingGrid& g) {
  if (charlie_basis != 1 && charlie_basis != 2) {
    throw std::domain_error("conditioned_chsh: Charlie basis must be 1 or 2");
  }
  if (outcome != 1 && outcome != -1) {
    throw std::domain_error("conditioned_chsh: outcome must be +1 or -1");
  }
  const CharlieBranch branch =
      collapse_on_charlie(rho, g.charlie[charlie_basis - 1], outcome);
  if (!branch.state) {
    throw std::domain_error("conditioned_chsh: branch C" +
                            std::to_string(charlie_basis) + " outcome " +
                            std::to_string(outcome) + " has zero probability");
  }
  const double value =
      charlie_basis == 1
          ? chsh(*branch.state, g.alice[0], g.alice[1], g.bob[1], g.bob[2])
          : chsh_prime(*branch.state, g.alice[0], g.alice[1], g.bob[1],
                       g.bob[2]);
  return outcome * value;
}

std::pair<double, double> decomposition_check(const DensityMatrix& rho,
                                              const SettingGrid& g) {
  const double lhs = svetlichny(rho, g);
  double rhs = 0.0;
  for (int basis : {1, 2}) {
    for (int outcome : {1, -1}) {
      const CharlieBranch branch =
          collapse_on_charlie(rho, g.charlie[basis - 1], outcome);
      if (!branch.state) continue;
      const double block =
          basis == 1 ? chsh(*branch.state, g.alice[0], g.alice[1], g.bob[1],
                            g.bob[2])
                     : chsh_prime(*branch.state, g.alice[0], g.alice[1],
                                  g.bob[1], g.bob[2]);
      rhs += branch.probability * outcome * block;
    }
  }
  return {lhs, rhs};
}

} // namespace diqss
