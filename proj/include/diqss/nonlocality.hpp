#pragma once

// CHSH and Svetlichny polynomials for the GHZ protocol's measurement grid.
//
// The protocol grid is 2x3x2: Alice {A1,A2}, Bob {B1,B2,B3}, Charlie {C1,C2},
// all equatorial. B1 pairs with A1/C1 for key generation; the eight test
// combinations use Bob's B2/B3. The Svetlichny polynomial decomposes into two
// CHSH blocks, one per Charlie basis:
//
//   S_ABC = <S_AB c1> + <S'_AB c2>,
//   S_AB  = <a1 b2> + <a2 b2> + <a1 b3> - <a2 b3>,
//   S'_AB = <a2 b3> + <a2 b2> + <a1 b3> - <a1 b2>.
//
// Conditioned on Charlie's basis and outcome, the certified CHSH value is
//   basis C1: S = c1 * S_AB(collapsed),  basis C2: S = c2 * S'_AB(collapsed);
// for the noiseless GHZ state every branch evaluates to +2*sqrt(2) and the
// total reaches 4*sqrt(2).

#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include "diqss/qstate.hpp"

namespace diqss {

// Angles for one basis choice per party.
struct SettingTriple {
  double alice;
  double bob;
  double charlie;
};

// The full 2x3x2 grid of equatorial angles.
struct SettingGrid {
  std::array<double, 2> alice;   // A1, A2
  std::array<double, 3> bob;     // B1, B2, B3
  std::array<double, 2> charlie; // C1, C2

  // A1=B1=C1=E(0), A2=E(pi/2), B2=E(-pi/4), B3=E(pi/4), C2=E(-pi/2).
  static SettingGrid protocol();

  SettingTriple triple(int i, int j, int k) const; // 1-based indices
};

// CHSH input: the four pairwise correlators. Entries may be missing when
// built from incomplete empirical data; chsh()/chsh_prime() then throw.
struct PairCorrelators {
  std::optional<double> a1b2, a2b2, a1b3, a2b3;
};

// Three-party correlators indexed by (i in {1,2}, j in {2,3}, k in {1,2}).
class CorrelatorSet {
 public:
  void set(int i, int j, int k, double value);
  bool has(int i, int j, int k) const;
  double at(int i, int j, int k) const; // throws std::domain_error if missing

 private:
  static int slot(int i, int j, int k);
  std::array<std::optional<double>, 8> values_;
};

// <E(a) x E(b) x E(c)> on a three-qubit state.
double correlator(const DensityMatrix& rho, const SettingTriple& angles);

// <E(a) x E(b)> on a two-qubit state.
double pair_correlator(const DensityMatrix& rho, double theta_a,
                       double theta_b);

// CHSH polynomials on a two-qubit state (angles default to the protocol's).
double chsh(const DensityMatrix& rho, double a1 = 0.0,
            double a2 = M_PI / 2, double b2 = -M_PI / 4, double b3 = M_PI / 4);
double chsh_prime(const DensityMatrix& rho, double a1 = 0.0,
                  double a2 = M_PI / 2, double b2 = -M_PI / 4,
                  double b3 = M_PI / 4);
double chsh(const PairCorrelators& c);
double chsh_prime(const PairCorrelators& c);

// Sign of the <a_i b_j c_k> term in the Svetlichny combination;
// i, k in {1,2}, j in {2,3}.
int svetlichny_sign(int i, int j, int k);

// Svetlichny polynomial: eight signed three-party correlators.
double svetlichny(const DensityMatrix& rho,
                  const SettingGrid& grid = SettingGrid::protocol());
double svetlichny(const CorrelatorSet& correlators);

// Charlie's measurement collapse: probability of `outcome` in basis E(theta)
// and the normalized post-measurement state of Alice+Bob. The state is absent
// when the branch has zero probability.
struct CharlieBranch {
  double probability;
  std::optional<DensityMatrix> state;
};
CharlieBranch collapse_on_charlie(const DensityMatrix& rho, double theta,
                                  int outcome);

// Signed CHSH value certified by one (Charlie basis, outcome) branch, from
// the exact state. charlie_basis is 1 or 2; outcome is +1 or -1.
double conditioned_chsh(const DensityMatrix& rho, int charlie_basis,
                        int outcome,
                        const SettingGrid& grid = SettingGrid::protocol());

// Both sides of the decomposition identity, computed through independent
// code paths: lhs = svetlichny(rho); rhs = sum over Charlie branches of
// P(branch) * outcome * CHSH(collapsed state).
std::pair<double, double> decomposition_check(
    const DensityMatrix& rho, const SettingGrid& grid = SettingGrid::protocol());

} // namespace diqss
