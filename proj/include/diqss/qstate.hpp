#pragma once

// Qubit-register states and observables for the three-party GHZ protocol.
//
// Conventions used throughout the library:
//   |H> = |0> = (1,0)^T,  |V> = |1> = (0,1)^T.
//   A three-qubit basis ket |abc> (a = Alice, b = Bob, c = Charlie) maps to
//   index a*4 + b*2 + c, i.e. amplitudes are ordered |HHH>, |HHV>, ..., |VVV>.
//   Equatorial observable E(theta) = cos(theta) sigma_x + sin(theta) sigma_y;
//   its +1 eigenvector is (|H> + e^{i theta}|V>)/sqrt(2).

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace diqss {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

// Tolerances shared by the state-validity checks.
inline constexpr double kAlgebraTol = 1e-12;     // norm / hermiticity / trace
inline constexpr double kPsdTol = -1e-10;        // eigenvalue floor
inline constexpr double kMeasurementTol = 1e-10; // O^2 = I slack

// Pure state on 1..3 qubits (dimension 2, 4 or 8). Normalized on construction.
class Ket {
 public:
  explicit Ket(Vector amplitudes);

  int dim() const { return static_cast<int>(v_.size()); }
  int qubits() const;
  const Vector& amplitudes() const { return v_; }
  Complex amplitude(int index) const { return v_(index); }

 private:
  Vector v_;
};

// Hermitian, unit-trace, positive-semidefinite matrix on 1..3 qubits.
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix rho);
  explicit DensityMatrix(const Ket& psi); // |psi><psi|

  int dim() const { return static_cast<int>(m_.rows()); }
  int qubits() const;
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

// Hermitian operator. Measurement observables additionally square to the
// identity; that property is checked by squares_to_identity(), not the ctor,
// because mixtures and sums of observables are legitimate intermediates.
class Observable {
 public:
  explicit Observable(Matrix op);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }

 private:
  Matrix m_;
};

// The eight GHZ basis states. variant in {1,2,3,4}, sign in {+1,-1}:
//   1: (|HHH> +- |VVV>)/sqrt2     2: (|HHV> +- |VVH>)/sqrt2
//   3: (|HVH> +- |VHV>)/sqrt2     4: (|VHH> +- |HVV>)/sqrt2
Ket ghz(int variant, int sign);

// E(theta) as a single-qubit measurement observable.
Observable equatorial_observable(double theta);

// Projector onto the +1 or -1 eigenspace of E(theta).
Matrix equatorial_projector(double theta, int outcome);

Matrix tensor(const Matrix& a, const Matrix& b);
Matrix tensor(const Matrix& a, const Matrix& b, const Matrix& c);

// Convex mixture of states. Weights must be nonnegative and sum to 1
// within kAlgebraTol.
DensityMatrix mix(const std::vector<double>& weights,
                  const std::vector<Ket>& states);
DensityMatrix mix(const std::vector<double>& weights,
                  const std::vector<DensityMatrix>& states);

// Tr[rho O]. Throws std::domain_error if O is not Hermitian or the dimensions
// disagree; the trace's imaginary part must vanish within 1e-10.
double expectation(const DensityMatrix& rho, const Observable& obs);

// Trace out the qubits listed in `traced` (0 = most significant / Alice).
DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& traced);

bool squares_to_identity(const Observable& obs, double tol = kMeasurementTol);

} // namespace diqss
