#include "diqss/qstate.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace diqss {

namespace {

int qubits_for_dim(int dim, const char* what) {
  switch (dim) {
    case 2: return 1;
    case 4: return 2;
    case 8: return 3;
    default:
      throw std::domain_error(std::string(what) +
                              ": dimension must be 2, 4 or 8, got " +
                              std::to_string(dim));
  }
}

void require_hermitian(const Matrix& m, const char* what) {
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kAlgebraTol) {
    throw std::domain_error(std::string(what) + ": matrix is not Hermitian");
  }
}

} // namespace

Ket::Ket(Vector amplitudes) : v_(std::move(amplitudes)) {
  qubits_for_dim(dim(), "Ket");
  const double norm = v_.norm();
  if (std::abs(norm - 1.0) > kAlgebraTol) {
    throw std::domain_error("Ket: amplitudes are not normalized (|norm-1| = " +
                            std::to_string(std::abs(norm - 1.0)) + ")");
  }
}

int Ket::qubits() const { return qubits_for_dim(dim(), "Ket"); }

DensityMatrix::DensityMatrix(Matrix rho) : m_(std::move(rho)) {
  if (m_.rows() != m_.cols()) {
    throw std::domain_error("DensityMatrix: matrix is not square");
  }
  qubits_for_dim(dim(), "DensityMatrix");
  require_hermitian(m_, "DensityMatrix");
  if (std::abs(m_.trace().real() - 1.0) > kAlgebraTol ||
      std::abs(m_.trace().imag()) > kAlgebraTol) {
    throw std::domain_error("DensityMatrix: trace is not 1");
  }
  // Hermitian by the check above, so the spectrum is real.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < kPsdTol) {
    throw std::domain_error(
        "DensityMatrix: negative eigenvalue " +
        std::to_string(solver.eigenvalues().minCoeff()));
  }
}

DensityMatrix::DensityMatrix(const Ket& psi)
    : DensityMatrix(Matrix(psi.amplitudes() * psi.amplitudes().adjoint())) {}

int DensityMatrix::qubits() const {
  return qubits_for_dim(dim(), "DensityMatrix");
}

Observable::Observable(Matrix op) : m_(std::move(op)) {
  if (m_.rows() != m_.cols()) {
    throw std::domain_error("Observable: matrix is not square");
  }
  require_hermitian(m_, "Observable");
}

Ket ghz(int variant, int sign) {
  if (variant < 1 || variant > 4) {
    throw std::domain_error("ghz: variant must be in 1..4, got " +
                            std::to_string(variant));
  }
  if (sign != 1 && sign != -1) {
    throw std::domain_error("ghz: sign must be +1 or -1");
  }
  // First basis index per variant; the partner ket is its bitwise complement.
  static constexpr int kFirst[4] = {0, 1, 2, 4}; // |HHH>,|HHV>,|HVH>,|VHH>
  const int i = kFirst[variant - 1];
  Vector v = Vector::Zero(8);
  const double amp = 1.0 / std::sqrt(2.0);
  v(i) = Complex(amp, 0.0);
  v(7 - i) = Complex(sign * amp, 0.0);
  return Ket(std::move(v));
}

Observable equatorial_observable(double theta) {
  if (!std::isfinite(theta)) {
    throw std::domain_error("equatorial_observable: angle must be finite");
  }
  // cos(t) sigma_x + sin(t) sigma_y = [[0, e^{-it}], [e^{it}, 0]].
  Matrix m(2, 2);
  m(0, 0) = Complex(0, 0);
  m(0, 1) = std::exp(Complex(0, -theta));
  m(1, 0) = std::exp(Complex(0, theta));
  m(1, 1) = Complex(0, 0);
  return Observable(std::move(m));
}

Matrix equatorial_projector(double theta, int outcome) {
  if (outcome != 1 && outcome != -1) {
    throw std::domain_error("equatorial_projector: outcome must be +1 or -1");
  }
  const Matrix e = equatorial_observable(theta).matrix();
  return 0.5 * (Matrix::Identity(2, 2) + static_cast<double>(outcome) * e);
}

Matrix tensor(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Matrix tensor(const Matrix& a, const Matrix& b, const Matrix& c) {
  return tensor(tensor(a, b), c);
}

namespace {

template <typename StateT>
Matrix mixture_matrix(const std::vector<double>& weights,
                      const std::vector<StateT>& states,
                      const Matrix& (*as_matrix)(const StateT&, Matrix&)) {
  if (weights.size() != states.size() || states.empty()) {
    throw std::domain_error("mix: weights and states must match and be nonempty");
  }
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::domain_error("mix: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > kAlgebraTol) {
    throw std::domain_error("mix: weights sum to " + std::to_string(sum) +
                            ", expected 1");
  }
  Matrix scratch;
  const Matrix& first = as_matrix(states[0], scratch);
  Matrix acc = Matrix::Zero(first.rows(), first.cols());
  for (size_t i = 0; i < states.size(); ++i) {
    Matrix s2;
    const Matrix& mi = as_matrix(states[i], s2);
    if (mi.rows() != acc.rows()) {
      throw std::domain_error("mix: states have mismatched dimensions");
    }
    acc += weights[i] * mi;
  }
  return acc;
}

const Matrix& ket_matrix(const Ket& k, Matrix& scratch) {
  scratch = k.amplitudes() * k.amplitudes().adjoint();
  return scratch;
}

const Matrix& dm_matrix(const DensityMatrix& d, Matrix&) { return d.matrix(); }

} // namespace

DensityMatrix mix(const std::vector<double>& weights,
                  const std::vector<Ket>& states) {
  return DensityMatrix(mixture_matrix(weights, states, &ket_matrix));
}

DensityMatrix mix(const std::vector<double>& weights,
                  const std::vector<DensityMatrix>& states) {
  return DensityMatrix(mixture_matrix(weights, states, &dm_matrix));
}

double expectation(const DensityMatrix& rho, const Observable& obs) {
  if (rho.dim() != obs.dim()) {
    throw std::domain_error("expectation: dimension mismatch (state " +
                            std::to_string(rho.dim()) + ", observable " +
                            std::to_string(obs.dim()) + ")");
  }
  const Complex tr = (rho.matrix() * obs.matrix()).trace();
  if (std::abs(tr.imag()) > 1e-10) {
    throw std::domain_error("expectation: non-real trace, imag = " +
                            std::to_string(tr.imag()));
  }
  return tr.real();
}

DensityMatrix partial_trace(const DensityMatrix& rho,
                            const std::vector<int>& traced) {
  const int n = rho.qubits();
  unsigned traced_mask = 0;
  for (int q : traced) {
    if (q < 0 || q >= n) {
      throw std::domain_error("partial_trace: qubit index out of range");
    }
    traced_mask |= 1u << (n - 1 - q); // qubit 0 owns the most significant bit
  }
  const int kept = n - static_cast<int>(traced.size());
  if (kept < 1) {
    throw std::domain_error("partial_trace: must keep at least one qubit");
  }

  // Positions (bit offsets) of kept bits, most significant first.
  std::vector<int> kept_bits;
  for (int b = n - 1; b >= 0; --b) {
    if (!(traced_mask & (1u << b))) kept_bits.push_back(b);
  }
  const int out_dim = 1 << kept;
  const int tr_dim = 1 << static_cast<int>(traced.size());
  std::vector<int> traced_bits;
  for (int b = n - 1; b >= 0; --b) {
    if (traced_mask & (1u << b)) traced_bits.push_back(b);
  }

  auto full_index = [&](int kept_part, int traced_part) {
    int idx = 0;
    for (int i = 0; i < kept; ++i) {
      if (kept_part & (1 << (kept - 1 - i))) idx |= 1 << kept_bits[i];
    }
    for (size_t i = 0; i < traced_bits.size(); ++i) {
      if (traced_part & (1 << (static_cast<int>(traced_bits.size()) - 1 -
                               static_cast<int>(i)))) {
        idx |= 1 << traced_bits[i];
      }
    }
    return idx;
  };

  Matrix out = Matrix::Zero(out_dim, out_dim);
  for (int i = 0; i < out_dim; ++i) {
    for (int j = 0; j < out_dim; ++j) {
      Complex sum(0, 0);
      for (int t = 0; t < tr_dim; ++t) {
        sum += rho.matrix()(full_index(i, t), full_index(j, t));
      }
      out(i, j) = sum;
    }
  }
  return DensityMatrix(std::move(out));
}

bool squares_to_identity(const Observable& obs, double tol) {
  const Matrix sq = obs.matrix() * obs.matrix();
  return (sq - Matrix::Identity(obs.dim(), obs.dim())).cwiseAbs().maxCoeff() <=
         tol;
}

} // namespace diqss
