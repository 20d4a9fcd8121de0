#include "locq/qinfo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace locq {

// --------------------------------------------------------------------------
// DensityMatrix / BipartiteDims
// --------------------------------------------------------------------------

DensityMatrix::DensityMatrix(CMatrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1)
    throw std::invalid_argument("DensityMatrix: matrix must be square");
  if (!is_hermitian(matrix_))
    throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
  if (std::abs(matrix_.trace().real() - 1.0) > tol::trace_one ||
      std::abs(matrix_.trace().imag()) > tol::trace_one)
    throw std::invalid_argument("DensityMatrix: trace is not 1");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(matrix_, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < tol::psd_floor)
    throw std::invalid_argument("DensityMatrix: matrix is not positive semidefinite");
}

double DensityMatrix::purity() const { return (matrix_ * matrix_).trace().real(); }

BipartiteDims::BipartiteDims(Index a, Index b) : n_a(a), n_b(b) {
  if (n_a < 2 || n_b < 2) throw std::invalid_argument("BipartiteDims: local dimensions must be >= 2");
}

// --------------------------------------------------------------------------
// Canonical states
// --------------------------------------------------------------------------

CMatrix pauli_x() {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

CMatrix pauli_y() {
  CMatrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}

CMatrix pauli_z() {
  CMatrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

CVector basis_ket(Index dim, Index k) {
  CVector v = CVector::Zero(dim);
  v(k) = 1.0;
  return v;
}

CVector bell_vector(Bell which) {
  const double s = 1.0 / std::sqrt(2.0);
  CVector v = CVector::Zero(4);
  switch (which) {
    case Bell::PhiPlus:  v(0) = s; v(3) = s;  break;
    case Bell::PhiMinus: v(0) = s; v(3) = -s; break;
    case Bell::PsiPlus:  v(1) = s; v(2) = s;  break;
    case Bell::PsiMinus: v(1) = s; v(2) = -s; break;
  }
  return v;
}

DensityMatrix bell_state(Bell which) {
  const CVector v = bell_vector(which);
  return DensityMatrix(v * v.adjoint());
}

DensityMatrix r_state(double p, Bell sign) {
  if (!(p > 0.0) || p > 1.0) throw std::invalid_argument("r_state: p must lie in (0, 1]");
  if (sign != Bell::PsiPlus && sign != Bell::PsiMinus)
    throw std::invalid_argument("r_state: sign must be PsiPlus or PsiMinus");
  const CVector bell = bell_vector(sign);
  const CVector noise = basis_ket(4, 3);
  return DensityMatrix(p * (bell * bell.adjoint()) + (1.0 - p) * (noise * noise.adjoint()));
}

DensityMatrix rho_s(double p) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("rho_s: p must lie in [0, 1]");
  const CVector bell = bell_vector(Bell::PsiPlus);
  const CVector noise = basis_ket(4, 1);
  return DensityMatrix(p * (bell * bell.adjoint()) + (1.0 - p) * (noise * noise.adjoint()));
}

PaperTestStates paper_test_states() {
  const double s2 = std::sqrt(2.0);
  CMatrix star = CMatrix::Zero(4, 4);
  star(1, 1) = 3.0 - 2.0 * s2;
  star(1, 2) = 1.0 - s2;
  star(2, 1) = 1.0 - s2;
  star(2, 2) = 1.0;
  star(3, 3) = 2.0 * s2 - 2.0;
  star *= 0.5;

  CMatrix ab(4, 4);
  ab <<  0.30, -0.11,  0.19,  0.14,
        -0.11,  0.24, -0.11,  0.15,
         0.19, -0.11,  0.14,  0.03,
         0.14,  0.15,  0.03,  0.32;

  return PaperTestStates{DensityMatrix(star), DensityMatrix(ab)};
}

double fidelity_with_pure(const DensityMatrix& rho, const CMatrix& psi) {
  if (psi.rows() != rho.dim() || psi.cols() != rho.dim())
    throw std::invalid_argument("fidelity_with_pure: dimension mismatch");
  if (max_abs(psi * psi - psi) > 1e-9 || std::abs(psi.trace().real() - 1.0) > 1e-9 ||
      !is_hermitian(psi, 1e-9))
    throw std::invalid_argument("fidelity_with_pure: psi is not a rank-1 projector");
  return (rho.matrix() * psi).trace().real();
}

// --------------------------------------------------------------------------
// Fully entangled fraction
// --------------------------------------------------------------------------

namespace {

// Magic basis: every maximally entangled two-qubit state is a real unit
// combination of these vectors, up to a global phase.
std::array<CVector, 4> magic_basis() {
  const Complex i(0, 1);
  std::array<CVector, 4> m;
  m[0] = bell_vector(Bell::PhiPlus);
  m[1] = i * bell_vector(Bell::PhiMinus);
  m[2] = i * bell_vector(Bell::PsiPlus);
  m[3] = bell_vector(Bell::PsiMinus);
  return m;
}

// Nearest unitary (polar factor) of an almost-unitary 2x2 matrix.
CMatrix unitarize(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

} // namespace

FefResult max_bell_overlap(const DensityMatrix& rho, Bell target) {
  if (rho.dim() != 4) throw std::invalid_argument("fef: state must be two-qubit");
  const auto magic = magic_basis();
  Eigen::Matrix4d re_m;
  for (int j = 0; j < 4; ++j)
    for (int k = 0; k < 4; ++k)
      re_m(j, k) = (magic[j].adjoint() * rho.matrix() * magic[k]).value().real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> solver(0.5 * (re_m + re_m.transpose()));
  const double value = solver.eigenvalues()(3);
  const Eigen::Vector4d mu = solver.eigenvectors().col(3);

  // The optimal maximally entangled state and its 2x2 coefficient matrix C,
  // |Phi*> = sum C_ij |ij>. C is unitary up to the 1/sqrt(2) scale.
  CVector phi = CVector::Zero(4);
  for (int j = 0; j < 4; ++j) phi += mu(j) * magic[j];
  CMatrix coeff(2, 2);
  coeff << phi(0), phi(1), phi(2), phi(3);
  const CMatrix v = unitarize(std::sqrt(2.0) * coeff);

  // (Ua (x) Ub)|bell> has coefficient matrix Ua B Ub^T / sqrt(2); with Ub = I
  // the choice Ua = V B^dag lands exactly on |Phi*>.
  CMatrix b_coeff(2, 2);
  switch (target) {
    case Bell::PhiPlus:  b_coeff = CMatrix::Identity(2, 2); break;
    case Bell::PhiMinus: b_coeff = pauli_z(); break;
    case Bell::PsiPlus:  b_coeff = pauli_x(); break;
    case Bell::PsiMinus: b_coeff << 0, 1, -1, 0; break;
  }
  FefResult out;
  out.value = value;
  out.u_a = v * b_coeff.adjoint();
  out.u_b = CMatrix::Identity(2, 2);
  return out;
}

FefResult fef(const DensityMatrix& rho) { return max_bell_overlap(rho, Bell::PhiPlus); }

double concurrence(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::invalid_argument("concurrence: state must be two-qubit");
  const CMatrix yy = kron(pauli_y(), pauli_y());
  const CMatrix flipped = yy * rho.matrix().conjugate() * yy;

  // sqrt(rho) keeps all spectra Hermitian; R = sqrt(rho) rho~ sqrt(rho) is PSD
  // and shares the squared Wootters eigenvalues with rho rho~.
  const Eigensystem es = hermitian_eigensystem(rho.matrix());
  CMatrix sqrt_rho = CMatrix::Zero(4, 4);
  for (int k = 0; k < 4; ++k) {
    const double lam = std::max(0.0, es.eigenvalues(k));
    sqrt_rho += std::sqrt(lam) * es.eigenvectors.col(k) * es.eigenvectors.col(k).adjoint();
  }
  const CMatrix r = sqrt_rho * flipped * sqrt_rho;
  const Eigensystem er = hermitian_eigensystem(0.5 * (r + r.adjoint()));
  std::array<double, 4> lambda{};
  for (int k = 0; k < 4; ++k) lambda[k] = std::sqrt(std::max(0.0, er.eigenvalues(k)));
  std::sort(lambda.begin(), lambda.end(), std::greater<double>());
  return std::max(0.0, lambda[0] - lambda[1] - lambda[2] - lambda[3]);
}

// --------------------------------------------------------------------------
// Random ensembles
// --------------------------------------------------------------------------

DensityMatrix random_density_matrix(Index dim, Rng& rng) {
  if (dim < 2) throw std::invalid_argument("random_density_matrix: dim must be >= 2");
  const CMatrix g = random_complex_gaussian(dim, dim, rng);
  CMatrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityMatrix(std::move(w));
}

namespace {

DensityMatrix random_real_density_matrix(Index dim, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix g(dim, dim);
  for (Index i = 0; i < dim; ++i)
    for (Index j = 0; j < dim; ++j) g(i, j) = gauss(rng);
  CMatrix w = g * g.adjoint();
  w /= w.trace().real();
  return DensityMatrix(std::move(w));
}

} // namespace

std::vector<DensityMatrix> sample_weakly_entangled(Index count, Rng& rng,
                                                   const SampleConstraints& constraints) {
  if (count < 1) throw std::invalid_argument("sample_weakly_entangled: count must be >= 1");
  constexpr long budget = 1000000;
  std::vector<DensityMatrix> out;
  out.reserve(static_cast<size_t>(count));
  for (long draws = 0; draws < budget && static_cast<Index>(out.size()) < count; ++draws) {
    DensityMatrix rho = constraints.real_valued ? random_real_density_matrix(4, rng)
                                                : random_density_matrix(4, rng);
    if (constraints.entangled && concurrence(rho) <= 1e-6) continue;
    if (fef(rho).value >= constraints.fef_below) continue;
    out.push_back(std::move(rho));
  }
  if (static_cast<Index>(out.size()) < count)
    throw SamplingBudgetError("sample_weakly_entangled: draw budget exceeded");
  return out;
}

LocalChannelPoint amplitude_damping_local(double gamma, Side side) {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("amplitude_damping_local: gamma must lie in [0, 1]");
  CMatrix k0(2, 2), k1(2, 2);
  k0 << 1, 0, 0, std::sqrt(1.0 - gamma);
  k1 << 0, std::sqrt(gamma), 0, 0;
  const KrausSet damping(2, {k0, k1});
  const KrausSet identity(2, {CMatrix::Identity(2, 2)});
  const StiefelPoint damp_point = kraus_to_stiefel(damping);
  const StiefelPoint id_point = kraus_to_stiefel(identity);
  return side == Side::A ? LocalChannelPoint(damp_point, id_point)
                         : LocalChannelPoint(id_point, damp_point);
}

CMatrix partial_trace(const CMatrix& m, const std::vector<Index>& dims,
                      const std::vector<Index>& keep) {
  Index total = 1;
  for (Index d : dims) total *= d;
  if (m.rows() != total || m.cols() != total)
    throw std::invalid_argument("partial_trace: matrix does not match factor dimensions");
  for (size_t i = 1; i < keep.size(); ++i)
    if (keep[i] <= keep[i - 1]) throw std::invalid_argument("partial_trace: keep must be ascending");

  std::vector<bool> kept(dims.size(), false);
  Index keep_dim = 1, trace_dim = 1;
  for (Index k : keep) {
    if (k < 0 || k >= static_cast<Index>(dims.size()))
      throw std::invalid_argument("partial_trace: keep index out of range");
    kept[static_cast<size_t>(k)] = true;
    keep_dim *= dims[static_cast<size_t>(k)];
  }
  for (size_t i = 0; i < dims.size(); ++i)
    if (!kept[i]) trace_dim *= dims[i];

  // strides of each factor in the flat index
  std::vector<Index> stride(dims.size());
  Index acc = 1;
  for (size_t i = dims.size(); i-- > 0;) {
    stride[i] = acc;
    acc *= dims[i];
  }

  auto flat_index = [&](Index keep_multi, Index trace_multi) {
    Index flat = 0;
    for (size_t i = dims.size(); i-- > 0;) {
      const Index d = dims[i];
      Index digit;
      if (kept[i]) {
        digit = keep_multi % d;
        keep_multi /= d;
      } else {
        digit = trace_multi % d;
        trace_multi /= d;
      }
      flat += digit * stride[i];
    }
    return flat;
  };

  CMatrix out = CMatrix::Zero(keep_dim, keep_dim);
  for (Index r = 0; r < keep_dim; ++r)
    for (Index c = 0; c < keep_dim; ++c) {
      Complex sum = 0.0;
      for (Index t = 0; t < trace_dim; ++t) sum += m(flat_index(r, t), flat_index(c, t));
      out(r, c) = sum;
    }
  return out;
}

} // namespace locq
