#include "locq/objectives.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace locq {

// --------------------------------------------------------------------------
// Observable containers
// --------------------------------------------------------------------------

ObservableSet::ObservableSet(std::vector<CMatrix> ops) : operators(std::move(ops)) {
  if (operators.empty()) throw std::invalid_argument("ObservableSet: empty set");
  for (const CMatrix& m : operators) {
    if (!is_hermitian(m, 1e-12))
      throw std::invalid_argument("ObservableSet: operator is not Hermitian");
    const double norm2 = (m.adjoint() * m).trace().real();
    if (std::abs(norm2 - 1.0) > 1e-12)
      throw std::invalid_argument("ObservableSet: operator is not unit Hilbert-Schmidt norm");
  }
}

ObservableSet tomographic_pauli_set() {
  const std::array<CMatrix, 4> paulis = {CMatrix::Identity(2, 2), pauli_x(), pauli_y(), pauli_z()};
  std::vector<CMatrix> ops;
  for (int mu = 0; mu < 4; ++mu)
    for (int nu = 0; nu < 4; ++nu) {
      if (mu == 0 && nu == 0) continue;
      ops.push_back(0.5 * kron(paulis[mu], paulis[nu]));
    }
  return ObservableSet(std::move(ops));
}

ObservableSet r_state_observables(Bell sign) {
  const CVector bell = bell_vector(sign);
  const CVector noise = basis_ket(4, 3);
  const CMatrix bb = bell * bell.adjoint();
  const CMatrix nn = noise * noise.adjoint();
  const CMatrix cross = bell * noise.adjoint(); // |Psi><11|
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i(0, 1);
  return ObservableSet({nn, bb, i * s * (cross - cross.adjoint()), s * (cross + cross.adjoint())});
}

LiftedObservable::LiftedObservable(CMatrix base_in) : base(std::move(base_in)) {
  if (!is_hermitian(base))
    throw std::invalid_argument("LiftedObservable: base observable is not Hermitian");
  const Index n = base.rows();
  lifted = kron(CMatrix::Identity(n * n, n * n), base);
}

// --------------------------------------------------------------------------
// Matrix-level forms
// --------------------------------------------------------------------------

double expectation_trace(const CMatrix& s, const CMatrix& rho, const CMatrix& a) {
  return (s.adjoint() * (a * (s * rho))).trace().real();
}

CMatrix ambient_gradient(const CMatrix& s, const CMatrix& rho, const CMatrix& a) {
  return 2.0 * (a * (s * rho));
}

CMatrix rotate_to_tensor_frame(const CMatrix& op, const std::vector<Index>& sigma) {
  const Index n = op.rows();
  if (op.cols() != n || n != static_cast<Index>(sigma.size()))
    throw std::invalid_argument("rotate_to_tensor_frame: dimension mismatch");
  const std::vector<Index> inv = invert_permutation(sigma);
  CMatrix out(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = 0; c < n; ++c) out(r, c) = op(inv[static_cast<size_t>(r)], inv[static_cast<size_t>(c)]);
  return out;
}

// --------------------------------------------------------------------------
// Expectation objective
// --------------------------------------------------------------------------

namespace {

void check_lift(const LiftedObservable& o, Index stacked_rows, Index system_dim) {
  if (o.system_dim() != system_dim || o.lifted.rows() != stacked_rows)
    throw std::invalid_argument("objective: observable dimension mismatch");
}

} // namespace

double expectation_value(const StiefelPoint& s, const LiftedObservable& o,
                         const DensityMatrix& rho) {
  check_lift(o, s.n(), s.l());
  if (rho.dim() != s.l()) throw std::invalid_argument("expectation_value: state dimension mismatch");
  const Complex t = (s.matrix().adjoint() * (o.lifted * (s.matrix() * rho.matrix()))).trace();
  if (std::abs(t.imag()) > 1e-10)
    throw std::runtime_error("expectation_value: imaginary residue above tolerance");
  return t.real();
}

CMatrix expectation_gradient(const StiefelPoint& s, const LiftedObservable& o,
                             const DensityMatrix& rho) {
  check_lift(o, s.n(), s.l());
  if (rho.dim() != s.l())
    throw std::invalid_argument("expectation_gradient: state dimension mismatch");
  return ambient_gradient(s.matrix(), rho.matrix(), o.lifted);
}

double local_expectation(const LocalChannelPoint& c, const LiftedObservable& o,
                         const DensityMatrix& rho) {
  check_lift(o, c.s_a().n() * c.s_b().n(), c.joint_dim());
  if (rho.dim() != c.joint_dim())
    throw std::invalid_argument("local_expectation: state dimension mismatch");
  const CMatrix rotated = rotate_to_tensor_frame(o.lifted, c.sigma());
  return expectation_trace(c.product_matrix(), rho.matrix(), rotated);
}

CMatrix local_gradient_raw(const LocalChannelPoint& c, const LiftedObservable& o,
                           const DensityMatrix& rho) {
  check_lift(o, c.s_a().n() * c.s_b().n(), c.joint_dim());
  if (rho.dim() != c.joint_dim())
    throw std::invalid_argument("local_gradient_raw: state dimension mismatch");
  const CMatrix rotated = rotate_to_tensor_frame(o.lifted, c.sigma());
  return ambient_gradient(c.product_matrix(), rho.matrix(), rotated);
}

// --------------------------------------------------------------------------
// Locality-preserving projections
// --------------------------------------------------------------------------

CMatrix project_factor_b(const CMatrix& g, const LocalChannelPoint& c) {
  const CMatrix& sa = c.s_a().matrix();
  const Index nb = c.s_b().n(), lb = c.s_b().l();
  if (g.rows() != sa.rows() * nb || g.cols() != sa.cols() * lb)
    throw std::invalid_argument("project_factor_b: gradient shape mismatch");
  CMatrix mb = CMatrix::Zero(nb, lb);
  for (Index p = 0; p < sa.rows(); ++p)
    for (Index q = 0; q < sa.cols(); ++q)
      mb.noalias() += std::conj(sa(p, q)) * g.block(p * nb, q * lb, nb, lb);
  return mb / sa.squaredNorm();
}

CMatrix project_factor_a(const CMatrix& g, const LocalChannelPoint& c) {
  const CMatrix& sb = c.s_b().matrix();
  const Index na = c.s_a().n(), la = c.s_a().l();
  const Index nb = sb.rows(), lb = sb.cols();
  if (g.rows() != na * nb || g.cols() != la * lb)
    throw std::invalid_argument("project_factor_a: gradient shape mismatch");
  CMatrix ma(na, la);
  for (Index p = 0; p < na; ++p)
    for (Index q = 0; q < la; ++q)
      ma(p, q) = sb.conjugate().cwiseProduct(g.block(p * nb, q * lb, nb, lb)).sum();
  return ma / sb.squaredNorm();
}

std::pair<TangentVector, TangentVector> local_projected_gradients(const LocalChannelPoint& c,
                                                                  const CMatrix& g) {
  const CMatrix ma = project_factor_a(g, c);
  const CMatrix mb = project_factor_b(g, c);
  return {project_to_tangent(c.s_a(), ma), project_to_tangent(c.s_b(), mb)};
}

// --------------------------------------------------------------------------
// Block evaluation pipeline shared by the objective classes
// --------------------------------------------------------------------------

namespace {

// Per-point products needed by every objective: the stacked Kraus blocks
// S_b (rows sigma[b d + p] of kron(S_A, S_B)) and V_b = S_b rho.
struct BlockProducts {
  CMatrix s_tilde;
  std::vector<CMatrix> s_blocks;
  std::vector<CMatrix> v_blocks;
};

BlockProducts block_products(const LocalChannelPoint& c, const CMatrix& rho) {
  BlockProducts out;
  out.s_tilde = c.product_matrix();
  const Index d = c.joint_dim();
  const auto& sigma = c.sigma();
  out.s_blocks.reserve(static_cast<size_t>(c.block_count()));
  out.v_blocks.reserve(static_cast<size_t>(c.block_count()));
  for (Index b = 0; b < c.block_count(); ++b) {
    CMatrix sb(d, d);
    for (Index p = 0; p < d; ++p) sb.row(p) = out.s_tilde.row(sigma[static_cast<size_t>(b * d + p)]);
    out.v_blocks.push_back(sb * rho);
    out.s_blocks.push_back(std::move(sb));
  }
  return out;
}

// U_sigma^dag applied to the stacked gradient blocks: scatters block rows back
// into the tensor row ordering.
CMatrix assemble_raw_gradient(const LocalChannelPoint& c, const std::vector<CMatrix>& grad_blocks) {
  const Index d = c.joint_dim();
  const auto& sigma = c.sigma();
  CMatrix raw(c.s_a().n() * c.s_b().n(), d);
  for (Index b = 0; b < c.block_count(); ++b)
    for (Index p = 0; p < d; ++p)
      raw.row(sigma[static_cast<size_t>(b * d + p)]) = grad_blocks[static_cast<size_t>(b)].row(p);
  return raw;
}

ObjectiveValueAndGradient finish_evaluation(const LocalChannelPoint& c, double value,
                                            const std::vector<CMatrix>& grad_blocks) {
  ObjectiveValueAndGradient out;
  out.value = value;
  out.raw_gradient = assemble_raw_gradient(c, grad_blocks);
  out.grad_a = project_to_tangent_raw(c.s_a().matrix(), project_factor_a(out.raw_gradient, c));
  out.grad_b = project_to_tangent_raw(c.s_b().matrix(), project_factor_b(out.raw_gradient, c));
  if (!out.grad_a.allFinite() || !out.grad_b.allFinite() || !std::isfinite(out.value))
    throw NonFiniteError("objective: non-finite value or gradient");
  return out;
}

void check_local_inputs(const LocalChannelPoint& c, const LiftedObservable& o,
                        const DensityMatrix& rho, const char* who) {
  if (o.system_dim() != c.joint_dim() || rho.dim() != c.joint_dim())
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

} // namespace

// --------------------------------------------------------------------------
// LocalExpectationObjective
// --------------------------------------------------------------------------

LocalExpectationObjective::LocalExpectationObjective(LiftedObservable o, DensityMatrix rho)
    : observable_(std::move(o)), rho_(std::move(rho)) {}

double LocalExpectationObjective::value(const LocalChannelPoint& c) const {
  check_local_inputs(c, observable_, rho_, "LocalExpectationObjective");
  const BlockProducts bp = block_products(c, rho_.matrix());
  double j = 0.0;
  for (size_t b = 0; b < bp.s_blocks.size(); ++b)
    j += (observable_.base * (bp.v_blocks[b] * bp.s_blocks[b].adjoint())).trace().real();
  return j;
}

ObjectiveValueAndGradient LocalExpectationObjective::evaluate(const LocalChannelPoint& c) const {
  check_local_inputs(c, observable_, rho_, "LocalExpectationObjective");
  const BlockProducts bp = block_products(c, rho_.matrix());
  double j = 0.0;
  std::vector<CMatrix> grads(bp.s_blocks.size());
  for (size_t b = 0; b < bp.s_blocks.size(); ++b) {
    j += (observable_.base * (bp.v_blocks[b] * bp.s_blocks[b].adjoint())).trace().real();
    grads[b] = 2.0 * (observable_.base * bp.v_blocks[b]);
  }
  return finish_evaluation(c, j, grads);
}

// --------------------------------------------------------------------------
// DistanceObjective
// --------------------------------------------------------------------------

DistanceObjective::DistanceObjective(DensityMatrix rho_in, DensityMatrix rho_target,
                                     ObservableSet m)
    : rho_in_(std::move(rho_in)), rho_target_(std::move(rho_target)), observables_(std::move(m)) {
  targets_.reserve(observables_.operators.size());
  for (const CMatrix& op : observables_.operators)
    targets_.push_back((rho_target_.matrix() * op).trace().real());
}

namespace {

// J_i = tr(Lambda(rho) M_i) for all observables, via one channel application.
std::vector<double> channel_expectations(const BlockProducts& bp, const ObservableSet& m) {
  const Index d = bp.s_blocks.front().rows();
  CMatrix out = CMatrix::Zero(d, d);
  for (size_t b = 0; b < bp.s_blocks.size(); ++b)
    out.noalias() += bp.v_blocks[b] * bp.s_blocks[b].adjoint();
  std::vector<double> j;
  j.reserve(m.operators.size());
  for (const CMatrix& op : m.operators) j.push_back((out * op).trace().real());
  return j;
}

} // namespace

double DistanceObjective::value(const LocalChannelPoint& c) const {
  if (rho_in_.dim() != c.joint_dim())
    throw std::invalid_argument("DistanceObjective: dimension mismatch");
  const BlockProducts bp = block_products(c, rho_in_.matrix());
  const std::vector<double> j = channel_expectations(bp, observables_);
  double sum = 0.0;
  for (size_t i = 0; i < j.size(); ++i) sum += (j[i] - targets_[i]) * (j[i] - targets_[i]);
  return std::sqrt(sum);
}

ObjectiveValueAndGradient DistanceObjective::evaluate(const LocalChannelPoint& c) const {
  if (rho_in_.dim() != c.joint_dim())
    throw std::invalid_argument("DistanceObjective: dimension mismatch");
  const BlockProducts bp = block_products(c, rho_in_.matrix());
  const std::vector<double> j = channel_expectations(bp, observables_);

  double sum = 0.0;
  CMatrix m_eff = CMatrix::Zero(c.joint_dim(), c.joint_dim());
  for (size_t i = 0; i < j.size(); ++i) {
    const double w = j[i] - targets_[i];
    sum += w * w;
    m_eff.noalias() += w * observables_.operators[i];
  }

  std::vector<CMatrix> grads(bp.s_blocks.size());
  for (size_t b = 0; b < bp.s_blocks.size(); ++b) grads[b] = 2.0 * (m_eff * bp.v_blocks[b]);
  ObjectiveValueAndGradient out = finish_evaluation(c, std::sqrt(sum), grads);
  out.used_squared_surrogate = true; // gradient taken on D^2/2, value reported as D
  return out;
}

// --------------------------------------------------------------------------
// PostselectedObjective
// --------------------------------------------------------------------------

PostselectedObjective::PostselectedObjective(LiftedObservable o, DensityMatrix rho, Selector omega)
    : observable_(std::move(o)), rho_(std::move(rho)), omega_(std::move(omega)) {}

namespace {

std::pair<double, double> kept_traces(const BlockProducts& bp, const Selector& omega,
                                      const CMatrix& base_obs) {
  double j1 = 0.0, j2 = 0.0;
  for (Index b : omega.kept_blocks) {
    const CMatrix t = bp.v_blocks[static_cast<size_t>(b)] * bp.s_blocks[static_cast<size_t>(b)].adjoint();
    j1 += (base_obs * t).trace().real();
    j2 += t.trace().real();
  }
  return {j1, j2};
}

} // namespace

double PostselectedObjective::value(const LocalChannelPoint& c) const {
  check_local_inputs(c, observable_, rho_, "PostselectedObjective");
  const BlockProducts bp = block_products(c, rho_.matrix());
  const auto [j1, j2] = kept_traces(bp, omega_, observable_.base);
  if (j2 <= tol::measure_zero)
    throw MeasureZeroError("PostselectedObjective: post-selection measure zero");
  return j1 / j2;
}

ObjectiveValueAndGradient PostselectedObjective::evaluate(const LocalChannelPoint& c) const {
  check_local_inputs(c, observable_, rho_, "PostselectedObjective");
  if (omega_.total_blocks != c.block_count() || omega_.block_dim != c.joint_dim())
    throw std::invalid_argument("PostselectedObjective: selector does not match the channel");
  const BlockProducts bp = block_products(c, rho_.matrix());
  const auto [j1, j2] = kept_traces(bp, omega_, observable_.base);
  if (j2 <= tol::measure_zero)
    throw MeasureZeroError("PostselectedObjective: post-selection measure zero");

  // grad(J1/J2) = (2/J2) Omega' O Omega' S rho - (2 J1/J2^2) Omega' Omega' S rho,
  // which per kept block is the effective observable O/J2 - (J1/J2^2) I.
  const Index d = c.joint_dim();
  const CMatrix e_kept =
      observable_.base / j2 - (j1 / (j2 * j2)) * CMatrix::Identity(d, d);
  std::vector<CMatrix> grads(bp.s_blocks.size());
  for (size_t b = 0; b < bp.s_blocks.size(); ++b) {
    if (omega_.keeps(static_cast<Index>(b)))
      grads[b] = 2.0 * (e_kept * bp.v_blocks[b]);
    else
      grads[b] = CMatrix::Zero(d, d);
  }
  return finish_evaluation(c, j1 / j2, grads);
}

std::optional<std::pair<double, double>> PostselectedObjective::probe(
    const LocalChannelPoint& c) const {
  const BlockProducts bp = block_products(c, rho_.matrix());
  const auto [j1, j2] = kept_traces(bp, omega_, observable_.base);
  if (j2 <= tol::measure_zero)
    throw MeasureZeroError("PostselectedObjective: post-selection measure zero");
  return std::make_pair(j1 / j2, j2);
}

// --------------------------------------------------------------------------
// Free-function forms of the distance and post-selected objectives
// --------------------------------------------------------------------------

double distance_objective(const LocalChannelPoint& c, const DensityMatrix& rho_in,
                          const DensityMatrix& rho_target, const ObservableSet& m) {
  const DensityMatrix out = apply_local_channel(c, rho_in);
  double sum = 0.0;
  for (const CMatrix& op : m.operators) {
    const double gap =
        (out.matrix() * op).trace().real() - (rho_target.matrix() * op).trace().real();
    sum += gap * gap;
  }
  return std::sqrt(sum);
}

DistanceGradient distance_gradient(const LocalChannelPoint& c, const DensityMatrix& rho_in,
                                   const DensityMatrix& rho_target, const ObservableSet& m) {
  const CMatrix s_tilde = c.product_matrix();
  const DensityMatrix out = apply_local_channel(c, rho_in);

  CMatrix grad = CMatrix::Zero(s_tilde.rows(), s_tilde.cols());
  double sum = 0.0;
  for (const CMatrix& op : m.operators) {
    const double ji = (out.matrix() * op).trace().real();
    const double w = ji - (rho_target.matrix() * op).trace().real();
    sum += w * w;
    const CMatrix rotated = rotate_to_tensor_frame(LiftedObservable(op).lifted, c.sigma());
    grad.noalias() += w * ambient_gradient(s_tilde, rho_in.matrix(), rotated);
  }
  const double d = std::sqrt(sum);
  DistanceGradient result;
  if (d <= tol::distance_singular) {
    result.gradient = 2.0 * grad; // gradient of the squared distance
    result.used_squared_surrogate = true;
  } else {
    result.gradient = grad / d;
    result.used_squared_surrogate = false;
  }
  return result;
}

PostselectedValue postselected_objective(const LocalChannelPoint& c, const Selector& omega,
                                         const LiftedObservable& o, const DensityMatrix& rho) {
  check_local_inputs(c, o, rho, "postselected_objective");
  const CMatrix s_tilde = c.product_matrix();
  const CMatrix om = omega.omega_matrix();
  const CMatrix j1_op = rotate_to_tensor_frame(om.adjoint() * o.lifted * om, c.sigma());
  const CMatrix j2_op = rotate_to_tensor_frame(om.adjoint() * om, c.sigma());
  const double j1 = expectation_trace(s_tilde, rho.matrix(), j1_op);
  const double j2 = expectation_trace(s_tilde, rho.matrix(), j2_op);
  if (j2 <= tol::measure_zero)
    throw MeasureZeroError("postselected_objective: post-selection measure zero");
  return PostselectedValue{j1 / j2, j2};
}

CMatrix postselected_gradient(const LocalChannelPoint& c, const Selector& omega,
                              const LiftedObservable& o, const DensityMatrix& rho) {
  check_local_inputs(c, o, rho, "postselected_gradient");
  const CMatrix s_tilde = c.product_matrix();
  const CMatrix om = omega.omega_matrix();
  const CMatrix j1_op = rotate_to_tensor_frame(om.adjoint() * o.lifted * om, c.sigma());
  const CMatrix j2_op = rotate_to_tensor_frame(om.adjoint() * om, c.sigma());
  const double j1 = expectation_trace(s_tilde, rho.matrix(), j1_op);
  const double j2 = expectation_trace(s_tilde, rho.matrix(), j2_op);
  if (j2 <= tol::measure_zero)
    throw MeasureZeroError("postselected_gradient: post-selection measure zero");
  const CMatrix g1 = ambient_gradient(s_tilde, rho.matrix(), j1_op);
  const CMatrix g2 = ambient_gradient(s_tilde, rho.matrix(), j2_op);
  return g1 / j2 - (j1 / (j2 * j2)) * g2;
}

// --------------------------------------------------------------------------
// NonlocalExpectationObjective
// --------------------------------------------------------------------------

NonlocalExpectationObjective::NonlocalExpectationObjective(LiftedObservable o, DensityMatrix rho)
    : observable_(std::move(o)), rho_(std::move(rho)) {}

double NonlocalExpectationObjective::value(const StiefelPoint& s) const {
  return expectation_value(s, observable_, rho_);
}

std::pair<double, CMatrix> NonlocalExpectationObjective::evaluate(const StiefelPoint& s) const {
  check_lift(observable_, s.n(), s.l());
  const Index d = s.l();
  const Index blocks = s.n() / d;
  double j = 0.0;
  CMatrix raw(s.n(), d);
  for (Index b = 0; b < blocks; ++b) {
    const CMatrix sb = s.matrix().middleRows(b * d, d);
    const CMatrix vb = sb * rho_.matrix();
    j += (observable_.base * (vb * sb.adjoint())).trace().real();
    raw.middleRows(b * d, d) = 2.0 * (observable_.base * vb);
  }
  CMatrix step = project_to_tangent_raw(s.matrix(), raw);
  if (!step.allFinite() || !std::isfinite(j))
    throw NonFiniteError("NonlocalExpectationObjective: non-finite value or gradient");
  return {j, std::move(step)};
}

} // namespace locq
