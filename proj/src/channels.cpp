#include "locq/channels.hpp"

#include <cmath>
#include <stdexcept>

namespace locq {

namespace {

Index integer_cube_root(Index n) {
  const Index r = static_cast<Index>(std::llround(std::cbrt(static_cast<double>(n))));
  return (r * r * r == n) ? r : -1;
}

void check_state_dim(Index expected, const DensityMatrix& rho, const char* who) {
  if (rho.dim() != expected) throw std::invalid_argument(std::string(who) + ": state dimension mismatch");
}

} // namespace

KrausSet::KrausSet(Index dim_in, std::vector<CMatrix> ops)
    : dim(dim_in), operators(std::move(ops)) {
  if (dim < 1) throw std::invalid_argument("KrausSet: dimension must be positive");
  if (operators.empty() || static_cast<Index>(operators.size()) > dim * dim)
    throw std::invalid_argument("KrausSet: needs between 1 and N^2 operators");
  CMatrix completeness = CMatrix::Zero(dim, dim);
  for (const CMatrix& k : operators) {
    if (k.rows() != dim || k.cols() != dim)
      throw std::invalid_argument("KrausSet: operator shape mismatch");
    completeness += k.adjoint() * k;
  }
  if (max_abs(completeness - CMatrix::Identity(dim, dim)) > tol::kraus_completeness)
    throw std::invalid_argument("KrausSet: trace preservation violated");
}

std::vector<Index> build_sigma(Index n_a, Index l_a, Index n_b, Index l_b) {
  if (l_a < 1 || l_b < 1 || n_a != l_a * l_a * l_a || n_b != l_b * l_b * l_b)
    throw std::invalid_argument("build_sigma: dimensions are not stacked Kraus families");
  const Index na = l_a, nb = l_b; // local Hilbert dimensions
  std::vector<Index> perm(static_cast<size_t>(n_a * n_b));
  for (Index i = 0; i < na * na; ++i)
    for (Index j = 0; j < nb * nb; ++j)
      for (Index p = 0; p < na; ++p)
        for (Index q = 0; q < nb; ++q) {
          const Index target = (i * nb * nb + j) * (na * nb) + p * nb + q;
          const Index source = (i * na + p) * n_b + j * nb + q;
          perm[static_cast<size_t>(target)] = source;
        }
  return perm;
}

LocalChannelPoint::LocalChannelPoint(StiefelPoint s_a, StiefelPoint s_b)
    : s_a_(std::move(s_a)), s_b_(std::move(s_b)),
      sigma_(build_sigma(s_a_.n(), s_a_.l(), s_b_.n(), s_b_.l())) {}

CMatrix LocalChannelPoint::product_matrix() const {
  return kron(s_a_.matrix(), s_b_.matrix());
}

CMatrix LocalChannelPoint::stacked_matrix() const {
  return permute_rows(product_matrix(), sigma_);
}

LocalChannelPoint LocalChannelPoint::with_factors(StiefelPoint a, StiefelPoint b) const {
  if (a.n() != s_a_.n() || a.l() != s_a_.l() || b.n() != s_b_.n() || b.l() != s_b_.l())
    throw std::invalid_argument("with_factors: factor shape mismatch");
  LocalChannelPoint out(*this);
  out.s_a_ = std::move(a);
  out.s_b_ = std::move(b);
  return out;
}

Selector::Selector(Index total, Index dim, std::set<Index> kept)
    : total_blocks(total), block_dim(dim), kept_blocks(std::move(kept)) {
  if (total_blocks < 1 || block_dim < 1)
    throw std::invalid_argument("Selector: dimensions must be positive");
  for (Index b : kept_blocks)
    if (b < 0 || b >= total_blocks)
      throw std::invalid_argument("Selector: kept block index out of range");
}

Selector Selector::keep_all(Index total_blocks, Index block_dim) {
  std::set<Index> all;
  for (Index b = 0; b < total_blocks; ++b) all.insert(b);
  return Selector(total_blocks, block_dim, std::move(all));
}

Selector Selector::keep_block(Index total_blocks, Index block_dim, Index block) {
  return Selector(total_blocks, block_dim, {block});
}

CMatrix Selector::omega_matrix() const {
  const Index side = total_blocks * block_dim;
  CMatrix omega = CMatrix::Zero(side, side);
  for (Index b : kept_blocks)
    omega.block(b * block_dim, b * block_dim, block_dim, block_dim) =
        CMatrix::Identity(block_dim, block_dim);
  return omega;
}

StiefelPoint kraus_to_stiefel(const KrausSet& k) {
  const Index n = k.dim;
  CMatrix stacked = CMatrix::Zero(n * n * n, n);
  for (size_t i = 0; i < k.operators.size(); ++i)
    stacked.middleRows(static_cast<Index>(i) * n, n) = k.operators[i];
  return StiefelPoint(std::move(stacked));
}

KrausSet stiefel_to_kraus(const StiefelPoint& s) {
  const Index n = integer_cube_root(s.n());
  if (n < 1 || n != s.l())
    throw std::invalid_argument("stiefel_to_kraus: point is not a stacked Kraus family");
  std::vector<CMatrix> ops;
  ops.reserve(static_cast<size_t>(n * n));
  for (Index b = 0; b < n * n; ++b) ops.push_back(s.matrix().middleRows(b * n, n));
  return KrausSet(n, std::move(ops));
}

DensityMatrix apply_channel(const KrausSet& k, const DensityMatrix& rho) {
  check_state_dim(k.dim, rho, "apply_channel");
  CMatrix out = CMatrix::Zero(k.dim, k.dim);
  for (const CMatrix& op : k.operators) out += op * rho.matrix() * op.adjoint();
  return DensityMatrix(std::move(out));
}

DensityMatrix apply_local_channel(const LocalChannelPoint& c, const DensityMatrix& rho) {
  check_state_dim(c.joint_dim(), rho, "apply_local_channel");
  const CMatrix stacked = c.stacked_matrix();
  const Index d = c.joint_dim();
  CMatrix out = CMatrix::Zero(d, d);
  for (Index b = 0; b < c.block_count(); ++b) {
    const auto op = stacked.middleRows(b * d, d);
    out += op * rho.matrix() * op.adjoint();
  }
  return DensityMatrix(std::move(out));
}

PostselectedState apply_postselected(const LocalChannelPoint& c, const Selector& omega,
                                     const DensityMatrix& rho) {
  check_state_dim(c.joint_dim(), rho, "apply_postselected");
  if (omega.total_blocks != c.block_count() || omega.block_dim != c.joint_dim())
    throw std::invalid_argument("apply_postselected: selector does not match the channel blocks");
  const CMatrix stacked = c.stacked_matrix();
  const Index d = c.joint_dim();
  CMatrix tau = CMatrix::Zero(d, d);
  for (Index b : omega.kept_blocks) {
    const auto op = stacked.middleRows(b * d, d);
    tau += op * rho.matrix() * op.adjoint();
  }
  const double p = tau.trace().real();
  if (p < tol::measure_zero)
    throw MeasureZeroError("apply_postselected: post-selection measure zero");
  return PostselectedState{DensityMatrix(tau / p), p};
}

} // namespace locq
