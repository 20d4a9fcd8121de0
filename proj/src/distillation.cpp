#include "locq/distillation.hpp"

#include <cmath>
#include <stdexcept>

namespace locq {

namespace {

// Reorder (A1 B1)(A2 B2) -> (A1 A2 B1 B2) on the 16-dimensional joint space.
std::vector<Index> copy_interleave_permutation() {
  std::vector<Index> map(16);
  for (Index a1 = 0; a1 < 2; ++a1)
    for (Index a2 = 0; a2 < 2; ++a2)
      for (Index b1 = 0; b1 < 2; ++b1)
        for (Index b2 = 0; b2 < 2; ++b2)
          map[static_cast<size_t>(a1 * 8 + a2 * 4 + b1 * 2 + b2)] = a1 * 8 + b1 * 4 + a2 * 2 + b2;
  return map;
}

CMatrix cnot() {
  CMatrix cn = CMatrix::Zero(4, 4);
  cn(0, 0) = cn(1, 1) = cn(2, 3) = cn(3, 2) = 1.0;
  return cn;
}

const CMatrix& psi_plus_projector() {
  static const CMatrix proj = [] {
    const CVector v = bell_vector(Bell::PsiPlus);
    return CMatrix(v * v.adjoint());
  }();
  return proj;
}

} // namespace

EplOutcome epl(const DensityMatrix& input_pair) {
  if (input_pair.dim() != 4) throw std::invalid_argument("epl: input must be a two-qubit state");

  static const std::vector<Index> reorder = copy_interleave_permutation();
  static const CMatrix u = [] { return CMatrix(kron(cnot(), cnot())); }();
  static const CMatrix keep = [] {
    CMatrix p1 = CMatrix::Zero(2, 2);
    p1(1, 1) = 1.0;
    return CMatrix(kron(kron(CMatrix::Identity(2, 2), p1), kron(CMatrix::Identity(2, 2), p1)));
  }();

  // Two copies in A1 A2 B1 B2 order.
  const CMatrix pair2 = kron(input_pair.matrix(), input_pair.matrix());
  CMatrix joint(16, 16);
  for (Index r = 0; r < 16; ++r)
    for (Index c = 0; c < 16; ++c)
      joint(r, c) = pair2(reorder[static_cast<size_t>(r)], reorder[static_cast<size_t>(c)]);

  joint = u * joint * u.adjoint();
  const CMatrix tau = keep * joint * keep;
  const double p = tau.trace().real();
  if (p < tol::measure_zero) throw MeasureZeroError("epl: measure-zero keep probability");

  const CMatrix out = partial_trace(tau, {2, 2, 2, 2}, {0, 2}) / p;
  DensityMatrix state(out);
  const double fid = (out * psi_plus_projector()).trace().real();
  return EplOutcome{std::move(state), p, fid};
}

EplOutcome epl_reference(const DensityMatrix& input_pair) {
  if (input_pair.dim() != 4)
    throw std::invalid_argument("epl_reference: input must be a two-qubit state");
  const CMatrix& rho = input_pair.matrix();

  // Joint state built entry by entry in A1 A2 B1 B2 order.
  auto idx = [](Index a1, Index a2, Index b1, Index b2) { return a1 * 8 + a2 * 4 + b1 * 2 + b2; };
  CMatrix joint = CMatrix::Zero(16, 16);
  for (Index a1 = 0; a1 < 2; ++a1)
    for (Index b1 = 0; b1 < 2; ++b1)
      for (Index a2 = 0; a2 < 2; ++a2)
        for (Index b2 = 0; b2 < 2; ++b2)
          for (Index c1 = 0; c1 < 2; ++c1)
            for (Index d1 = 0; d1 < 2; ++d1)
              for (Index c2 = 0; c2 < 2; ++c2)
                for (Index d2 = 0; d2 < 2; ++d2)
                  joint(idx(a1, a2, b1, b2), idx(c1, c2, d1, d2)) =
                      rho(a1 * 2 + b1, c1 * 2 + d1) * rho(a2 * 2 + b2, c2 * 2 + d2);

  // Bilateral CNOT as a basis permutation: A2 ^= A1, B2 ^= B1.
  CMatrix evolved = CMatrix::Zero(16, 16);
  auto cnot_image = [&](Index i) {
    const Index a1 = (i >> 3) & 1, a2 = (i >> 2) & 1, b1 = (i >> 1) & 1, b2 = i & 1;
    return idx(a1, a2 ^ a1, b1, b2 ^ b1);
  };
  for (Index r = 0; r < 16; ++r)
    for (Index c = 0; c < 16; ++c) evolved(cnot_image(r), cnot_image(c)) = joint(r, c);

  // Keep A2 = B2 = 1 and trace the measured qubits out by explicit summation.
  double p = 0.0;
  CMatrix out = CMatrix::Zero(4, 4);
  for (Index a1 = 0; a1 < 2; ++a1)
    for (Index b1 = 0; b1 < 2; ++b1)
      for (Index c1 = 0; c1 < 2; ++c1)
        for (Index d1 = 0; d1 < 2; ++d1)
          out(a1 * 2 + b1, c1 * 2 + d1) = evolved(idx(a1, 1, b1, 1), idx(c1, 1, d1, 1));
  p = out.trace().real();
  if (p < tol::measure_zero)
    throw MeasureZeroError("epl_reference: measure-zero keep probability");
  out /= p;

  DensityMatrix state(out);
  const double fid = (out * psi_plus_projector()).trace().real();
  return EplOutcome{std::move(state), p, fid};
}

std::vector<double> default_p_grid() {
  std::vector<double> grid;
  for (int i = 1; i <= 19; ++i) grid.push_back(0.05 * i);
  return grid;
}

Approach1Result approach1(const DensityMatrix& rho_in, const std::vector<double>& p_grid,
                          const OptimizerConfig& cfg) {
  if (rho_in.dim() != 4) throw std::invalid_argument("approach1: input must be a two-qubit state");
  if (p_grid.empty()) throw std::invalid_argument("approach1: empty p grid");
  for (double p : p_grid)
    if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("approach1: grid values must lie in (0, 1)");

  OptimizerConfig fit_cfg = cfg;
  fit_cfg.mode = OptimizeMode::Minimize;
  fit_cfg.record_trajectory = false;
  const FactorShape shape = FactorShape::for_dims(2, 2);

  Approach1Result result;
  result.p_grid = p_grid;
  for (double p : p_grid) {
    std::optional<LocalOptimizationResult> best_fit;
    Bell best_sign = Bell::PsiPlus;
    for (Bell sign : {Bell::PsiPlus, Bell::PsiMinus}) {
      const DistanceObjective objective(rho_in, r_state(p, sign), r_state_observables(sign));
      MultiRestartResult mr = multi_restart(objective, shape, fit_cfg);
      if (!best_fit || mr.best.best_value < best_fit->best_value) {
        best_fit = std::move(mr.best);
        best_sign = sign;
      }
    }

    Approach1PerP entry{p, best_sign, best_fit->best_value,
                        apply_local_channel(best_fit->best_point, rho_in), std::nullopt};
    try {
      entry.epl = epl(entry.transformed_state);
    } catch (const MeasureZeroError&) {
      // recorded as a missing outcome; the sweep continues
    }
    result.per_p.push_back(std::move(entry));
  }

  bool found = false;
  for (size_t i = 0; i < result.per_p.size(); ++i) {
    const auto& entry = result.per_p[i];
    if (!entry.epl) continue;
    const bool better =
        !found || entry.epl->fidelity_psi_plus > result.best_fidelity ||
        (entry.epl->fidelity_psi_plus == result.best_fidelity &&
         entry.epl->success_prob > result.best_success_prob);
    if (better) {
      found = true;
      result.best_index = i;
      result.best_p = entry.p;
      result.best_fidelity = entry.epl->fidelity_psi_plus;
      result.best_success_prob = entry.epl->success_prob;
    }
  }
  if (!found) throw MeasureZeroError("approach1: every grid point had measure-zero EPL outcome");
  return result;
}

namespace {

/// Deterministic local unitary channel reaching the input's FEF as fidelity
/// with |Psi+>: Kraus block 0 carries the unitary, the rest stay zero.
LocalChannelPoint fef_warm_start(const DensityMatrix& rho) {
  const FefResult best = max_bell_overlap(rho, Bell::PsiPlus);
  const KrausSet ka(2, {CMatrix(best.u_a.adjoint())});
  const KrausSet kb(2, {CMatrix(best.u_b.adjoint())});
  return LocalChannelPoint(kraus_to_stiefel(ka), kraus_to_stiefel(kb));
}

} // namespace

Approach2Result approach2(const DensityMatrix& rho_in, const OptimizerConfig& cfg) {
  if (rho_in.dim() != 4) throw std::invalid_argument("approach2: input must be a two-qubit state");

  const LocalChannelPoint warm = fef_warm_start(rho_in);
  const Selector omega = Selector::keep_block(16, 4, 0);
  const PostselectedObjective objective(LiftedObservable(psi_plus_projector()), rho_in, omega);

  OptimizerConfig run_cfg = cfg;
  run_cfg.mode = OptimizeMode::Maximize;
  run_cfg.record_trajectory = true;

  MultiRestartResult mr =
      multi_restart(objective, FactorShape::for_dims(2, 2), run_cfg, warm);
  if (!mr.warm_trajectory || mr.warm_trajectory->samples.empty())
    throw std::runtime_error("approach2: warm-start trajectory missing");

  const auto final_probe = objective.probe(mr.best.best_point);
  Approach2Result out{mr.best.best_point, std::move(*mr.warm_trajectory),
                      final_probe->first, final_probe->second, 0.0};
  out.warm_start_fidelity = out.trajectory.samples.front().fidelity.value_or(0.0);
  return out;
}

std::vector<BatchRecord> batch_experiment(const std::vector<DensityMatrix>& states,
                                          const OptimizerConfig& cfg) {
  std::vector<BatchRecord> records;
  records.reserve(states.size());
  const Selector omega = Selector::keep_block(16, 4, 0);
  for (size_t i = 0; i < states.size(); ++i) {
    BatchRecord rec;
    rec.index = i;
    rec.initial_fef = fef(states[i]).value;

    try {
      const Approach1Result a1 = approach1(states[i], default_p_grid(), cfg);
      rec.a1_ok = true;
      rec.a1_fidelity = a1.best_fidelity;
      rec.a1_success = a1.best_success_prob;
      rec.a1_best_p = a1.best_p;
      rec.a1_output_fef = fef(a1.per_p[a1.best_index].epl->output_state).value;
    } catch (const std::exception&) {
      rec.a1_ok = false;
    }

    try {
      const Approach2Result a2 = approach2(states[i], cfg);
      rec.a2_ok = true;
      rec.a2_fidelity = a2.final_fidelity;
      rec.a2_success = a2.final_success_prob;
      rec.a2_output_fef =
          fef(apply_postselected(a2.optimized_channel, omega, states[i]).state).value;
    } catch (const std::exception&) {
      rec.a2_ok = false;
    }

    records.push_back(rec);
  }
  return records;
}

} // namespace locq
