#include "locq/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <thread>

namespace locq {

namespace {

constexpr double kStationarityNorm = 1e-3;
constexpr long kFeasibilityCheckEvery = 1000;

double signed_step(OptimizeMode mode, double step) {
  return mode == OptimizeMode::Maximize ? step : -step;
}

bool improves(OptimizeMode mode, double candidate, double incumbent) {
  return mode == OptimizeMode::Maximize ? candidate > incumbent : candidate < incumbent;
}

} // namespace

void OptimizerConfig::validate() const {
  if (!(step_a > 0.0) || !(step_b > 0.0)) throw std::invalid_argument("OptimizerConfig: steps must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("OptimizerConfig: tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("OptimizerConfig: max_iters must be >= 1");
  if (restarts < 1) throw std::invalid_argument("OptimizerConfig: restarts must be >= 1");
}

NonlocalOptimizationResult ascend_nonlocal(const NonlocalExpectationObjective& objective,
                                           const StiefelPoint& start, const OptimizerConfig& cfg) {
  cfg.validate();
  const double alpha = signed_step(cfg.mode, cfg.step_a);

  StiefelPoint current = start;
  auto [value, step] = objective.evaluate(current);

  NonlocalOptimizationResult result{current, value};
  if (cfg.record_trajectory) result.trajectory.emplace();
  if (result.trajectory) result.trajectory->samples.push_back({0, value, {}, {}});

  bool variation_stopped = false;
  long iters = 0;
  double grad_norm = step.norm();
  while (iters < cfg.max_iters) {
    current = retract(current, alpha * step);
    ++iters;
    const double previous = value;
    std::tie(value, step) = objective.evaluate(current);
    grad_norm = step.norm();
    if (improves(cfg.mode, value, result.best_value)) {
      result.best_point = current;
      result.best_value = value;
    }
    if (result.trajectory) result.trajectory->samples.push_back({iters, value, {}, {}});
    if (iters % kFeasibilityCheckEvery == 0 &&
        current.feasibility_residual() > tol::stiefel_feasibility)
      throw std::runtime_error("ascend_nonlocal: iterate left the manifold");
    if (std::abs(value - previous) < cfg.tol) {
      variation_stopped = true;
      break;
    }
  }
  result.iterations_used = iters;
  result.converged = variation_stopped && grad_norm <= kStationarityNorm;
  return result;
}

LocalOptimizationResult ascend_local(const LocalObjective& objective,
                                     const LocalChannelPoint& start, const OptimizerConfig& cfg,
                                     int restart_index) {
  cfg.validate();
  const double alpha = signed_step(cfg.mode, cfg.step_a);
  const double beta = signed_step(cfg.mode, cfg.step_b);

  LocalChannelPoint current = start;
  ObjectiveValueAndGradient eval = objective.evaluate(current);

  LocalOptimizationResult result{current, eval.value};
  result.restart_index = restart_index;
  if (cfg.record_trajectory) result.trajectory.emplace();

  auto record = [&](long iteration, double value) {
    if (!result.trajectory) return;
    TrajectorySample sample{iteration, value, {}, {}};
    if (auto p = objective.probe(current)) {
      sample.fidelity = p->first;
      sample.success_prob = p->second;
    }
    result.trajectory->samples.push_back(sample);
  };

  record(0, eval.value);

  bool variation_stopped = false;
  long pairs = 0;
  double pair_start_value = eval.value;
  double grad_norm =
      std::sqrt(eval.grad_a.squaredNorm() + eval.grad_b.squaredNorm());

  while (pairs < cfg.max_iters) {
    // A half-step with S_B frozen
    const StiefelPoint sa = retract(current.s_a(), alpha * eval.grad_a);
    current = current.with_factors(sa, current.s_b());
    // B half-step with the updated S_A frozen
    const ObjectiveValueAndGradient mid = objective.evaluate(current);
    const StiefelPoint sb = retract(current.s_b(), beta * mid.grad_b);
    current = current.with_factors(current.s_a(), sb);
    ++pairs;

    eval = objective.evaluate(current);
    grad_norm = std::sqrt(eval.grad_a.squaredNorm() + eval.grad_b.squaredNorm());
    if (improves(cfg.mode, eval.value, result.best_value)) {
      result.best_point = current;
      result.best_value = eval.value;
    }
    record(pairs, eval.value);

    const double change = eval.value - pair_start_value;
    const double adverse = cfg.mode == OptimizeMode::Maximize ? -change : change;
    if (adverse > 0.0) {
      if (adverse <= 10.0 * cfg.tol)
        ++result.transient_dips;
      else
        ++result.large_dips;
    }

    if (pairs % kFeasibilityCheckEvery == 0 &&
        (current.s_a().feasibility_residual() > tol::stiefel_feasibility ||
         current.s_b().feasibility_residual() > tol::stiefel_feasibility))
      throw std::runtime_error("ascend_local: iterate left the manifold");

    if (std::abs(change) < cfg.tol) {
      variation_stopped = true;
      break;
    }
    pair_start_value = eval.value;
  }

  result.iterations_used = pairs;
  result.converged = variation_stopped && grad_norm <= kStationarityNorm;
  result.final_gradient_norm = grad_norm;
  return result;
}

MultiRestartResult multi_restart(const LocalObjective& objective, const FactorShape& shape,
                                 const OptimizerConfig& cfg,
                                 const std::optional<LocalChannelPoint>& warm_start) {
  cfg.validate();

  struct Slot {
    std::optional<LocalOptimizationResult> result;
    bool failed = false;
  };
  const int total = cfg.restarts + (warm_start ? 1 : 0);
  std::vector<Slot> slots(static_cast<size_t>(total));

  // Slot 0 is the warm start when present; random restart k occupies slot
  // k (+1 with warm start) and carries restart index k.
  auto run_slot = [&](int slot) {
    const bool is_warm = warm_start && slot == 0;
    const int restart_index = is_warm ? -1 : (warm_start ? slot - 1 : slot);
    try {
      if (is_warm) {
        slots[static_cast<size_t>(slot)].result =
            ascend_local(objective, *warm_start, cfg, restart_index);
      } else {
        Rng rng(cfg.seed + static_cast<std::uint64_t>(restart_index));
        const StiefelPoint sa = random_point(shape.n_a, shape.l_a, rng);
        const StiefelPoint sb = random_point(shape.n_b, shape.l_b, rng);
        slots[static_cast<size_t>(slot)].result =
            ascend_local(objective, LocalChannelPoint(sa, sb), cfg, restart_index);
      }
    } catch (const MeasureZeroError&) {
      slots[static_cast<size_t>(slot)].failed = true;
    } catch (const NonFiniteError&) {
      slots[static_cast<size_t>(slot)].failed = true;
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(total));
  if (workers <= 1) {
    for (int s = 0; s < total; ++s) run_slot(s);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back([&, w]() {
        for (int s = static_cast<int>(w); s < total; s += static_cast<int>(workers)) run_slot(s);
      });
    for (auto& t : pool) t.join();
  }

  int failed = 0;
  std::optional<size_t> best_slot;
  for (size_t s = 0; s < slots.size(); ++s) {
    if (slots[s].failed) {
      ++failed;
      continue;
    }
    if (!slots[s].result) continue;
    if (!best_slot || improves(cfg.mode, slots[s].result->best_value,
                               slots[*best_slot].result->best_value))
      best_slot = s;
    // ties already resolved by slot order: warm start first, then ascending index
  }
  if (!best_slot)
    throw MeasureZeroError("multi_restart: every restart failed");

  std::optional<Trajectory> warm_trajectory;
  if (warm_start && slots[0].result && slots[0].result->trajectory)
    warm_trajectory = slots[0].result->trajectory;
  return MultiRestartResult{std::move(*slots[*best_slot].result), std::move(warm_trajectory),
                            failed};
}

} // namespace locq
