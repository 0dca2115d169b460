#pragma once

#include "bregsfp/core.hpp"
#include "bregsfp/geometry.hpp"
#include "bregsfp/legendre.hpp"
#include "bregsfp/operators.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bregsfp {

enum class Status { Converged, MaxIterations, InfeasibleSuspected, Error };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::Converged: return "Converged";
    case Status::MaxIterations: return "MaxIterations";
    case Status::InfeasibleSuspected: return "InfeasibleSuspected";
    case Status::Error: return "Error";
  }
  return "Error";
}

/// Where the vanishing-weight pull of the update points.
enum class Anchor { Initial, Latest };

/// Which gradient drives the forward step inside the proximal step of the
/// hybrid scheme. Auto uses the smooth objective when one is registered and
/// the Legendre gradient otherwise; Disabled skips the forward step, which
/// turns the hybrid scheme into the plain one when the regularizer is zero.
enum class ProxGradientSource { Auto, Legendre, Objective, Disabled };

/// Parameter sequence indexed by the iteration counter n >= 1.
template <typename Scalar>
struct Schedule {
  std::function<Scalar(int)> fn;
  enum class Form { Harmonic, Constant, Custom } form = Form::Custom;
  Scalar constant_value = Scalar(0);

  /// n -> 1 / (n + 1)
  static Schedule harmonic() {
    return {[](int n) { return Scalar(1) / Scalar(n + 1); }, Form::Harmonic, Scalar(0)};
  }
  static Schedule constant(Scalar c) {
    return {[c](int) { return c; }, Form::Constant, c};
  }
  static Schedule custom(std::function<Scalar(int)> f) { return {std::move(f), Form::Custom, Scalar(0)}; }

  Scalar operator()(int n) const { return fn(n); }
};

template <typename Scalar>
struct LineSearchOptions {
  Scalar initial_step = Scalar(1);
  Scalar backtrack = Scalar(0.5);
  int max_backtracks = 60;
};

template <typename Scalar>
struct SolverConfig {
  Schedule<Scalar> mu = Schedule<Scalar>::harmonic();
  Schedule<Scalar> beta = Schedule<Scalar>::constant(Scalar(0.5));
  Scalar beta_max = Scalar(0.999);
  Scalar tau = Scalar(0.5);
  Scalar eta = Scalar(0.1);
  LineSearchOptions<Scalar> linesearch{};
  Scalar tol = Scalar(1e-6);
  int max_iter = 10000;

  /// Cap the initial trial step at 2(1 - tau) / (L_f1 + L_f2 + L_A) when
  /// every constant is known.
  bool cap_step_by_lipschitz = true;
  Anchor anchor = Anchor::Initial;
  ProxGradientSource prox_gradient = ProxGradientSource::Auto;

  /// Check mu_n -> 0, sum mu_n = inf, and summable beta_n. Off only for
  /// degenerate reductions used in testing (e.g. mu = 0).
  bool check_assumptions = true;
  /// Evaluate the per-iteration descent diagnostics (one extra operator
  /// application per iteration).
  bool record_diagnostics = true;
  /// Keep every (zeta_n, sigma_n, rho_n) in the result.
  bool keep_trace = false;
};

using Config = SolverConfig<double>;

template <typename Scalar>
void validate(const SolverConfig<Scalar>& cfg) {
  require(cfg.tau > Scalar(0) && cfg.tau < Scalar(1), "tau must lie in (0, 1)");
  require(cfg.tol > Scalar(0), "tol must be positive");
  require(cfg.max_iter > 0, "max_iter must be positive");
  require(cfg.eta > Scalar(0), "eta must be positive");
  require(cfg.linesearch.initial_step > Scalar(0), "line search initial step must be positive");
  require(cfg.linesearch.backtrack > Scalar(0) && cfg.linesearch.backtrack < Scalar(1),
          "line search backtrack factor must lie in (0, 1)");
  require(cfg.linesearch.max_backtracks >= 0, "max_backtracks must be nonnegative");
  require(static_cast<bool>(cfg.mu.fn) && static_cast<bool>(cfg.beta.fn), "schedules must be set");
  if (!cfg.check_assumptions) return;

  require(cfg.beta_max >= Scalar(0) && cfg.beta_max < Scalar(1), "beta_max must lie in [0, 1)");
  using Form = typename Schedule<Scalar>::Form;
  if (cfg.mu.form != Form::Harmonic) {
    // Spot check: values in (0, 1) that shrink. A divergent sum cannot be
    // verified from samples.
    for (int n = 1; n <= 1000; ++n) {
      const Scalar m = cfg.mu(n);
      require(m > Scalar(0) && m < Scalar(1), "mu_n must lie in (0, 1)");
    }
    require(cfg.mu(1000) < cfg.mu(1), "mu_n must decrease towards 0");
  }
  if (cfg.beta.form == Form::Constant) {
    require(cfg.beta.constant_value >= Scalar(0) && cfg.beta.constant_value <= cfg.beta_max,
            "beta must lie in [0, beta_max]");
  } else {
    for (int n = 1; n <= 1000; ++n) {
      const Scalar b = cfg.beta(n);
      require(b >= Scalar(0) && b <= cfg.beta_max, "beta_n must lie in [0, beta_max]");
    }
  }
}

/// Differentiable data term for composite problems.
template <typename Scalar>
struct SmoothObjective {
  std::function<Scalar(const Vector<Scalar>&)> value;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> gradient;
  Scalar gradient_lipschitz;

  static SmoothObjective from(const LeastSquaresObjective<Scalar>& ls) {
    return {[ls](const Vector<Scalar>& x) { return ls.value(x); },
            [ls](const Vector<Scalar>& x) { return ls.gradient(x); }, ls.gradient_lipschitz()};
  }
};

/// Split feasibility problem: find x in C with A(x) in Q, optionally with a
/// composite objective g(x) + nu(x) over C.
template <typename Scalar>
struct ProblemInstance {
  ConvexSet<Scalar> set_c;
  ConvexSet<Scalar> set_q;
  ForwardOperator<Scalar> op;
  LegendreFunction<Scalar> f1;
  LegendreFunction<Scalar> f2;
  ProximableFunction<Scalar> regularizer = ProximableFunction<Scalar>::zero();
  std::optional<SmoothObjective<Scalar>> objective{};
  /// A known solution, used only for diagnostics.
  std::optional<Vector<Scalar>> reference{};

  void validate() const {
    const auto& in = op.in_space();
    const auto& out = op.out_space();
    if (!(set_c.space() == in) || !(f1.space() == in)) {
      throw DimensionMismatch("C and f1 must live on the operator's input space");
    }
    if (!(set_q.space() == out) || !(f2.space() == out)) {
      throw DimensionMismatch("Q and f2 must live on the operator's output space");
    }
    if (reference) in.check_point(*reference, "reference solution");
  }

  /// Composite objective g(x) + nu(x); requires a registered objective.
  Scalar composite_value(const Vector<Scalar>& x) const {
    if (!objective) throw MissingObjective("instance has no smooth objective");
    return objective->value(x) + regularizer.value(op.in_space(), x);
  }
};

using Problem = ProblemInstance<double>;

template <typename Scalar>
struct IterationRecord {
  int n = 0;
  /// ||zeta_{n+1} - zeta_n||
  Scalar residual = Scalar(0);
  /// Feasibility of zeta_n.
  Scalar dist_c = Scalar(0);
  Scalar gap_q = Scalar(0);
  Scalar step = Scalar(0);
  int backtracks = 0;
  std::optional<Scalar> bregman_to_ref{};

  // Descent diagnostics (Bregman schemes only).
  Scalar rho_sigma_distance = Scalar(0);  // D_f1(rho_n, sigma_n)
  std::optional<Scalar> ref_to_rho{};      // D_f1(ref, rho_n)
  std::optional<Scalar> ref_to_sigma{};    // D_f1(ref, sigma_n)
  /// Whether D_f1(rho, sigma) + D_f2(A rho, A sigma) <= tau D_f1(rho, sigma).
  bool literal_armijo = false;
};

template <typename Scalar>
struct IterateSnapshot {
  Vector<Scalar> zeta;
  Vector<Scalar> sigma;
  Vector<Scalar> rho;
};

template <typename Scalar>
struct SolveResult {
  Vector<Scalar> final;
  Status status = Status::MaxIterations;
  std::string error;
  int iterations = 0;
  std::vector<IterationRecord<Scalar>> history;
  std::vector<IterateSnapshot<Scalar>> trace;
  double elapsed = 0.0;
};

template <typename Scalar>
struct FeasibilityGap {
  Scalar dist_c;
  Scalar gap_q;
};

/// (||x - P_C x||, ||A x - P_Q A x||) with metric projections.
template <typename Scalar>
FeasibilityGap<Scalar> feasibility_gap(const ProblemInstance<Scalar>& inst, const Vector<Scalar>& x) {
  const Vector<Scalar> ax = inst.op.apply(x);
  return {inst.set_c.space().norm((x - metric_project(inst.set_c, x)).eval()),
          inst.set_q.space().norm((ax - metric_project(inst.set_q, ax)).eval())};
}

/// 2(1 - tau) / (L_f1 + L_f2 + L_A), or nothing if a constant is unknown.
template <typename Scalar>
std::optional<Scalar> step_upper_bound(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg) {
  const auto l1 = inst.f1.gradient_lipschitz();
  const auto l2 = inst.f2.gradient_lipschitz();
  if (!l1 || !l2) return std::nullopt;
  return Scalar(2) * (Scalar(1) - cfg.tau) / (*l1 + *l2 + inst.op.lipschitz());
}

template <typename Scalar>
struct LineSearchResult {
  Scalar step;
  Vector<Scalar> rho;
  int backtracks;
  /// v = grad f1(s) - grad f1(P_C s) + A*(grad f2(A s) - grad f2(P_Q A s))
  Vector<Scalar> direction;
  /// D_f1(s, P_C s) + D_f2(A s, P_Q A s)
  Scalar infeasibility;
};

/// Backtracking step for the Bregman projection update at s.
///
/// Tries iota = iota0 * backtrack^k, k = 0, 1, ..., and accepts the first
/// one with
///     iota * ||v||^2 <= 4 tau [D_f1(s, P_C s) + D_f2(A s, P_Q A s)],
/// i.e. the step may not overshoot the measured infeasibility. Under the
/// half squared norm and a linear A this is exactly the condition for
/// ||rho - z|| < ||s - z|| for every solution z. Returns
/// rho = grad f1*(grad f1(s) - iota v).
template <typename Scalar>
LineSearchResult<Scalar> armijo_step(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                     const Vector<Scalar>& s) {
  const auto& f1 = inst.f1;
  const auto& f2 = inst.f2;
  if (!f1.in_domain(s)) throw DomainError("armijo_step: point outside dom(grad f1)");

  const Vector<Scalar> pc = bregman_project(inst.set_c, f1, s);
  const Vector<Scalar> as = inst.op.apply(s);
  const Vector<Scalar> pq = bregman_project(inst.set_q, f2, as);

  const Vector<Scalar> gs = f1.gradient(s);
  Vector<Scalar> v = gs - f1.gradient(pc);
  const Vector<Scalar> dual_q = f2.gradient(as) - f2.gradient(pq);
  if (!inst.set_q.is_whole_space()) v += inst.op.adjoint_at(s, dual_q);

  const Scalar infeasibility = bregman_distance(f1, s, pc) + bregman_distance(f2, as, pq);

  Scalar step = cfg.linesearch.initial_step;
  if (cfg.cap_step_by_lipschitz) {
    if (const auto cap = step_upper_bound(inst, cfg)) step = std::min(step, *cap);
  }

  const Scalar vv = f1.space().squared_norm(v);
  if (vv == Scalar(0)) return {step, s, 0, std::move(v), infeasibility};

  const Scalar budget = Scalar(4) * cfg.tau * infeasibility;
  int k = 0;
  while (step * vv > budget) {
    if (k == cfg.linesearch.max_backtracks) {
      throw LineSearchFailure("armijo_step: no acceptable step after " + std::to_string(k) + " backtracks");
    }
    step *= cfg.linesearch.backtrack;
    ++k;
  }
  Vector<Scalar> rho = f1.conjugate_gradient((gs - step * v).eval());
  return {step, std::move(rho), k, std::move(v), infeasibility};
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

/// Residual plateau with the iterate still visibly infeasible.
template <typename Scalar>
class PlateauDetector {
 public:
  static constexpr std::size_t kWindow = 100;

  bool update(Scalar residual, Scalar dist_c, Scalar gap_q) {
    window_.push_back(residual);
    if (window_.size() > kWindow + 1) window_.pop_front();
    if (window_.size() <= kWindow) return false;
    const auto [lo, hi] = std::minmax_element(window_.begin(), window_.end());
    const bool flat = (*hi - *lo) <= Scalar(1e-12) * *hi;
    const bool infeasible = dist_c > Scalar(1e-3) || gap_q > Scalar(1e-3);
    return flat && infeasible && *hi > Scalar(0);
  }

 private:
  std::deque<Scalar> window_;
};

template <typename Scalar>
void check_start(const ProblemInstance<Scalar>& inst, const Vector<Scalar>& zeta0) {
  inst.op.in_space().check_point(zeta0, "initial point");
}

/// Shared driver for the plain (hybrid = false) and hybrid proximal schemes.
template <typename Scalar>
SolveResult<Scalar> run_bregman_scheme(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                       const Vector<Scalar>& zeta0, bool hybrid) {
  inst.validate();
  validate(cfg);
  check_start(inst, zeta0);
  const auto& f1 = inst.f1;
  if (!f1.in_domain(zeta0)) throw DomainError("initial point outside dom(grad f1)");

  const std::function<Vector<Scalar>(const Vector<Scalar>&)>* forward = nullptr;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> legendre_grad = [&f1](const Vector<Scalar>& x) {
    return f1.gradient(x);
  };
  if (hybrid) {
    switch (cfg.prox_gradient) {
      case ProxGradientSource::Auto:
        forward = inst.objective ? &inst.objective->gradient : &legendre_grad;
        break;
      case ProxGradientSource::Objective:
        if (!inst.objective) throw MissingObjective("objective gradient requested but none registered");
        forward = &inst.objective->gradient;
        break;
      case ProxGradientSource::Legendre:
        forward = &legendre_grad;
        break;
      case ProxGradientSource::Disabled:
        break;
    }
  }

  const auto t0 = Clock::now();
  SolveResult<Scalar> out;
  const auto& space = f1.space();

  Vector<Scalar> prev = zeta0;
  Vector<Scalar> cur = zeta0;
  Vector<Scalar> g_prev = f1.gradient(prev);
  Vector<Scalar> g_cur = g_prev;
  const Vector<Scalar> g_anchor = g_prev;
  PlateauDetector<Scalar> plateau;
  out.status = Status::MaxIterations;
  out.final = cur;

  try {
    for (int n = 1; n <= cfg.max_iter; ++n) {
      const Scalar mu = cfg.mu(n);
      const Scalar beta = cfg.beta(n);

      Vector<Scalar> sigma;
      // Distance the proximal step moved the iterate; zero for the plain scheme.
      Scalar prox_move = Scalar(0);
      if (hybrid) {
        Vector<Scalar> pre = cur;
        if (forward) pre -= cfg.eta * (*forward)(cur);
        const Vector<Scalar> tilde = prox(inst.regularizer, cfg.eta, pre);
        prox_move = space.norm((tilde - cur).eval());
        const Vector<Scalar> g_tilde = f1.gradient(tilde);
        sigma = f1.conjugate_gradient((g_tilde + beta * (g_tilde - g_prev)).eval());
      } else {
        sigma = f1.conjugate_gradient((g_cur + beta * (g_cur - g_prev)).eval());
      }

      auto ls = armijo_step(inst, cfg, sigma);

      IterationRecord<Scalar> rec;
      rec.n = n;
      rec.step = ls.step;
      rec.backtracks = ls.backtracks;
      const auto gap = feasibility_gap(inst, cur);
      rec.dist_c = gap.dist_c;
      rec.gap_q = gap.gap_q;
      if (inst.reference) rec.bregman_to_ref = bregman_distance(f1, *inst.reference, cur);
      if (cfg.record_diagnostics) {
        rec.rho_sigma_distance = bregman_distance(f1, ls.rho, sigma);
        if (inst.reference) {
          rec.ref_to_rho = bregman_distance(f1, *inst.reference, ls.rho);
          rec.ref_to_sigma = bregman_distance(f1, *inst.reference, sigma);
        }
        try {
          const Scalar lhs = rec.rho_sigma_distance +
                             bregman_distance(inst.f2, inst.op.apply(ls.rho), inst.op.apply(sigma));
          rec.literal_armijo = lhs <= cfg.tau * rec.rho_sigma_distance;
        } catch (const DomainError&) {
          rec.literal_armijo = false;
        }
      }

      // sigma_n = rho_n: the extrapolated point already solves the problem.
      // The hybrid scheme also needs a stationary proximal step, otherwise a
      // feasible but non-optimal sigma would end a composite run.
      const Scalar sigma_rho = space.norm((sigma - ls.rho).eval());
      if (sigma_rho < cfg.tol * Scalar(1e-2) && prox_move < cfg.tol) {
        rec.residual = sigma_rho;
        if (cfg.keep_trace) out.trace.push_back({cur, sigma, ls.rho});
        out.history.push_back(rec);
        out.final = ls.rho;
        out.status = Status::Converged;
        break;
      }

      const Vector<Scalar>& g_pull = cfg.anchor == Anchor::Initial ? g_anchor : g_cur;
      const Vector<Scalar> next = f1.conjugate_gradient((mu * g_pull + (Scalar(1) - mu) * f1.gradient(ls.rho)).eval());
      rec.residual = space.norm((next - cur).eval());
      if (cfg.keep_trace) out.trace.push_back({cur, sigma, ls.rho});
      out.history.push_back(rec);

      prev = std::move(cur);
      g_prev = std::move(g_cur);
      cur = next;
      g_cur = f1.gradient(cur);
      out.final = cur;

      if (rec.residual < cfg.tol) {
        out.status = Status::Converged;
        break;
      }
      if (plateau.update(rec.residual, rec.dist_c, rec.gap_q)) {
        out.status = Status::InfeasibleSuspected;
        break;
      }
    }
  } catch (const Error& e) {
    out.status = Status::Error;
    out.error = e.what();
  }
  out.iterations = static_cast<int>(out.history.size());
  out.elapsed = seconds_since(t0);
  return out;
}

template <typename Scalar>
SolveResult<Scalar> run_cq_scheme(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                  const Vector<Scalar>& zeta0, bool inertial) {
  inst.validate();
  validate(cfg);
  check_start(inst, zeta0);
  if (!inst.op.is_linear()) throw RequiresLinearOperator("CQ iterations need a linear operator");

  const auto t0 = Clock::now();
  const auto& space = inst.op.in_space();
  const Scalar lip = inst.op.lipschitz();
  const Scalar gamma = lip > Scalar(0) ? Scalar(1) / (lip * lip) : Scalar(1);

  SolveResult<Scalar> out;
  out.status = Status::MaxIterations;
  Vector<Scalar> prev = zeta0;
  Vector<Scalar> cur = zeta0;
  out.final = cur;
  PlateauDetector<Scalar> plateau;

  try {
    for (int n = 1; n <= cfg.max_iter; ++n) {
      const Scalar beta = inertial ? cfg.beta(n) : Scalar(0);
      const Vector<Scalar> w = cur + beta * (cur - prev);
      const Vector<Scalar> aw = inst.op.apply(w);
      const Vector<Scalar> excess = aw - metric_project(inst.set_q, aw);
      const Vector<Scalar> next = metric_project(inst.set_c, (w - gamma * inst.op.adjoint(excess)).eval());

      IterationRecord<Scalar> rec;
      rec.n = n;
      rec.step = gamma;
      const auto gap = feasibility_gap(inst, cur);
      rec.dist_c = gap.dist_c;
      rec.gap_q = gap.gap_q;
      if (inst.reference) rec.bregman_to_ref = bregman_distance(inst.f1, *inst.reference, cur);
      rec.residual = space.norm((next - cur).eval());
      if (cfg.keep_trace) out.trace.push_back({cur, w, next});
      out.history.push_back(rec);

      prev = std::move(cur);
      cur = next;
      out.final = cur;
      if (rec.residual < cfg.tol) {
        out.status = Status::Converged;
        break;
      }
      if (plateau.update(rec.residual, rec.dist_c, rec.gap_q)) {
        out.status = Status::InfeasibleSuspected;
        break;
      }
    }
  } catch (const Error& e) {
    out.status = Status::Error;
    out.error = e.what();
  }
  out.iterations = static_cast<int>(out.history.size());
  out.elapsed = seconds_since(t0);
  return out;
}

}  // namespace detail

/// Inertial Bregman projection scheme with an anchored update:
///   sigma_n = grad f1*(grad f1(z_n) + beta_n (grad f1(z_n) - grad f1(z_{n-1})))
///   rho_n   = grad f1*(grad f1(sigma_n) - iota_n v(sigma_n))    (armijo_step)
///   z_{n+1} = grad f1*(mu_n grad f1(z_0) + (1 - mu_n) grad f1(rho_n))
/// with z_1 = z_0. Stops when ||z_{n+1} - z_n|| < tol, or when
/// ||sigma_n - rho_n|| < tol / 100 (then final = rho_n).
///
/// Invalid configurations throw ConfigError; failures inside the iteration
/// are reported through status = Error.
template <typename Scalar>
SolveResult<Scalar> solve_algorithm1(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                     const Vector<Scalar>& zeta0) {
  return detail::run_bregman_scheme(inst, cfg, zeta0, false);
}

/// Hybrid proximal variant: the extrapolation starts from
///   tilde_n = prox_{eta nu}(z_n - eta g(z_n))
/// and uses grad f1(tilde_n) - grad f1(z_{n-1}) as the inertial direction.
/// The rest matches solve_algorithm1.
template <typename Scalar>
SolveResult<Scalar> solve_algorithm2(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                     const Vector<Scalar>& zeta0) {
  return detail::run_bregman_scheme(inst, cfg, zeta0, true);
}

/// z_{n+1} = P_C(z_n - gamma A^T(A z_n - P_Q A z_n)), gamma = 1 / L^2.
template <typename Scalar>
SolveResult<Scalar> solve_cq(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                             const Vector<Scalar>& zeta0) {
  return detail::run_cq_scheme(inst, cfg, zeta0, false);
}

/// CQ step taken from z_n + beta_n (z_n - z_{n-1}).
template <typename Scalar>
SolveResult<Scalar> solve_inertial_cq(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                      const Vector<Scalar>& zeta0) {
  return detail::run_cq_scheme(inst, cfg, zeta0, true);
}

/// z_{n+1} = P_C(prox_{eta nu}(z_n - eta grad g(z_n))), eta = 1 / L_g.
template <typename Scalar>
SolveResult<Scalar> solve_proximal_gradient(const ProblemInstance<Scalar>& inst, const SolverConfig<Scalar>& cfg,
                                            const Vector<Scalar>& zeta0) {
  inst.validate();
  validate(cfg);
  detail::check_start(inst, zeta0);
  if (!inst.objective) throw MissingObjective("proximal gradient needs a smooth objective");

  const auto t0 = detail::Clock::now();
  const auto& space = inst.op.in_space();
  const Scalar lg = inst.objective->gradient_lipschitz;
  const Scalar eta = lg > Scalar(0) ? Scalar(1) / lg : Scalar(1);

  SolveResult<Scalar> out;
  out.status = Status::MaxIterations;
  Vector<Scalar> cur = zeta0;
  out.final = cur;
  detail::PlateauDetector<Scalar> plateau;

  try {
    for (int n = 1; n <= cfg.max_iter; ++n) {
      const Vector<Scalar> forward = cur - eta * inst.objective->gradient(cur);
      const Vector<Scalar> next = metric_project(inst.set_c, prox(inst.regularizer, eta, forward));

      IterationRecord<Scalar> rec;
      rec.n = n;
      rec.step = eta;
      const auto gap = feasibility_gap(inst, cur);
      rec.dist_c = gap.dist_c;
      rec.gap_q = gap.gap_q;
      if (inst.reference) rec.bregman_to_ref = bregman_distance(inst.f1, *inst.reference, cur);
      rec.residual = space.norm((next - cur).eval());
      if (cfg.keep_trace) out.trace.push_back({cur, forward, next});
      out.history.push_back(rec);

      cur = next;
      out.final = cur;
      if (rec.residual < cfg.tol) {
        out.status = Status::Converged;
        break;
      }
      if (plateau.update(rec.residual, rec.dist_c, rec.gap_q)) {
        out.status = Status::InfeasibleSuspected;
        break;
      }
    }
  } catch (const Error& e) {
    out.status = Status::Error;
    out.error = e.what();
  }
  out.iterations = static_cast<int>(out.history.size());
  out.elapsed = detail::seconds_since(t0);
  return out;
}

}  // namespace bregsfp
