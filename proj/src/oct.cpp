#include "qctrl/oct.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Dense>

#include "qctrl/parallel.hpp"
#include "qctrl/rng.hpp"

namespace qctrl::oct {

namespace {

using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BudgetExhausted {};

// Counts cost evaluations against the budget and tracks the best feasible
// point seen, so a budget-terminated run still returns its best iterate.
struct Evaluator {
  const SystemParams& params;
  int n_per_control = 0;
  long budget = 0;
  long evals = 0;
  VectorXd best_x{};
  double best_f = kInf;

  double operator()(const VectorXd& x) {
    if (evals >= budget) throw BudgetExhausted{};
    ++evals;
    ParamVector a;
    a.n_per_control = n_per_control;
    a.alpha.assign(x.data(), x.data() + x.size());
    const double f = cost(a, params);
    if (f < best_f) {
      best_f = f;
      best_x = x;
    }
    return f;
  }
};

VectorXd clip_box(VectorXd x, double upper) {
  return x.cwiseMax(0.0).cwiseMin(upper);
}

// Bounds-aware finite differences; f0 is the cost at x (used one-sided).
VectorXd fd_gradient(Evaluator& ev, const VectorXd& x, double f0, double upper) {
  VectorXd g(x.size());
  VectorXd xt = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(x[i]));
    const bool up_ok = x[i] + h <= upper;
    const bool down_ok = x[i] - h >= 0.0;
    if (up_ok && down_ok) {
      xt[i] = x[i] + h;
      const double fp = ev(xt);
      xt[i] = x[i] - h;
      const double fm = ev(xt);
      g[i] = (fp - fm) / (2.0 * h);
    } else if (up_ok) {
      xt[i] = x[i] + h;
      g[i] = (ev(xt) - f0) / h;
    } else {
      xt[i] = x[i] - h;
      g[i] = (f0 - ev(xt)) / h;
    }
    xt[i] = x[i];
  }
  return g;
}

struct IterateState {
  VectorXd x;
  double f = kInf;
  bool converged = false;
};

// ---------------------------------------------------------------------------
// Nelder-Mead with the standard reflection/expansion/contraction/shrink
// coefficients (1, 2, 0.5, 0.5). Trial vertices are clipped into the box
// before evaluation.
IterateState nelder_mead(Evaluator& ev, const VectorXd& x0, double upper) {
  const Eigen::Index n = x0.size();
  const double edge = 0.1 * upper;

  std::vector<std::pair<double, VectorXd>> simplex;
  simplex.reserve(n + 1);
  simplex.emplace_back(ev(x0), x0);
  for (Eigen::Index i = 0; i < n; ++i) {
    VectorXd v = x0;
    v[i] = (v[i] + edge <= upper) ? v[i] + edge : v[i] - edge;
    v = clip_box(std::move(v), upper);
    simplex.emplace_back(ev(v), v);
  }

  IterateState out;
  try {
    while (true) {
      std::sort(simplex.begin(), simplex.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (simplex.back().first - simplex.front().first < kCostChangeTol) {
        out.converged = true;
        break;
      }
      VectorXd centroid = VectorXd::Zero(n);
      for (Eigen::Index i = 0; i < n; ++i) centroid += simplex[i].second;
      centroid /= static_cast<double>(n);
      const VectorXd& worst = simplex.back().second;
      const double f_worst = simplex.back().first;
      const double f_best = simplex.front().first;
      const double f_second = simplex[n - 1].first;

      const VectorXd xr = clip_box(centroid + (centroid - worst), upper);
      const double fr = ev(xr);
      if (fr < f_best) {
        const VectorXd xe = clip_box(centroid + 2.0 * (centroid - worst), upper);
        const double fe = ev(xe);
        simplex.back() = (fe < fr) ? std::make_pair(fe, xe) : std::make_pair(fr, xr);
      } else if (fr < f_second) {
        simplex.back() = {fr, xr};
      } else {
        const bool outside = fr < f_worst;
        const VectorXd xc = outside ? clip_box(centroid + 0.5 * (xr - centroid), upper)
                                    : clip_box(centroid + 0.5 * (worst - centroid), upper);
        const double fc = ev(xc);
        if (fc < std::min(fr, f_worst)) {
          simplex.back() = {fc, xc};
        } else {
          for (Eigen::Index i = 1; i <= n; ++i) {
            simplex[i].second =
                simplex.front().second + 0.5 * (simplex[i].second - simplex.front().second);
            simplex[i].first = ev(simplex[i].second);
          }
        }
      }
    }
  } catch (const BudgetExhausted&) {
  }
  out.x = ev.best_x;
  out.f = ev.best_f;
  return out;
}

// ---------------------------------------------------------------------------
// Powell's direction-set method. Line minimizations bracket then
// golden-section; bounds are honored by clipping trial points.

struct LineResult {
  double f;
  VectorXd x;
};

LineResult line_minimize(Evaluator& ev, const VectorXd& x0, const VectorXd& dir,
                         double f0, double scale, double upper) {
  auto point = [&](double t) { return clip_box(x0 + t * dir, upper); };
  auto phi = [&](double t) { return ev(point(t)); };

  // Bracket a minimum starting from t = 0.
  const double golden = 1.618033988749895;
  double a = 0.0, fa = f0;
  double b = scale;
  double fb = phi(b);
  if (fb > fa) {
    b = -scale;
    fb = phi(b);
    if (fb > fa) {
      // Minimum is between -scale and +scale; golden-section directly.
      a = -scale;
      fa = fb;
      b = scale;
      fb = phi(b);
    }
  }
  double c = b + golden * (b - a), fc = phi(c);
  int guard = 0;
  while (fc < fb && guard++ < 60) {
    a = b;
    fa = fb;
    b = c;
    fb = fc;
    c = b + golden * (b - a);
    fc = phi(c);
  }

  // Golden-section on [a, c] (fb <= fa, fb <= fc).
  const double inv_golden = 0.3819660112501051;
  double lo = std::min(a, c), hi = std::max(a, c);
  double m1 = lo + inv_golden * (hi - lo);
  double m2 = hi - inv_golden * (hi - lo);
  double f1 = phi(m1), f2 = phi(m2);
  for (int it = 0; it < 80 && hi - lo > 1e-10 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    if (f1 < f2) {
      hi = m2;
      m2 = m1;
      f2 = f1;
      m1 = lo + inv_golden * (hi - lo);
      f1 = phi(m1);
    } else {
      lo = m1;
      m1 = m2;
      f1 = f2;
      m2 = hi - inv_golden * (hi - lo);
      f2 = phi(m2);
    }
  }
  const double t_best = (f1 < f2) ? m1 : m2;
  const double f_best = std::min(f1, f2);
  if (f_best < f0) return {f_best, point(t_best)};
  return {f0, x0};
}

IterateState powell(Evaluator& ev, const VectorXd& x0, double upper) {
  const Eigen::Index n = x0.size();
  const double scale = 0.1 * upper;
  std::vector<VectorXd> dirs(n);
  for (Eigen::Index i = 0; i < n; ++i) dirs[i] = VectorXd::Unit(n, i);

  IterateState out;
  VectorXd x = x0;
  double f = ev(x);
  try {
    while (true) {
      const VectorXd x_start = x;
      const double f_start = f;
      double biggest_drop = 0.0;
      Eigen::Index drop_idx = 0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double f_before = f;
        auto res = line_minimize(ev, x, dirs[i], f, scale, upper);
        f = res.f;
        x = res.x;
        if (f_before - f > biggest_drop) {
          biggest_drop = f_before - f;
          drop_idx = i;
        }
      }
      if (f_start - f < kCostChangeTol) {
        out.converged = true;
        break;
      }
      // Direction replacement test (Numerical Recipes form).
      const VectorXd x_extrap = clip_box(2.0 * x - x_start, upper);
      const double f_extrap = ev(x_extrap);
      if (f_extrap < f_start) {
        const double t = 2.0 * (f_start - 2.0 * f + f_extrap) *
                             (f_start - f - biggest_drop) * (f_start - f - biggest_drop) -
                         biggest_drop * (f_start - f_extrap) * (f_start - f_extrap);
        if (t < 0.0) {
          VectorXd new_dir = x - x_start;
          const double norm = new_dir.norm();
          if (norm > 0.0) {
            new_dir /= norm;
            auto res = line_minimize(ev, x, new_dir, f, scale, upper);
            f = res.f;
            x = res.x;
            dirs[drop_idx] = new_dir;
          }
        }
      }
    }
  } catch (const BudgetExhausted&) {
  }
  out.x = ev.best_x;
  out.f = ev.best_f;
  return out;
}

// ---------------------------------------------------------------------------
// Projected L-BFGS (memory 10) with a strong-Wolfe line search; the search
// direction is deactivated on bound-active coordinates and the step is
// capped at the first bound crossing, so iterates stay feasible.

struct WolfeResult {
  bool ok = false;
  double t = 0.0;
  double f = kInf;
  VectorXd x;
  VectorXd g;
};

WolfeResult strong_wolfe(Evaluator& ev, const VectorXd& x, const VectorXd& d,
                         double f0, double dphi0, double t_max, double upper) {
  constexpr double c1 = 1e-4;
  constexpr double c2 = 0.9;
  WolfeResult res;

  auto eval_at = [&](double t, bool with_grad) {
    res.t = t;
    res.x = x + t * d;
    res.f = ev(res.x);
    if (with_grad) res.g = fd_gradient(ev, res.x, res.f, upper);
  };

  auto zoom = [&](double lo, double f_lo, double hi) {
    for (int it = 0; it < 25; ++it) {
      const double t = 0.5 * (lo + hi);
      eval_at(t, false);
      if (res.f > f0 + c1 * t * dphi0 || res.f >= f_lo) {
        hi = t;
        continue;
      }
      res.g = fd_gradient(ev, res.x, res.f, upper);
      const double dphi = res.g.dot(d);
      if (std::abs(dphi) <= -c2 * dphi0) {
        res.ok = true;
        return;
      }
      if (dphi * (hi - lo) >= 0.0) hi = lo;
      lo = t;
      f_lo = res.f;
    }
    // No strict Wolfe point located; accept the last trial if it descends.
    if (res.f < f0) {
      res.g = fd_gradient(ev, res.x, res.f, upper);
      res.ok = true;
    }
  };

  double t_prev = 0.0;
  double f_prev = f0;
  double t = std::min(1.0, t_max);
  for (int it = 0; it < 20; ++it) {
    eval_at(t, false);
    if (res.f > f0 + c1 * t * dphi0 || (it > 0 && res.f >= f_prev)) {
      zoom(t_prev, f_prev, t);
      return res;
    }
    res.g = fd_gradient(ev, res.x, res.f, upper);
    const double dphi = res.g.dot(d);
    if (std::abs(dphi) <= -c2 * dphi0) {
      res.ok = true;
      return res;
    }
    if (dphi >= 0.0) {
      zoom(t, res.f, t_prev);
      return res;
    }
    if (t >= t_max) {  // capped by the box; accept the boundary step
      res.ok = res.f < f0;
      return res;
    }
    t_prev = t;
    f_prev = res.f;
    t = std::min(2.0 * t, t_max);
  }
  res.ok = res.f < f0;
  if (res.ok && res.g.size() == 0) res.g = fd_gradient(ev, res.x, res.f, upper);
  return res;
}

IterateState lbfgsb(Evaluator& ev, const VectorXd& x0, double upper) {
  constexpr int kMemory = 10;
  const Eigen::Index n = x0.size();
  const double eps_active = 1e-12 * std::max(1.0, upper);

  std::deque<std::pair<VectorXd, VectorXd>> memory;  // (s, y)

  auto two_loop = [&](const VectorXd& g) {
    VectorXd q = g;
    std::vector<double> alpha(memory.size());
    for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
      const auto& [s, y] = memory[i];
      alpha[i] = s.dot(q) / y.dot(s);
      q -= alpha[i] * y;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const auto& [s, y] = memory[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (alpha[i] - beta) * s;
    }
    return q;
  };

  // Zeroes the components that sit on a bound with the gradient (or the
  // step) pushing outward; the quasi-Newton model runs on the free subspace.
  auto restrict_to_free = [&](VectorXd v, const VectorXd& x, const VectorXd& g) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x[i] <= eps_active && g[i] > 0.0) ||
          (x[i] >= upper - eps_active && g[i] < 0.0))
        v[i] = 0.0;
    }
    return v;
  };

  IterateState out;
  VectorXd x = clip_box(x0, upper);
  double f;
  VectorXd g;
  try {
    f = ev(x);
    g = fd_gradient(ev, x, f, upper);
    while (true) {
      const double pg_norm = (clip_box(x - g, upper) - x).template lpNorm<Eigen::Infinity>();
      if (pg_norm <= kProjGradTol) {
        out.converged = true;
        break;
      }
      const VectorXd g_free = restrict_to_free(g, x, g);
      VectorXd d = restrict_to_free(-two_loop(g_free), x, g);
      for (Eigen::Index i = 0; i < n; ++i) {
        if ((x[i] <= eps_active && d[i] < 0.0) ||
            (x[i] >= upper - eps_active && d[i] > 0.0))
          d[i] = 0.0;
      }
      double dphi0 = g.dot(d);
      if (!(dphi0 < -1e-14 * d.norm() * g_free.norm()) || d.norm() == 0.0) {
        if (memory.empty()) {
          out.converged = true;  // no free descent direction left
          break;
        }
        memory.clear();
        continue;
      }
      double t_max = kInf;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (d[i] > 0.0)
          t_max = std::min(t_max, (upper - x[i]) / d[i]);
        else if (d[i] < 0.0)
          t_max = std::min(t_max, -x[i] / d[i]);
      }
      auto ls = strong_wolfe(ev, x, d, f, dphi0, t_max, upper);
      if (!ls.ok) {
        if (memory.empty()) {
          // No trial along steepest descent improved the cost at all: the
          // cost-change termination criterion holds on this plateau.
          out.converged = true;
          break;
        }
        memory.clear();
        continue;
      }
      ls.x = clip_box(std::move(ls.x), upper);  // absorb round-off at the box face
      const VectorXd s = ls.x - x;
      const VectorXd y = ls.g - g;
      const double fall = f - ls.f;
      x = ls.x;
      f = ls.f;
      g = ls.g;
      if (s.dot(y) > 1e-10 * s.norm() * y.norm()) {
        memory.emplace_back(s, y);
        if (memory.size() > kMemory) memory.pop_front();
      }
      if (fall < kCostChangeTol) {
        out.converged = true;
        break;
      }
    }
  } catch (const BudgetExhausted&) {
  }
  out.x = ev.best_x;
  out.f = ev.best_f;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

ParamVector ParamVector::zeros(int n_per_control) {
  if (n_per_control < 1) throw std::invalid_argument("ParamVector: n_per_control must be >= 1");
  ParamVector a;
  a.n_per_control = n_per_control;
  a.alpha.assign(2 * static_cast<std::size_t>(n_per_control), 0.0);
  return a;
}

void ParamVector::validate(double omega_max) const {
  if (n_per_control < 1) throw std::invalid_argument("ParamVector: n_per_control must be >= 1");
  if (alpha.size() != 2 * static_cast<std::size_t>(n_per_control))
    throw std::invalid_argument("ParamVector: alpha length must be 2 * n_per_control");
  for (double v : alpha)
    if (!(v >= -1e-12) || !(v <= omega_max + 1e-12))
      throw std::invalid_argument("ParamVector: entry outside [0, omega_max]");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::NelderMead: return "nelder-mead";
    case Method::Powell: return "powell";
    case Method::Lbfgsb: return "lbfgsb";
  }
  return "lbfgsb";
}

Method method_from_name(std::string_view name) {
  if (name == "nelder-mead") return Method::NelderMead;
  if (name == "powell") return Method::Powell;
  if (name == "lbfgsb") return Method::Lbfgsb;
  throw std::invalid_argument("unknown method: " + std::string(name));
}

PulseSchedule alpha_to_schedule(const ParamVector& alpha, const SystemParams& params) {
  params.validate();
  alpha.validate(params.omega_max);
  const int n = alpha.n_per_control;
  std::vector<double> pump(alpha.alpha.begin(), alpha.alpha.begin() + n);
  std::vector<double> stokes(alpha.alpha.begin() + n, alpha.alpha.end());
  return PulseSchedule::piecewise_constant(std::move(pump), std::move(stokes),
                                           params.t_final);
}

ParamVector schedule_to_alpha(const PulseSchedule& schedule) {
  if (schedule.kind != dynamics::ScheduleKind::PiecewiseConstant)
    throw std::invalid_argument("schedule_to_alpha: piecewise-constant schedules only");
  ParamVector a;
  a.n_per_control = schedule.n_segments;
  a.alpha = schedule.values_p;
  a.alpha.insert(a.alpha.end(), schedule.values_s.begin(), schedule.values_s.end());
  return a;
}

double cost(const ParamVector& alpha, const SystemParams& params) {
  const auto schedule = alpha_to_schedule(alpha, params);
  const auto final_state =
      dynamics::evolve_final(dynamics::pure_state(dynamics::kG), schedule, params);
  return 1.0 - dynamics::fidelity(final_state);
}

std::vector<double> numeric_gradient(const ParamVector& alpha,
                                     const SystemParams& params) {
  alpha.validate(params.omega_max);
  Evaluator ev{params, alpha.n_per_control, std::numeric_limits<long>::max()};
  const VectorXd x = Eigen::Map<const VectorXd>(alpha.alpha.data(), alpha.alpha.size());
  const double f0 = ev(x);
  const VectorXd g = fd_gradient(ev, x, f0, params.omega_max);
  return {g.data(), g.data() + g.size()};
}

OptimizationResult minimize(const ParamVector& initial, const SystemParams& params,
                            Method method, long budget) {
  params.validate();
  initial.validate(params.omega_max);
  if (budget < 1) throw std::invalid_argument("minimize: budget must be >= 1");

  Evaluator ev{params, initial.n_per_control, budget};
  const VectorXd x0 =
      Eigen::Map<const VectorXd>(initial.alpha.data(), initial.alpha.size());

  IterateState st;
  switch (method) {
    case Method::NelderMead: st = nelder_mead(ev, x0, params.omega_max); break;
    case Method::Powell: st = powell(ev, x0, params.omega_max); break;
    case Method::Lbfgsb: st = lbfgsb(ev, x0, params.omega_max); break;
  }

  OptimizationResult result;
  result.method = method;
  result.best_alpha.n_per_control = initial.n_per_control;
  const VectorXd best = clip_box(st.x, params.omega_max);
  result.best_alpha.alpha.assign(best.data(), best.data() + best.size());
  result.best_cost = st.f;
  result.fidelity = 1.0 - st.f;
  result.evaluations = ev.evals;
  result.converged = st.converged;
  return result;
}

OptimizationResult multistart(const SystemParams& params, Method method,
                              int n_restarts, std::uint64_t seed, long budget,
                              int n_per_control) {
  params.validate();
  if (n_restarts < 1) throw std::invalid_argument("multistart: n_restarts must be >= 1");

  std::vector<OptimizationResult> results(n_restarts);
  parallel_for_indexed(n_restarts, [&](int r) {
    auto rng = derive_stream(seed, {0x0c7full, static_cast<std::uint64_t>(r)});
    std::uniform_real_distribution<double> uniform(0.0, params.omega_max);
    ParamVector guess;
    guess.n_per_control = n_per_control;
    guess.alpha.resize(2 * static_cast<std::size_t>(n_per_control));
    for (double& v : guess.alpha) v = uniform(rng);
    results[r] = minimize(guess, params, method, budget);
    results[r].restart_index = r;
  });

  int winner = 0;
  for (int r = 1; r < n_restarts; ++r)
    if (results[r].best_cost < results[winner].best_cost) winner = r;
  OptimizationResult best = std::move(results[winner]);
  best.seed = seed;
  return best;
}

double amplitude_weighted_mean_time(const std::vector<double>& values,
                                    double horizon) {
  if (values.empty() || !(horizon > 0.0))
    throw std::invalid_argument("amplitude_weighted_mean_time: empty values or bad horizon");
  const double dt = horizon / static_cast<double>(values.size());
  double total = 0.0, moment = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    total += values[j];
    moment += values[j] * (static_cast<double>(j) + 0.5) * dt;
  }
  if (total <= 0.0) return 0.5 * horizon;
  return moment / total;
}

}  // namespace qctrl::oct
