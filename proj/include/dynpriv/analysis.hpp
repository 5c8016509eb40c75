#ifndef DYNPRIV_ANALYSIS_HPP
#define DYNPRIV_ANALYSIS_HPP

// Post-processing of trajectories into the quantities the convergence and
// privacy claims are stated in.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "dynpriv/dynamics.hpp"
#include "dynpriv/errors.hpp"
#include "dynpriv/graph.hpp"
#include "dynpriv/linalg.hpp"
#include "dynpriv/solver.hpp"

namespace dynpriv {

/// eta = 1^T x0 / n.
inline double consensus_value(std::span<const double> x0) {
  if (x0.empty()) throw InvalidArgument("consensus_value: empty state");
  return mean(x0);
}

/// x* = (L + Theta)^{-1} Theta x0.
inline Vector fj_equilibrium(const LaplacianMatrix& l, std::span<const double> theta,
                             std::span<const double> x0, double residual_tol = 1e-10) {
  const std::size_t n = l.size();
  if (theta.size() != n || x0.size() != n) throw InvalidArgument("fj_equilibrium: dimension mismatch");
  Matrix m = l.matrix();
  Vector rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    m(i, i) += theta[i];
    rhs[i] = theta[i] * x0[i];
  }
  Vector x = solve(m, rhs);
  Vector res = m * x;
  double scale = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    res[i] -= rhs[i];
    scale = std::max(scale, std::abs(rhs[i]));
  }
  if (norm_inf(res) > residual_tol * scale) throw SingularMatrix("fj_equilibrium: residual too large");
  return x;
}

/// V_mm(t) = max_i x_i(t) - min_i x_i(t).
inline Vector vmm_series(const Trajectory& tr) {
  if (tr.agent_dim != 1) throw InvalidArgument("vmm_series: scalar agents required");
  Vector v;
  v.reserve(tr.size());
  for (const auto& x : tr.x) {
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    v.push_back(*hi - *lo);
  }
  return v;
}

/// |y_i(t) - x_i(t)| per recorded time and channel.
inline std::vector<Vector> mask_gap_series(const Trajectory& tr) {
  std::vector<Vector> gaps;
  gaps.reserve(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    Vector g(tr.x[k].size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::abs(tr.y[k][i] - tr.x[k][i]);
    gaps.push_back(std::move(g));
  }
  return gaps;
}

struct ConservationSeries {
  Vector mean_x;  // 1^T x(t) / n
  Vector mean_y;  // 1^T y(t) / n
};

inline ConservationSeries conservation_series(const Trajectory& tr) {
  ConservationSeries c;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    c.mean_x.push_back(mean(tr.x[k]));
    c.mean_y.push_back(mean(tr.y[k]));
  }
  return c;
}

/// True when some later sample exceeds an earlier one by more than `margin`.
inline bool has_increase(std::span<const double> series, double margin) {
  double running_min = INFINITY;
  for (double v : series) {
    if (v > running_min + margin) return true;
    running_min = std::min(running_min, v);
  }
  return false;
}

inline double series_range(std::span<const double> series) {
  if (series.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(series.begin(), series.end());
  return *hi - *lo;
}

// ------------------------------------------------------ pinning condition

/// Reduced n x n matrix M = q Xi - (Xi L + L^T Xi)/2 - Xi P. Since R > 0 is a
/// common Kronecker factor, the full condition holds iff M is negative definite.
inline Matrix pinning_matrix(const LaplacianMatrix& l, std::span<const double> pins,
                             std::span<const double> xi, double q) {
  const std::size_t n = l.size();
  if (pins.size() != n || xi.size() != n) throw InvalidArgument("pinning_matrix: dimension mismatch");
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      m(i, j) = -0.5 * (xi[i] * l(i, j) + l(j, i) * xi[j]);
  for (std::size_t i = 0; i < n; ++i) m(i, i) += q * xi[i] - xi[i] * pins[i];
  return m;
}

/// Largest eigenvalue of the reduced matrix; the synchronization condition
/// holds iff the returned margin is negative.
inline double check_pinning_condition(const LaplacianMatrix& l, const Matrix& r,
                                      std::span<const double> pins, std::span<const double> xi,
                                      double q) {
  if (!r.square() || !is_symmetric(r) || !(min_eigenvalue_symmetric(r) > 0.0))
    throw InvalidArgument("pinning condition: R must be symmetric positive definite");
  for (double v : xi)
    if (!(v > 0.0)) throw InvalidArgument("pinning condition: xi must be strictly positive");
  return max_eigenvalue_symmetric(pinning_matrix(l, pins, xi, q));
}

struct PinningScan {
  double gain = 0.0;
  double margin = 0.0;
  bool satisfied = false;
};

/// Tries the candidate gains in order on the first `pinned` agents and stops
/// at the first one with a negative margin.
inline PinningScan scan_pinning_gain(const LaplacianMatrix& l, const Matrix& r,
                                     std::span<const double> xi, double q, std::size_t pinned,
                                     std::span<const double> candidates) {
  if (pinned == 0 || pinned > l.size()) throw InvalidArgument("scan_pinning_gain: invalid pinned count");
  PinningScan best;
  for (double p : candidates) {
    Vector pins(l.size(), 0.0);
    for (std::size_t i = 0; i < pinned; ++i) pins[i] = p;
    best = {p, check_pinning_condition(l, r, pins, xi, q), false};
    if (best.margin < 0.0) {
      best.satisfied = true;
      return best;
    }
  }
  return best;
}

// ------------------------------------------------------- synchronization

struct SyncErrorSeries {
  Vector max_agent;  // max_i ||x_i(t) - s(t)||_2
  Vector full;       // ||e(t)||_2 over the stacked error
  Vector inf;        // max_{i,c} |x_ic(t) - s_c(t)|
};

inline SyncErrorSeries sync_error_series(const Trajectory& tr) {
  if (!tr.has_exosystem()) throw InvalidArgument("sync_error_series: trajectory has no exosystem samples");
  const std::size_t nu = tr.agent_dim;
  SyncErrorSeries out;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    double mx = 0.0, full = 0.0, inf = 0.0;
    for (std::size_t i = 0; i < tr.agents(); ++i) {
      double ai = 0.0;
      for (std::size_t c = 0; c < nu; ++c) {
        const double e = tr.x[k][i * nu + c] - tr.s[k][c];
        ai += e * e;
        inf = std::max(inf, std::abs(e));
      }
      full += ai;
      mx = std::max(mx, std::sqrt(ai));
    }
    out.max_agent.push_back(mx);
    out.full.push_back(std::sqrt(full));
    out.inf.push_back(inf);
  }
  return out;
}

// ------------------------------------------------------------- attractors

struct AttractorVerdict {
  double final_error = 0.0;  // ||x(T) - x*||_inf
  double half_error = 0.0;   // ||x(T/2) - x*||_inf
  bool converged = false;    // final_error < tol
  bool tail_decreasing = false;
};

/// Distance of the recorded state from a fixed target at T and T/2. Errors at
/// or below `noise_floor` count as decreasing (nothing left to decrease).
inline AttractorVerdict attractor_verdict(const Trajectory& tr, std::span<const double> x_star,
                                          double tol, double noise_floor = 1e-12) {
  if (tr.size() < 2) throw InvalidArgument("attractor_verdict: trajectory too short");
  if (x_star.size() != tr.state_dim()) throw InvalidArgument("attractor_verdict: dimension mismatch");
  auto err_at = [&](std::size_t k) {
    double e = 0.0;
    for (std::size_t i = 0; i < x_star.size(); ++i) e = std::max(e, std::abs(tr.x[k][i] - x_star[i]));
    return e;
  };
  const double t_half = 0.5 * (tr.times.front() + tr.times.back());
  const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t_half);
  const auto half = static_cast<std::size_t>(it - tr.times.begin());
  AttractorVerdict v;
  v.final_error = err_at(tr.size() - 1);
  v.half_error = err_at(std::min(half, tr.size() - 1));
  v.converged = v.final_error < tol;
  v.tail_decreasing = v.half_error > v.final_error || v.final_error <= noise_floor;
  return v;
}

/// Exosystem-tracking variant: the target moves, so compare x_i(t) to s(t).
inline AttractorVerdict sync_verdict(const Trajectory& tr, double tol, double noise_floor = 1e-12) {
  const SyncErrorSeries e = sync_error_series(tr);
  const double t_half = 0.5 * (tr.times.front() + tr.times.back());
  const auto it = std::lower_bound(tr.times.begin(), tr.times.end(), t_half);
  const auto half = std::min(static_cast<std::size_t>(it - tr.times.begin()), tr.size() - 1);
  AttractorVerdict v;
  v.final_error = e.inf.back();
  v.half_error = e.inf[half];
  v.converged = v.final_error < tol;
  v.tail_decreasing = v.half_error > v.final_error || v.final_error <= noise_floor;
  return v;
}

/// Largest ||x(t) - x*||_inf over the recorded samples.
inline double max_excursion(const Trajectory& tr, std::span<const double> x_star) {
  double m = 0.0;
  for (const auto& x : tr.x)
    for (std::size_t i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i] - x_star[i]));
  return m;
}

}  // namespace dynpriv

#endif  // DYNPRIV_ANALYSIS_HPP
