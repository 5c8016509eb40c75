#ifndef DYNPRIV_SOLVER_HPP
#define DYNPRIV_SOLVER_HPP

// Deterministic fixed-step integration. Grid times are t_start + k*dt
// (computed, never accumulated), so identical inputs give bit-identical
// samples.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dynpriv/dynamics.hpp"
#include "dynpriv/errors.hpp"
#include "dynpriv/linalg.hpp"

namespace dynpriv {

enum class Method { RK4, Euler };

struct IntegratorConfig {
  Method method = Method::RK4;
  double dt = 1e-3;
  double t_final = 50.0;  // horizon, measured from t_start
  int record_stride = 1;
  double t_start = 0.0;   // mask clock at the initial sample
  std::int64_t max_steps = 10'000'000;
  double blowup_threshold = 1e12;

  std::int64_t steps() const { return std::llround(t_final / dt); }

  void validate() const {
    if (!(dt > 0.0) || !(t_final > 0.0)) throw InvalidArgument("integrator: dt and t_final must be > 0");
    if (dt > t_final) throw InvalidArgument("integrator: dt must not exceed t_final");
    if (record_stride < 1) throw InvalidArgument("integrator: record_stride must be >= 1");
    if (!(t_start >= 0.0)) throw InvalidArgument("integrator: t_start must be >= 0");
    if (steps() > max_steps)
      throw InvalidArgument("integrator: " + std::to_string(steps()) + " steps exceed the limit of " +
                            std::to_string(max_steps));
    if (std::abs(static_cast<double>(steps()) * dt - t_final) > 1e-9 * t_final)
      throw InvalidArgument("integrator: t_final must be an integer multiple of dt");
  }
};

/// One explicit step of z' = f(t, z). `f(t, z, dz)` writes into dz.
/// `stages` is scratch of at least 5 * z.size().
template <class F>
void fixed_step(Method method, F&& f, double t, std::span<double> z, double h,
                std::span<double> stages) {
  const std::size_t d = z.size();
  std::span<double> k1 = stages.subspan(0, d), k2 = stages.subspan(d, d),
                    k3 = stages.subspan(2 * d, d), k4 = stages.subspan(3 * d, d),
                    tmp = stages.subspan(4 * d, d);
  f(t, std::span<const double>(z), k1);
  if (method == Method::Euler) {
    for (std::size_t i = 0; i < d; ++i) z[i] += h * k1[i];
    return;
  }
  for (std::size_t i = 0; i < d; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
  f(t + 0.5 * h, std::span<const double>(tmp), k2);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
  f(t + 0.5 * h, std::span<const double>(tmp), k3);
  for (std::size_t i = 0; i < d; ++i) tmp[i] = z[i] + h * k3[i];
  f(t + h, std::span<const double>(tmp), k4);
  for (std::size_t i = 0; i < d; ++i) z[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
}

struct Trajectory {
  Vector times;
  std::vector<Vector> x;  // private state
  std::vector<Vector> y;  // masked output, recomputed from x
  std::vector<Vector> s;  // exosystem (pinned synchronization only)
  std::size_t agent_dim = 1;
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::string config_hash;

  std::size_t size() const { return times.size(); }
  std::size_t state_dim() const { return x.empty() ? 0 : x.front().size(); }
  std::size_t agents() const { return state_dim() / agent_dim; }
  bool has_exosystem() const { return !s.empty(); }
};

/// Integrates the masked system from x0 (and s0 for pinned synchronization).
inline Trajectory integrate(const MaskedSystem& ms, std::span<const double> x0,
                            std::optional<std::span<const double>> s0, const IntegratorConfig& cfg) {
  cfg.validate();
  const std::size_t d = ms.state_dim();
  const std::size_t e = ms.exo_dim();
  if (x0.size() != d) throw InvalidArgument("integrate: x0 has wrong dimension");
  if (e > 0 && (!s0 || s0->size() != e)) throw InvalidArgument("integrate: exosystem initial state required");
  if (!all_finite(x0) || (s0 && !all_finite(*s0))) throw InvalidArgument("integrate: non-finite initial state");

  Vector z(d + e);
  std::copy(x0.begin(), x0.end(), z.begin());
  if (e > 0) std::copy(s0->begin(), s0->end(), z.begin() + static_cast<std::ptrdiff_t>(d));

  Vector work(ms.workspace_size());
  const PinnedSync* pinned = std::get_if<PinnedSync>(&ms.base());
  auto rhs = [&](double t, std::span<const double> zz, std::span<double> dz) {
    const auto xs = zz.first(d);
    const auto ss = zz.subspan(d);
    ms.field(t, xs, ss, dz.first(d), work);
    if (pinned) exosystem_field_into(pinned->drift, ss, dz.subspan(d));
  };

  Trajectory tr;
  tr.agent_dim = agent_dimension(ms.base());
  const std::int64_t n_steps = cfg.steps();
  auto record = [&](double t) {
    tr.times.push_back(t);
    tr.x.emplace_back(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(d));
    tr.y.push_back(ms.bank().eval(t, tr.x.back()));
    if (e > 0) tr.s.emplace_back(z.begin() + static_cast<std::ptrdiff_t>(d), z.end());
  };

  Vector stages(5 * z.size());
  Vector last = z;
  double t_last = cfg.t_start;
  record(cfg.t_start);
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double t = cfg.t_start + static_cast<double>(k) * cfg.dt;
    fixed_step(cfg.method, rhs, t, z, cfg.dt, stages);
    const double t_next = cfg.t_start + static_cast<double>(k + 1) * cfg.dt;
    if (!all_finite(z) || norm_inf(z) > cfg.blowup_threshold) {
      Vector xl(last.begin(), last.begin() + static_cast<std::ptrdiff_t>(d));
      throw NumericalBlowUp("numerical blow-up at t=" + std::to_string(t_next), t_last, std::move(xl));
    }
    last = z;
    t_last = t_next;
    if ((k + 1) % cfg.record_stride == 0 || k + 1 == n_steps) record(t_next);
  }
  return tr;
}

/// Convenience overload for an unmasked system.
inline Trajectory integrate(const SystemSpec& spec, std::span<const double> x0,
                            std::optional<std::span<const double>> s0, const IntegratorConfig& cfg) {
  return integrate(MaskedSystem(spec), x0, s0, cfg);
}

// --------------------------------------------------------- comparison ODE

/// v' = -a v^2 + b v e^{-delta1 t} + c e^{-delta2 t}.
struct ComparisonOde {
  double a = 1.0;
  double b = 0.0;
  double c = 0.0;
  double delta1 = 1.0;
  double delta2 = 1.0;

  double rhs(double t, double v) const {
    return -a * v * v + b * v * std::exp(-delta1 * t) + c * std::exp(-delta2 * t);
  }
};

struct ScalarTrajectory {
  Vector times;
  Vector values;
};

/// Integrates the scalar majorant, clamping at zero (R+ is invariant).
inline ScalarTrajectory solve_comparison_ode(const ComparisonOde& ode, double v0,
                                             const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(ode.a > 0.0) || ode.b < 0.0 || ode.c < 0.0 || !(ode.delta1 > 0.0) || !(ode.delta2 > 0.0))
    throw InvalidArgument("comparison ODE: need a > 0, b >= 0, c >= 0, delta1, delta2 > 0");
  if (!(v0 >= 0.0)) throw InvalidArgument("comparison ODE: v0 must be >= 0");
  ScalarTrajectory out;
  double v = v0;
  out.times.push_back(cfg.t_start);
  out.values.push_back(v);
  Vector stages(5);
  auto f = [&](double t, std::span<const double> z, std::span<double> dz) { dz[0] = ode.rhs(t, z[0]); };
  const std::int64_t n_steps = cfg.steps();
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const double t = cfg.t_start + static_cast<double>(k) * cfg.dt;
    fixed_step(cfg.method, f, t, std::span<double>(&v, 1), cfg.dt, stages);
    v = std::max(v, 0.0);
    if (!std::isfinite(v) || v > cfg.blowup_threshold)
      throw NumericalBlowUp("numerical blow-up at t=" + std::to_string(t + cfg.dt), t,
                            {out.values.back()});
    if ((k + 1) % cfg.record_stride == 0 || k + 1 == n_steps) {
      out.times.push_back(cfg.t_start + static_cast<double>(k + 1) * cfg.dt);
      out.values.push_back(v);
    }
  }
  return out;
}

// ------------------------------------------------------------- CSV export

/// Full double precision (17 significant digits), locale independent.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Header `t,x_0..x_{d-1},y_0..y_{d-1}[,s_0..s_{nu-1}]`, one row per sample.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const std::size_t d = tr.state_dim();
  const std::size_t e = tr.has_exosystem() ? tr.s.front().size() : 0;
  os << "t";
  for (std::size_t i = 0; i < d; ++i) os << ",x_" << i;
  for (std::size_t i = 0; i < d; ++i) os << ",y_" << i;
  for (std::size_t i = 0; i < e; ++i) os << ",s_" << i;
  os << '\n';
  std::string line;
  for (std::size_t k = 0; k < tr.size(); ++k) {
    line = format_double(tr.times[k]);
    for (double v : tr.x[k]) (line += ',') += format_double(v);
    for (double v : tr.y[k]) (line += ',') += format_double(v);
    if (e > 0)
      for (double v : tr.s[k]) (line += ',') += format_double(v);
    line += '\n';
    os << line;
  }
}

}  // namespace dynpriv

#endif  // DYNPRIV_SOLVER_HPP
