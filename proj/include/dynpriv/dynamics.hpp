#ifndef DYNPRIV_DYNAMICS_HPP
#define DYNPRIV_DYNAMICS_HPP

// The four case-study vector fields and their masked counterparts
//   x' = f(y),  y = h(t, x, pi).
// Pinned synchronization stacks agent states as x[i*nu + c] and carries the
// exosystem s (dimension nu) alongside.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "dynpriv/errors.hpp"
#include "dynpriv/graph.hpp"
#include "dynpriv/linalg.hpp"
#include "dynpriv/masks.hpp"
#include "dynpriv/random.hpp"

namespace dynpriv {

// ------------------------------------------------------------------ drifts

/// f(x) = A_s x + B tanh(x), tanh taken componentwise.
struct LipschitzDemo {
  Matrix a_s;
  Matrix b;
};

struct Lorenz {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

using Drift = std::variant<LipschitzDemo, Lorenz>;

inline std::size_t drift_dimension(const Drift& d) {
  if (const auto* l = std::get_if<LipschitzDemo>(&d)) return l->a_s.rows();
  return 3;
}

inline void exosystem_field_into(const Drift& drift, std::span<const double> s, std::span<double> ds) {
  if (const auto* l = std::get_if<LipschitzDemo>(&drift)) {
    const std::size_t nu = l->a_s.rows();
    for (std::size_t r = 0; r < nu; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < nu; ++c)
        acc += l->a_s(r, c) * s[c] + l->b(r, c) * std::tanh(s[c]);
      ds[r] = acc;
    }
  } else {
    const auto& z = std::get<Lorenz>(drift);
    ds[0] = z.sigma * (s[1] - s[0]);
    ds[1] = s[0] * (z.rho - s[2]) - s[1];
    ds[2] = s[0] * s[1] - z.beta * s[2];
  }
}

/// ds/dt = f(s).
inline Vector exosystem_field(const Drift& drift, std::span<const double> s) {
  if (s.size() != drift_dimension(drift)) throw InvalidArgument("exosystem: dimension mismatch");
  Vector ds(s.size());
  exosystem_field_into(drift, s, ds);
  return ds;
}

struct Box {
  Vector lo;
  Vector hi;

  static Box cube(std::size_t dim, double lo, double hi) {
    return {Vector(dim, lo), Vector(dim, hi)};
  }
};

/// Sampled one-sided Lipschitz constant: the largest
/// (x-z)^T (f(x)-f(z)) / ((x-z)^T R (x-z)) over random pairs in `box`,
/// moved upward by a factor 1.2 (multiplied when positive, divided when not).
inline double estimate_lipschitz_q(const Drift& drift, const Matrix& r, const Box& box,
                                   int samples, std::uint64_t seed) {
  const std::size_t nu = drift_dimension(drift);
  if (samples < 2) throw InvalidArgument("estimate_lipschitz_q: need at least 2 samples");
  if (r.rows() != nu || r.cols() != nu || box.lo.size() != nu || box.hi.size() != nu)
    throw InvalidArgument("estimate_lipschitz_q: dimension mismatch");
  Rng rng = make_rng(seed);
  Vector x(nu), z(nu), d(nu), fx(nu), fz(nu);
  double best = -INFINITY;
  for (int k = 0; k < samples; ++k) {
    for (std::size_t c = 0; c < nu; ++c) {
      x[c] = uniform(rng, box.lo[c], box.hi[c]);
      z[c] = uniform(rng, box.lo[c], box.hi[c]);
      d[c] = x[c] - z[c];
    }
    const double rd = dot(d, r * d);
    if (!(rd > 0.0)) continue;
    exosystem_field_into(drift, x, fx);
    exosystem_field_into(drift, z, fz);
    double num = 0.0;
    for (std::size_t c = 0; c < nu; ++c) num += d[c] * (fx[c] - fz[c]);
    best = std::max(best, num / rd);
  }
  if (!std::isfinite(best)) throw InvalidArgument("estimate_lipschitz_q: all sampled pairs degenerate");
  return best >= 0.0 ? 1.2 * best : best / 1.2;
}

// ----------------------------------------------------------------- systems

/// x' = -x + kappa A tanh(x).
struct SaturatedNet {
  Matrix a;
  double kappa = 0.0;
};

/// x' = -(L + Theta) x + Theta x_o.
struct FriedkinJohnsen {
  LaplacianMatrix l;
  Vector theta;
  Vector x_o;
  /// Masked variant only: use y_o = h(0, x_o) frozen instead of h(t, x_o).
  bool constant_initial_output = false;
};

/// x' = -L x with L weight-balanced and irreducible.
struct AverageConsensus {
  LaplacianMatrix l;
};

/// x_i' = f(x_i) - sum_j l_ij R x_j - p_i R (x_i - s),  s' = f(s).
struct PinnedSync {
  LaplacianMatrix l;
  Matrix r;
  Vector pins;
  Drift drift;
  std::size_t nu = 3;
};

using SystemSpec = std::variant<SaturatedNet, FriedkinJohnsen, AverageConsensus, PinnedSync>;

inline std::string system_name(const SystemSpec& s) {
  switch (s.index()) {
    case 0: return "saturated_net";
    case 1: return "friedkin_johnsen";
    case 2: return "average_consensus";
    default: return "pinned_sync";
  }
}

inline std::size_t agent_count(const SystemSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, SaturatedNet>) return s.a.rows();
        else return s.l.size();
      },
      spec);
}

inline std::size_t agent_dimension(const SystemSpec& spec) {
  if (const auto* p = std::get_if<PinnedSync>(&spec)) return p->nu;
  return 1;
}

inline std::size_t state_dimension(const SystemSpec& spec) {
  return agent_count(spec) * agent_dimension(spec);
}

inline std::size_t exo_dimension(const SystemSpec& spec) {
  if (const auto* p = std::get_if<PinnedSync>(&spec)) return p->nu;
  return 0;
}

inline SaturatedNet make_saturated_net(Matrix a, double kappa, bool require_stable = true) {
  if (!a.square()) throw InvalidArgument("saturated net: A must be square");
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (i == j && a(i, j) != 0.0) throw InvalidArgument("saturated net: A must have zero diagonal");
      if (a(i, j) < 0.0) throw InvalidArgument("saturated net: A must be nonnegative");
    }
  if (!(kappa > 0.0)) throw InvalidArgument("saturated net: kappa must be > 0");
  const double rho = spectral_radius_nonnegative(a);
  if (!(rho > 0.0)) throw InvalidArgument("saturated net: spectral radius of A must be > 0");
  if (require_stable && !(kappa * rho < 1.0))
    throw InvalidArgument("saturated net: kappa must be < 1/rho(A) = " + std::to_string(1.0 / rho));
  return {std::move(a), kappa};
}

inline FriedkinJohnsen make_friedkin_johnsen(LaplacianMatrix l, Vector theta, Vector x_o,
                                             bool constant_initial_output = false) {
  const std::size_t n = l.size();
  if (theta.size() != n || x_o.size() != n)
    throw InvalidArgument("friedkin-johnsen: dimension mismatch");
  bool any = false;
  for (double th : theta) {
    if (th < 0.0 || th > 1.0) throw InvalidArgument("friedkin-johnsen: theta_i must lie in [0, 1]");
    any = any || th != 0.0;
  }
  if (!any) throw InvalidArgument("friedkin-johnsen: some theta_i must be nonzero");
  return {std::move(l), std::move(theta), std::move(x_o), constant_initial_output};
}

inline AverageConsensus make_average_consensus(LaplacianMatrix l, double tol = 1e-12) {
  if (!is_weight_balanced(l, tol)) throw InvalidArgument("consensus: Laplacian not weight-balanced");
  if (l.size() > 1 && !is_irreducible(l.matrix())) throw InvalidArgument("consensus: Laplacian not irreducible");
  return {std::move(l)};
}

inline PinnedSync make_pinned_sync(LaplacianMatrix l, Matrix r, Vector pins, Drift drift) {
  const std::size_t nu = drift_dimension(drift);
  if (r.rows() != nu || r.cols() != nu) throw InvalidArgument("pinned sync: R must be nu x nu");
  if (!is_symmetric(r)) throw InvalidArgument("pinned sync: R must be symmetric");
  if (!(min_eigenvalue_symmetric(r) > 0.0)) throw InvalidArgument("pinned sync: R must be positive definite");
  if (pins.size() != l.size()) throw InvalidArgument("pinned sync: one pinning gain per agent");
  for (double p : pins)
    if (p < 0.0) throw InvalidArgument("pinned sync: pinning gains must be >= 0");
  if (l.size() > 1 && !is_irreducible(l.matrix())) throw InvalidArgument("pinned sync: Laplacian not irreducible");
  if (const auto* ld = std::get_if<LipschitzDemo>(&drift)) {
    if (ld->b.rows() != nu || ld->b.cols() != nu) throw InvalidArgument("pinned sync: B must be nu x nu");
  }
  return {std::move(l), std::move(r), std::move(pins), std::move(drift), nu};
}

// --------------------------------------------------------- unmasked field

/// Reference (dense) evaluation of the unmasked vector field.
inline Vector field_unmasked(const SystemSpec& spec, double /*t*/, std::span<const double> x,
                             std::optional<std::span<const double>> s = std::nullopt) {
  if (x.size() != state_dimension(spec)) throw InvalidArgument("field: state dimension mismatch");
  const std::size_t n = agent_count(spec);
  Vector dx(x.size(), 0.0);
  if (const auto* sn = std::get_if<SaturatedNet>(&spec)) {
    Vector psi(n);
    for (std::size_t i = 0; i < n; ++i) psi[i] = std::tanh(x[i]);
    const Vector ap = sn->a * psi;
    for (std::size_t i = 0; i < n; ++i) dx[i] = -x[i] + sn->kappa * ap[i];
  } else if (const auto* fj = std::get_if<FriedkinJohnsen>(&spec)) {
    const Vector lx = fj->l.matrix() * x;
    for (std::size_t i = 0; i < n; ++i)
      dx[i] = -lx[i] - fj->theta[i] * x[i] + fj->theta[i] * fj->x_o[i];
  } else if (const auto* ac = std::get_if<AverageConsensus>(&spec)) {
    const Vector lx = ac->l.matrix() * x;
    for (std::size_t i = 0; i < n; ++i) dx[i] = -lx[i];
  } else {
    const auto& ps = std::get<PinnedSync>(spec);
    if (!s || s->size() != ps.nu) throw InvalidArgument("pinned sync: exosystem state required");
    const std::size_t nu = ps.nu;
    const Matrix coupling = kron(ps.l.matrix(), ps.r);
    const Vector cx = coupling * x;
    for (std::size_t i = 0; i < n; ++i) {
      const auto xi = x.subspan(i * nu, nu);
      const Vector fi = exosystem_field(ps.drift, xi);
      Vector diff(nu);
      for (std::size_t c = 0; c < nu; ++c) diff[c] = xi[c] - (*s)[c];
      const Vector pin = ps.r * diff;
      for (std::size_t c = 0; c < nu; ++c)
        dx[i * nu + c] = fi[c] - cx[i * nu + c] - ps.pins[i] * pin[c];
    }
  }
  return dx;
}

// ----------------------------------------------------------- masked system

/// A system spec paired with a mask bank. Immutable after construction; the
/// field evaluation uses cached sparse rows and is safe to share.
class MaskedSystem {
 public:
  MaskedSystem(SystemSpec base, MaskBank bank) : base_(std::move(base)), bank_(std::move(bank)) {
    if (bank_.size() != state_dimension(base_))
      throw InvalidArgument("mask bank has " + std::to_string(bank_.size()) +
                            " channels, system state has " + std::to_string(state_dimension(base_)));
    std::visit(
        [this](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, SaturatedNet>) rows_ = SparseRows(s.a);
          else rows_ = SparseRows(s.l.matrix());
        },
        base_);
  }

  /// Unmasked system: identity bank.
  explicit MaskedSystem(SystemSpec base)
      : MaskedSystem(base, MaskBank::identity(state_dimension(base))) {}

  const SystemSpec& base() const { return base_; }
  const MaskBank& bank() const { return bank_; }
  std::size_t state_dim() const { return bank_.size(); }
  std::size_t exo_dim() const { return exo_dimension(base_); }

  /// Scratch length required by field().
  std::size_t workspace_size() const { return state_dim() + rows_.rows() + 2 * agent_dimension(base_); }

  /// dx = f(h(t, x)). `work` is caller-owned scratch of workspace_size(); the
  /// masked output y = h(t, x) is left in its first state_dim() entries.
  void field(double t, std::span<const double> x, std::span<const double> s,
             std::span<double> dx, std::span<double> work) const {
    const std::size_t d = state_dim();
    const std::size_t n = rows_.rows();
    std::span<double> y = work.first(d);
    std::span<double> tmp = work.subspan(d);
    bank_.eval_into(t, x, y);
    if (const auto* sn = std::get_if<SaturatedNet>(&base_)) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = std::tanh(y[i]);
      for (std::size_t i = 0; i < n; ++i) dx[i] = -y[i] + sn->kappa * rows_.row_dot(i, tmp);
    } else if (const auto* fj = std::get_if<FriedkinJohnsen>(&base_)) {
      const double to = fj->constant_initial_output ? 0.0 : t;
      for (std::size_t i = 0; i < n; ++i) {
        const double yo = bank_[i].eval(to, fj->x_o[i]);
        dx[i] = -rows_.row_dot(i, y) - fj->theta[i] * y[i] + fj->theta[i] * yo;
      }
    } else if (std::holds_alternative<AverageConsensus>(base_)) {
      for (std::size_t i = 0; i < n; ++i) dx[i] = -rows_.row_dot(i, y);
    } else {
      const auto& ps = std::get<PinnedSync>(base_);
      const std::size_t nu = ps.nu;
      std::span<double> ly = tmp.first(nu), pin = tmp.subspan(nu, nu);
      for (std::size_t i = 0; i < n; ++i) {
        const auto yi = y.subspan(i * nu, nu);
        auto dxi = dx.subspan(i * nu, nu);
        exosystem_field_into(ps.drift, yi, dxi);
        for (std::size_t c = 0; c < nu; ++c) {
          ly[c] = rows_.row_dot_block(i, y, nu, c);
          pin[c] = ps.pins[i] * (yi[c] - s[c]);
        }
        // the exosystem itself is never masked
        for (std::size_t r = 0; r < nu; ++r) {
          double acc = 0.0;
          for (std::size_t c = 0; c < nu; ++c) acc += ps.r(r, c) * (ly[c] + pin[c]);
          dxi[r] -= acc;
        }
      }
    }
  }

 private:
  SystemSpec base_;
  MaskBank bank_;
  SparseRows rows_;
};

/// Masked vector field at (t, x); `s` required for pinned synchronization.
inline Vector field_masked(const MaskedSystem& ms, double t, std::span<const double> x,
                           std::optional<std::span<const double>> s = std::nullopt) {
  if (x.size() != ms.state_dim()) throw InvalidArgument("field: state dimension mismatch");
  if (ms.exo_dim() > 0 && (!s || s->size() != ms.exo_dim()))
    throw InvalidArgument("pinned sync: exosystem state required");
  Vector dx(x.size()), work(ms.workspace_size());
  ms.field(t, x, s ? *s : std::span<const double>{}, dx, work);
  return dx;
}

}  // namespace dynpriv

#endif  // DYNPRIV_DYNAMICS_HPP
