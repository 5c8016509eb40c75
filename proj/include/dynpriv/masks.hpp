#ifndef DYNPRIV_MASKS_HPP
#define DYNPRIV_MASKS_HPP

// Time-varying output masks y_i = h_i(t, x_i, pi_i), one per scalar state
// channel. Every kind has the factored form h = g(t) * (x + o(t)) with a
// gain g(t) >= 1 and an offset o(t), which gives closed-form inverses.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dynpriv/errors.hpp"
#include "dynpriv/linalg.hpp"
#include "dynpriv/random.hpp"

namespace dynpriv {

enum class MaskKind { Identity, Linear, Additive, Affine, VanishingAffine };

inline std::string_view to_string(MaskKind k) {
  switch (k) {
    case MaskKind::Identity: return "identity";
    case MaskKind::Linear: return "linear";
    case MaskKind::Additive: return "additive";
    case MaskKind::Affine: return "affine";
    case MaskKind::VanishingAffine: return "vanishing_affine";
  }
  return "?";
}

inline MaskKind mask_kind_from_string(std::string_view s) {
  if (s == "identity") return MaskKind::Identity;
  if (s == "linear") return MaskKind::Linear;
  if (s == "additive") return MaskKind::Additive;
  if (s == "affine") return MaskKind::Affine;
  if (s == "vanishing_affine") return MaskKind::VanishingAffine;
  throw InvalidArgument("unknown mask kind '" + std::string(s) + "'");
}

/// Private parameters pi_i of one channel. Fields not used by a kind keep
/// their neutral values (phi = 0, gamma = 0, c = 1).
struct MaskParams {
  double phi = 0.0;    // linear gain amplitude
  double sigma = 1.0;  // gain decay rate
  double gamma = 0.0;  // additive offset
  double delta = 1.0;  // offset decay rate
  double c = 1.0;      // static gain (affine)

  friend bool operator==(const MaskParams&, const MaskParams&) = default;
};

class ChannelMask {
 public:
  ChannelMask() = default;

  static ChannelMask identity() { return ChannelMask(MaskKind::Identity, {}); }

  static ChannelMask linear(double phi, double sigma) {
    if (!(phi >= 0.0) || !(sigma > 0.0))
      throw InvalidArgument("linear mask needs phi >= 0, sigma > 0");
    return ChannelMask(MaskKind::Linear, {.phi = phi, .sigma = sigma});
  }

  static ChannelMask additive(double gamma, double delta) {
    if (gamma == 0.0 || !(delta > 0.0) || !std::isfinite(gamma))
      throw InvalidArgument("additive mask needs gamma != 0, delta > 0");
    return ChannelMask(MaskKind::Additive, {.gamma = gamma, .delta = delta});
  }

  static ChannelMask affine(double c, double gamma, double delta) {
    if (!(c > 1.0) || gamma == 0.0 || !(delta > 0.0) || !std::isfinite(gamma))
      throw InvalidArgument("affine mask needs c > 1, gamma != 0, delta > 0");
    return ChannelMask(MaskKind::Affine, {.gamma = gamma, .delta = delta, .c = c});
  }

  static ChannelMask vanishing_affine(double phi, double sigma, double gamma, double delta) {
    if (!(phi > 0.0) || !(sigma > 0.0) || gamma == 0.0 || !(delta > 0.0) ||
        !std::isfinite(gamma))
      throw InvalidArgument("vanishing-affine mask needs phi > 0, sigma > 0, gamma != 0, delta > 0");
    return ChannelMask(MaskKind::VanishingAffine,
                       {.phi = phi, .sigma = sigma, .gamma = gamma, .delta = delta});
  }

  static ChannelMask make(MaskKind kind, const MaskParams& p) {
    switch (kind) {
      case MaskKind::Identity: return identity();
      case MaskKind::Linear: return linear(p.phi, p.sigma);
      case MaskKind::Additive: return additive(p.gamma, p.delta);
      case MaskKind::Affine: return affine(p.c, p.gamma, p.delta);
      case MaskKind::VanishingAffine: return vanishing_affine(p.phi, p.sigma, p.gamma, p.delta);
    }
    throw InvalidArgument("unknown mask kind");
  }

  MaskKind kind() const { return kind_; }
  const MaskParams& params() const { return p_; }

  /// Multiplicative gain g(t) >= 1.
  double gain(double t) const {
    switch (kind_) {
      case MaskKind::Identity:
      case MaskKind::Additive: return 1.0;
      case MaskKind::Affine: return p_.c;
      case MaskKind::Linear:
      case MaskKind::VanishingAffine: return 1.0 + p_.phi * std::exp(-p_.sigma * t);
    }
    return 1.0;
  }

  /// Offset o(t) added to the state before the gain.
  double offset(double t) const {
    switch (kind_) {
      case MaskKind::Identity:
      case MaskKind::Linear: return 0.0;
      case MaskKind::Additive:
      case MaskKind::Affine:
      case MaskKind::VanishingAffine: return p_.gamma * std::exp(-p_.delta * t);
    }
    return 0.0;
  }

  double eval(double t, double x) const {
    switch (kind_) {
      case MaskKind::Identity: return x;
      case MaskKind::Additive: return x + offset(t);
      default: return gain(t) * (x + offset(t));
    }
  }

  double invert(double t, double y) const {
    switch (kind_) {
      case MaskKind::Identity: return y;
      case MaskKind::Additive: return y - offset(t);
      default: return y / gain(t) - offset(t);
    }
  }

  /// rho_i(x0) = |h_i(0, x0) - x0|.
  double privacy_metric(double x0) const { return std::abs(eval(0.0, x0) - x0); }

  /// Kinds whose gap |h - x| is meant to vanish as t grows.
  bool vanishing_kind() const {
    return kind_ == MaskKind::Additive || kind_ == MaskKind::VanishingAffine ||
           kind_ == MaskKind::Linear;
  }

  /// The x with h(0, x) = x, when one exists for nonidentity kinds.
  std::optional<double> fixed_point_at_t0() const {
    const double g = gain(0.0);
    const double o = offset(0.0);
    if (kind_ == MaskKind::Identity) return std::nullopt;
    if (g == 1.0) return o == 0.0 ? std::optional<double>(0.0) : std::nullopt;
    return -g * o / (g - 1.0);  // g(x + o) = x
  }

  /// Slowest time constant among the decaying terms (0 when nothing decays).
  double slowest_rate() const {
    switch (kind_) {
      case MaskKind::Identity: return 0.0;
      case MaskKind::Linear: return p_.sigma;
      case MaskKind::Additive:
      case MaskKind::Affine: return p_.delta;
      case MaskKind::VanishingAffine: return std::min(p_.sigma, p_.delta);
    }
    return 0.0;
  }

  friend bool operator==(const ChannelMask&, const ChannelMask&) = default;

 private:
  ChannelMask(MaskKind k, MaskParams p) : kind_(k), p_(p) {}

  MaskKind kind_ = MaskKind::Identity;
  MaskParams p_{};
};

/// One mask per scalar state channel (n * nu channels for vector agents).
class MaskBank {
 public:
  MaskBank() = default;
  explicit MaskBank(std::vector<ChannelMask> channels) : channels_(std::move(channels)) {}

  static MaskBank identity(std::size_t channels) {
    return MaskBank(std::vector<ChannelMask>(channels, ChannelMask::identity()));
  }

  std::size_t size() const { return channels_.size(); }
  const ChannelMask& operator[](std::size_t i) const { return channels_[i]; }
  const std::vector<ChannelMask>& channels() const { return channels_; }

  bool all_identity() const {
    return std::all_of(channels_.begin(), channels_.end(),
                       [](const ChannelMask& m) { return m.kind() == MaskKind::Identity; });
  }

  void eval_into(double t, std::span<const double> x, std::span<double> y) const {
    check_size(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = channels_[i].eval(t, x[i]);
  }

  Vector eval(double t, std::span<const double> x) const {
    Vector y(x.size());
    eval_into(t, x, y);
    return y;
  }

  Vector invert(double t, std::span<const double> y) const {
    check_size(y.size());
    Vector x(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) x[i] = channels_[i].invert(t, y[i]);
    return x;
  }

 private:
  void check_size(std::size_t n) const {
    if (n != channels_.size())
      throw InvalidArgument("mask bank has " + std::to_string(channels_.size()) +
                            " channels, state has " + std::to_string(n));
  }

  std::vector<ChannelMask> channels_;
};

inline Vector eval_mask(const MaskBank& bank, double t, std::span<const double> x) {
  if (t < 0.0) throw InvalidArgument("mask time must be >= 0");
  return bank.eval(t, x);
}

inline Vector invert_mask(const MaskBank& bank, double t, std::span<const double> y) {
  return bank.invert(t, y);
}

struct PrivacyMetric {
  Vector per_channel;
  double rho = 0.0;  // min over channels
};

inline PrivacyMetric privacy_metric(const MaskBank& bank, std::span<const double> x0) {
  if (x0.size() != bank.size()) throw InvalidArgument("privacy_metric: dimension mismatch");
  PrivacyMetric m;
  m.per_channel.resize(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) m.per_channel[i] = bank[i].privacy_metric(x0[i]);
  m.rho = m.per_channel.empty() ? 0.0
                                : *std::min_element(m.per_channel.begin(), m.per_channel.end());
  return m;
}

// ------------------------------------------------------ parameter selection

struct DecayRange {
  double lo = 0.5;
  double hi = 2.0;
};

/// Draws parameters for one channel so that rho_i(x0_i) >= 2 * lambda.
/// The offset sign follows sign(x0_i) so the x0-dependent term of rho_i adds
/// to the offset term instead of cancelling it.
inline ChannelMask choose_params(MaskKind kind, double lambda, double x0_i, Rng& rng,
                                 DecayRange decay = {}) {
  if (!(lambda > 0.0)) throw InvalidArgument("privacy level lambda must be > 0");
  if (kind == MaskKind::Linear || kind == MaskKind::Identity)
    throw InvalidArgument(std::string("not a privacy mask: ") + std::string(to_string(kind)));
  if (!(decay.lo > 0.0 && decay.hi >= decay.lo)) throw InvalidArgument("invalid decay range");

  const double sign = x0_i > 0.0 ? 1.0 : (x0_i < 0.0 ? -1.0 : random_sign(rng));
  const double target = 2.0 * lambda * (1.0 + 0.5 * uniform01(rng));
  const double delta = uniform(rng, decay.lo, decay.hi);

  ChannelMask m;
  switch (kind) {
    case MaskKind::Additive:
      m = ChannelMask::additive(sign * target, delta);
      break;
    case MaskKind::Affine: {
      // rho = |(c-1) x0 + c gamma| >= c |gamma| for matching signs.
      const double c = uniform(rng, 1.5, 3.0);
      m = ChannelMask::affine(c, sign * target / c, delta);
      break;
    }
    case MaskKind::VanishingAffine: {
      // rho = |phi x0 + (1+phi) gamma| >= (1+phi) |gamma| for matching signs.
      const double phi = uniform(rng, 0.5, 2.0);
      const double sigma = uniform(rng, decay.lo, decay.hi);
      m = ChannelMask::vanishing_affine(phi, sigma, sign * target / (1.0 + phi), delta);
      break;
    }
    default: break;
  }
  if (!(m.privacy_metric(x0_i) > lambda))
    throw Error("choose_params: privacy target missed for x0=" + std::to_string(x0_i));
  return m;
}

/// Each channel draws from its own stream derived from (seed, channel), so an
/// agent's parameters never depend on other agents' states.
inline MaskBank make_private_bank(MaskKind kind, double lambda, std::span<const double> x0,
                                  std::uint64_t seed, DecayRange decay = {}) {
  std::vector<ChannelMask> ch;
  ch.reserve(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    Rng rng = make_rng(derive_seed(seed, i));
    ch.push_back(choose_params(kind, lambda, x0[i], rng, decay));
  }
  return MaskBank(std::move(ch));
}

// ------------------------------------------------------------ axiom checks

struct AxiomGrid {
  Vector times;   // increasing, starting at 0
  Vector states;  // increasing
  double rho_min = 1e-9;       // P3 floor
  double tail_relative = 1e-8; // P5 limit: gap(T) <= rel * gap(0) + floor
  double tail_floor = 1e-12;
};

/// Uniform grid: states on [-10, 10] (41 points, including 0), times on
/// [0, 50 / slowest decay rate] (201 points).
inline AxiomGrid default_axiom_grid(const MaskBank& bank) {
  double slowest = INFINITY;
  for (const auto& m : bank.channels())
    if (m.slowest_rate() > 0.0) slowest = std::min(slowest, m.slowest_rate());
  const double horizon = std::isfinite(slowest) ? 50.0 / slowest : 50.0;
  AxiomGrid g;
  for (int k = 0; k <= 200; ++k) g.times.push_back(horizon * k / 200.0);
  for (int k = 0; k <= 40; ++k) g.states.push_back(-10.0 + 20.0 * k / 40.0);
  return g;
}

struct AxiomCheck {
  bool pass = true;
  std::string witness;  // first counterexample, empty when passing

  void fail(std::string w) {
    if (pass) witness = std::move(w);
    pass = false;
  }
};

struct AxiomReport {
  AxiomCheck p1;           // locality
  AxiomCheck p2;           // no fixed point at t = 0 on the grid
  AxiomCheck p3;           // rho bounded away from zero on the grid
  AxiomCheck p4;           // strictly increasing in x
  AxiomCheck p5_monotone;  // gap strictly decreasing in t
  AxiomCheck p5_limit;     // gap -> 0
  /// Analytic t = 0 fixed point per channel, when one exists (informational;
  /// a finite grid almost never lands on it).
  std::vector<std::optional<double>> fixed_points;

  bool p5() const { return p5_monotone.pass && p5_limit.pass; }
  bool privacy_mask() const { return p1.pass && p2.pass && p3.pass && p4.pass; }
  bool vanishing_privacy_mask() const { return privacy_mask() && p5(); }
};

inline AxiomReport check_mask_axioms(const MaskBank& bank, const AxiomGrid& grid) {
  if (grid.times.empty() || grid.states.empty())
    throw InvalidArgument("check_mask_axioms: empty sampling grid");
  AxiomReport r;
  const std::size_t n = bank.size();
  auto at = [](std::size_t ch, double t, double x) {
    return "channel " + std::to_string(ch) + " at t=" + std::to_string(t) +
           ", x=" + std::to_string(x);
  };

  // P1: perturbing every other channel leaves y_i unchanged.
  if (n > 1) {
    const std::size_t m = grid.states.size();
    Vector x(n), xp(n);
    for (double t : {grid.times.front(), grid.times[grid.times.size() / 2], grid.times.back()}) {
      for (std::size_t i = 0; i < n; ++i) x[i] = grid.states[i % m];
      const Vector y = bank.eval(t, x);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) xp[j] = j == i ? x[j] : x[j] + 1.0 + 0.5 * j;
        if (bank.eval(t, xp)[i] != y[i])
          r.p1.fail(at(i, t, x[i]) + ": output depends on other channels");
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const ChannelMask& h = bank[i];
    r.fixed_points.push_back(h.fixed_point_at_t0());

    for (double x : grid.states) {
      if (h.eval(0.0, x) == x) r.p2.fail(at(i, 0.0, x) + ": h(0,x) = x");
      if (h.privacy_metric(x) < grid.rho_min)
        r.p3.fail(at(i, 0.0, x) + ": |h(0,x) - x| = " + std::to_string(h.privacy_metric(x)));
    }

    for (double t : grid.times) {
      for (std::size_t k = 1; k < grid.states.size(); ++k) {
        if (!(h.eval(t, grid.states[k]) > h.eval(t, grid.states[k - 1])))
          r.p4.fail(at(i, t, grid.states[k]) + ": not strictly increasing");
      }
    }

    for (double x : grid.states) {
      const double floor = grid.tail_floor * std::max(1.0, std::abs(x));
      double prev = std::abs(h.eval(grid.times.front(), x) - x);
      const double first = prev;
      for (std::size_t k = 1; k < grid.times.size(); ++k) {
        const double gap = std::abs(h.eval(grid.times[k], x) - x);
        const bool ok = prev <= floor ? gap <= floor : gap < prev;
        if (!ok)
          r.p5_monotone.fail(at(i, grid.times[k], x) + ": gap rose from " +
                             std::to_string(prev) + " to " + std::to_string(gap));
        prev = gap;
      }
      if (!(prev <= grid.tail_relative * first + floor))
        r.p5_limit.fail(at(i, grid.times.back(), x) + ": terminal gap " + std::to_string(prev));
    }
  }
  return r;
}

// ----------------------------------------------------------- norm bounds

struct NormBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Sandwich ||y||/k - zeta(t) <= ||x|| <= ||y|| + zeta(t) for affine-family
/// masks, with k = max_i g_i(0) and zeta(t) = ||o(t)||_2.
inline NormBounds mask_norm_bounds(const MaskBank& bank, double t, std::span<const double> x) {
  if (x.size() != bank.size()) throw InvalidArgument("mask_norm_bounds: dimension mismatch");
  double k = 1.0;
  double zeta2 = 0.0;
  for (const auto& m : bank.channels()) {
    if (m.kind() == MaskKind::Linear || m.kind() == MaskKind::Identity)
      throw InvalidArgument("mask_norm_bounds: needs additive, affine or vanishing-affine masks");
    k = std::max(k, m.gain(0.0));
    zeta2 += m.offset(t) * m.offset(t);
  }
  const double zeta = std::sqrt(zeta2);
  const double ny = norm2(bank.eval(t, x));
  return {ny / k - zeta, ny + zeta};
}

}  // namespace dynpriv

#endif  // DYNPRIV_MASKS_HPP
