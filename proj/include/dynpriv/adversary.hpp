#ifndef DYNPRIV_ADVERSARY_HPP
#define DYNPRIV_ADVERSARY_HPP

// Honest-but-curious eavesdropper. An observer j sees the outputs of its
// closed in-neighborhood and knows the form of the target's vector field, but
// not the masks. It estimates x_i(0) as y_i(T) - int_0^T f_i(y) dt.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynpriv/errors.hpp"
#include "dynpriv/graph.hpp"
#include "dynpriv/linalg.hpp"
#include "dynpriv/solver.hpp"

namespace dynpriv {

/// Ordered (observer j, target i) pairs with N_i u {i} contained in N_j u {j}.
inline std::vector<std::pair<int, int>> covering_pairs(const Digraph& g) {
  std::vector<std::pair<int, int>> out;
  for (const auto& [i, j] : check_no_covering(g).covering_violations) out.emplace_back(j, i);
  std::sort(out.begin(), out.end());
  return out;
}

enum class Substitution { Zero, ObserverOwn, VisibleAverage };

inline std::string_view to_string(Substitution s) {
  switch (s) {
    case Substitution::Zero: return "zero";
    case Substitution::ObserverOwn: return "observer_own";
    case Substitution::VisibleAverage: return "visible_average";
  }
  return "?";
}

inline Substitution substitution_from_string(std::string_view s) {
  if (s == "zero") return Substitution::Zero;
  if (s == "observer_own") return Substitution::ObserverOwn;
  if (s == "visible_average") return Substitution::VisibleAverage;
  throw InvalidArgument("unknown substitution policy '" + std::string(s) + "'");
}

inline constexpr Substitution kAllSubstitutions[] = {Substitution::Zero, Substitution::ObserverOwn,
                                                     Substitution::VisibleAverage};

/// Known form of the target's field, f_i(y) = -sum_k l_ik y_k (scalar agents).
struct LocalField {
  int target = 0;
  std::vector<std::pair<int, double>> terms;  // (k, l_ik), including k = i
};

inline LocalField consensus_local_field(const LaplacianMatrix& l, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= l.size())
    throw InvalidArgument("consensus_local_field: target out of range");
  LocalField f{target, {}};
  const auto i = static_cast<std::size_t>(target);
  for (std::size_t k = 0; k < l.size(); ++k)
    if (l(i, k) != 0.0) f.terms.emplace_back(static_cast<int>(k), l(i, k));
  return f;
}

/// What observer j can record: its own output and those of its in-neighbors,
/// on the trajectory grid. Never holds private states or mask parameters.
class EavesdropperView {
 public:
  EavesdropperView(const Digraph& g, int observer, const Trajectory& tr)
      : observer_(observer), times_(tr.times) {
    if (observer < 0 || observer >= g.size()) throw InvalidArgument("eavesdropper: observer out of range");
    if (tr.agent_dim != 1) throw InvalidArgument("eavesdropper: scalar agents required");
    for (int k : g.closed_in_neighborhood(observer)) {
      Vector series(tr.size());
      for (std::size_t t = 0; t < tr.size(); ++t) series[t] = tr.y[t][static_cast<std::size_t>(k)];
      channels_.emplace(k, std::move(series));
    }
  }

  int observer() const { return observer_; }
  const Vector& times() const { return times_; }
  bool sees(int k) const { return channels_.count(k) != 0; }
  const Vector& channel(int k) const {
    const auto it = channels_.find(k);
    if (it == channels_.end()) throw InvalidArgument("eavesdropper: channel " + std::to_string(k) + " not observed");
    return it->second;
  }
  std::vector<int> visible() const {
    std::vector<int> v;
    for (const auto& [k, s] : channels_) v.push_back(k);
    return v;
  }

 private:
  int observer_;
  Vector times_;
  std::map<int, Vector> channels_;
};

struct Reconstruction {
  int observer = 0;
  int target = 0;
  double estimate = 0.0;
  Substitution policy = Substitution::Zero;
  std::vector<int> substituted;  // channels of f_i the observer had to guess
};

/// x_hat = y_i(T) - int f_i dt by composite trapezoid on the recorded grid.
inline Reconstruction reconstruct_initial(const EavesdropperView& view, const LocalField& f,
                                          Substitution policy, double settle_tol = 1e-6) {
  const int i = f.target;
  if (!view.sees(i)) throw InvalidArgument("target not observable");
  const Vector& ts = view.times();
  const std::size_t m = ts.size();
  if (m < 2) throw InvalidArgument("reconstruct_initial: trajectory too short");
  for (int k : view.visible()) {
    const Vector& s = view.channel(k);
    if (std::abs(s[m - 1] - s[m - 2]) >= settle_tol)
      throw InvalidArgument("reconstruct_initial: outputs have not settled (channel " + std::to_string(k) + ")");
  }

  Reconstruction r{view.observer(), i, 0.0, policy, {}};
  const std::vector<int> vis = view.visible();
  auto substitute = [&](std::size_t t) {
    switch (policy) {
      case Substitution::Zero: return 0.0;
      case Substitution::ObserverOwn: return view.channel(view.observer())[t];
      case Substitution::VisibleAverage: {
        double acc = 0.0;
        for (int k : vis) acc += view.channel(k)[t];
        return acc / static_cast<double>(vis.size());
      }
    }
    return 0.0;
  };
  for (const auto& [k, w] : f.terms)
    if (!view.sees(k)) r.substituted.push_back(k);

  Vector integrand(m, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    double acc = 0.0;
    for (const auto& [k, w] : f.terms) acc -= w * (view.sees(k) ? view.channel(k)[t] : substitute(t));
    integrand[t] = acc;
  }
  double integral = 0.0;
  for (std::size_t t = 0; t + 1 < m; ++t) integral += 0.5 * (ts[t + 1] - ts[t]) * (integrand[t] + integrand[t + 1]);
  r.estimate = view.channel(i)[m - 1] - integral;
  return r;
}

}  // namespace dynpriv

#endif  // DYNPRIV_ADVERSARY_HPP
