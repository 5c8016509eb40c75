#ifndef DYNPRIV_GRAPH_HPP
#define DYNPRIV_GRAPH_HPP

// Weighted digraphs, their Laplacians, and the structural checks the masked
// dynamics rely on. Edge (src -> dst) means "dst receives from src", i.e.
// src belongs to the in-neighborhood N_dst.

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dynpriv/errors.hpp"
#include "dynpriv/linalg.hpp"
#include "dynpriv/random.hpp"

namespace dynpriv {

struct Edge {
  int src = 0;
  int dst = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

inline std::string to_string(const Edge& e) {
  return "(" + std::to_string(e.src) + "->" + std::to_string(e.dst) + ", w=" +
         std::to_string(e.weight) + ")";
}

class Digraph {
 public:
  int size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Sorted in-neighborhood N_i (nodes i receives from).
  const std::vector<int>& in_neighbors(int i) const { return in_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& out_neighbors(int i) const { return out_[static_cast<std::size_t>(i)]; }

  /// N_i ∪ {i}, sorted.
  std::vector<int> closed_in_neighborhood(int i) const {
    std::vector<int> s = in_neighbors(i);
    s.insert(std::lower_bound(s.begin(), s.end(), i), i);
    return s;
  }

  bool has_edge(int src, int dst) const {
    const auto& nb = in_neighbors(dst);
    return std::binary_search(nb.begin(), nb.end(), src);
  }

  /// Weight w(src -> dst), zero when absent.
  double weight(int src, int dst) const {
    for (const Edge& e : edges_)
      if (e.src == src && e.dst == dst) return e.weight;
    return 0.0;
  }

  /// Weighted adjacency with A(i, j) = w(j -> i).
  Matrix adjacency() const {
    Matrix a(static_cast<std::size_t>(n_), static_cast<std::size_t>(n_));
    for (const Edge& e : edges_)
      a(static_cast<std::size_t>(e.dst), static_cast<std::size_t>(e.src)) = e.weight;
    return a;
  }

 private:
  friend Digraph build_graph(int n, std::vector<Edge> edges);

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> in_;
  std::vector<std::vector<int>> out_;
};

/// Validates and builds a digraph. Throws InvalidArgument naming the offending
/// edge on self-loops, duplicates, out-of-range endpoints or weights <= 0.
inline Digraph build_graph(int n, std::vector<Edge> edges) {
  if (n < 1) throw InvalidArgument("graph needs at least one node, got n=" + std::to_string(n));
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
      throw InvalidArgument("out-of-range node in edge " + to_string(e));
    if (e.src == e.dst) throw InvalidArgument("self-loop in edge " + to_string(e));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw InvalidArgument("non-positive weight in edge " + to_string(e));
    if (!seen.insert({e.src, e.dst}).second)
      throw InvalidArgument("duplicate edge " + to_string(e));
  }
  Digraph g;
  g.n_ = n;
  g.edges_ = std::move(edges);
  g.in_.assign(static_cast<std::size_t>(n), {});
  g.out_.assign(static_cast<std::size_t>(n), {});
  for (const Edge& e : g.edges_) {
    g.in_[static_cast<std::size_t>(e.dst)].push_back(e.src);
    g.out_[static_cast<std::size_t>(e.src)].push_back(e.dst);
  }
  for (auto& v : g.in_) std::sort(v.begin(), v.end());
  for (auto& v : g.out_) std::sort(v.begin(), v.end());
  return g;
}

/// Graph Laplacian, L(i,j) = -w(j -> i) off the diagonal, rows summing to zero.
class LaplacianMatrix {
 public:
  LaplacianMatrix() = default;
  explicit LaplacianMatrix(Matrix m) : m_(std::move(m)) {
    if (!m_.square()) throw InvalidArgument("Laplacian must be square");
    for (std::size_t i = 0; i < m_.rows(); ++i) {
      double off = 0.0;
      for (std::size_t j = 0; j < m_.cols(); ++j) {
        if (i == j) continue;
        if (m_(i, j) > 0.0) throw InvalidArgument("Laplacian has a positive off-diagonal entry");
        off += m_(i, j);
      }
      m_(i, i) = -off;
    }
  }

  const Matrix& matrix() const { return m_; }
  std::size_t size() const { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

 private:
  Matrix m_;
};

inline LaplacianMatrix laplacian(const Digraph& g) {
  const auto n = static_cast<std::size_t>(g.size());
  Matrix m(n, n);
  for (const Edge& e : g.edges())
    m(static_cast<std::size_t>(e.dst), static_cast<std::size_t>(e.src)) = -e.weight;
  return LaplacianMatrix(std::move(m));
}

inline bool is_weight_balanced(const LaplacianMatrix& l, double tol = 1e-12) {
  if (!(tol > 0.0)) throw InvalidArgument("tolerance must be positive");
  for (std::size_t j = 0; j < l.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) s += l(i, j);
    if (std::abs(s) > tol) return false;
  }
  return true;
}

namespace detail {

inline std::vector<bool> reachable(const std::vector<std::vector<int>>& adj, int start) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<int> stack{start};
  seen[static_cast<std::size_t>(start)] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

inline bool strongly_connected(const std::vector<std::vector<int>>& fwd,
                               const std::vector<std::vector<int>>& bwd) {
  if (fwd.empty()) return false;
  const auto a = reachable(fwd, 0);
  const auto b = reachable(bwd, 0);
  return std::all_of(a.begin(), a.end(), [](bool x) { return x; }) &&
         std::all_of(b.begin(), b.end(), [](bool x) { return x; });
}

}  // namespace detail

/// Strong connectivity of the digraph (equivalently irreducibility of L).
inline bool is_irreducible(const Digraph& g) {
  std::vector<std::vector<int>> fwd(static_cast<std::size_t>(g.size()));
  std::vector<std::vector<int>> bwd(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) {
    fwd[static_cast<std::size_t>(i)] = g.out_neighbors(i);
    bwd[static_cast<std::size_t>(i)] = g.in_neighbors(i);
  }
  return detail::strongly_connected(fwd, bwd);
}

/// Irreducibility read off the off-diagonal sparsity pattern of a matrix.
inline bool is_irreducible(const Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<std::vector<int>> fwd(n), bwd(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && m(i, j) != 0.0) {
        fwd[j].push_back(static_cast<int>(i));
        bwd[i].push_back(static_cast<int>(j));
      }
  return detail::strongly_connected(fwd, bwd);
}

struct AssumptionReport {
  bool irreducible = false;
  bool weight_balanced = false;
  /// Ordered pairs (i, j), i != j, with N_i ∪ {i} ⊆ N_j ∪ {j}.
  std::vector<std::pair<int, int>> covering_violations;

  bool assumption1_holds() const { return covering_violations.empty(); }
};

/// Exhaustive check of the "no completely covering neighborhoods" condition
/// over all n(n-1) ordered pairs, plus irreducibility and weight balance.
inline AssumptionReport check_no_covering(const Digraph& g, double balance_tol = 1e-12) {
  AssumptionReport r;
  r.irreducible = is_irreducible(g);
  r.weight_balanced = is_weight_balanced(laplacian(g), balance_tol);
  std::vector<std::vector<int>> closed;
  closed.reserve(static_cast<std::size_t>(g.size()));
  for (int i = 0; i < g.size(); ++i) closed.push_back(g.closed_in_neighborhood(i));
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) {
      if (i == j) continue;
      const auto& ci = closed[static_cast<std::size_t>(i)];
      const auto& cj = closed[static_cast<std::size_t>(j)];
      if (std::includes(cj.begin(), cj.end(), ci.begin(), ci.end()))
        r.covering_violations.emplace_back(i, j);
    }
  }
  return r;
}

/// Positive left null vector of an irreducible Laplacian, normalized to sum 1.
inline Vector left_null_vector(const LaplacianMatrix& l, double residual_tol = 1e-10) {
  const std::size_t n = l.size();
  if (n == 0) throw InvalidArgument("empty Laplacian");
  if (n == 1) return {1.0};
  if (!is_irreducible(l.matrix())) throw SingularMatrix("null vector not unique: Laplacian is reducible");
  // Rows of L^T sum to zero, so any n-1 of them plus the normalization row
  // form a nonsingular system when L is irreducible.
  Matrix a = l.matrix().transposed();
  Vector b(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) a(n - 1, j) = 1.0;
  b[n - 1] = 1.0;
  Vector xi = solve(std::move(a), std::move(b));
  const Vector res = l.matrix().transposed() * xi;
  if (norm_inf(res) > residual_tol) throw SingularMatrix("left null vector residual too large");
  for (double v : xi)
    if (!(v > 0.0)) throw SingularMatrix("left null vector is not strictly positive");
  return xi;
}

// ---------------------------------------------------------------- generators

/// Directed cycle 0 -> 1 -> ... -> n-1 -> 0; with `bidirectional` also the
/// reverse edges (undirected ring). n = 2 gives the single 2-cycle.
inline Digraph cycle_graph(int n, double weight = 1.0, bool bidirectional = false) {
  std::vector<Edge> edges;
  if (n == 2) {
    edges = {{0, 1, weight}, {1, 0, weight}};
  } else if (n > 2) {
    for (int i = 0; i < n; ++i) {
      edges.push_back({i, (i + 1) % n, weight});
      if (bidirectional) edges.push_back({(i + 1) % n, i, weight});
    }
  }
  return build_graph(n, std::move(edges));
}

inline Digraph complete_graph(int n, double weight = 1.0) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) edges.push_back({i, j, weight});
  return build_graph(n, std::move(edges));
}

struct ErdosRenyiOptions {
  int n = 10;
  double p = 0.3;
  std::uint64_t seed = 0;
  bool symmetric = false;  // undirected: both directions, same weight
  double weight_lo = 1.0;
  double weight_hi = 1.0;
  int max_retries = 10000;
  bool require_assumption1 = true;
};

/// Seeded G(n, p), rejection-sampled until strongly connected and (by
/// default) free of covering neighborhoods.
inline Digraph erdos_renyi_graph(const ErdosRenyiOptions& opt) {
  if (opt.n < 1) throw InvalidArgument("erdos_renyi: n must be >= 1");
  if (!(opt.p > 0.0 && opt.p <= 1.0)) throw InvalidArgument("erdos_renyi: p must be in (0, 1]");
  if (!(opt.weight_lo > 0.0 && opt.weight_hi >= opt.weight_lo))
    throw InvalidArgument("erdos_renyi: invalid weight range");
  Rng rng = make_rng(opt.seed);
  for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
    std::vector<Edge> edges;
    for (int i = 0; i < opt.n; ++i) {
      for (int j = opt.symmetric ? i + 1 : 0; j < opt.n; ++j) {
        if (i == j) continue;
        if (uniform01(rng) >= opt.p) continue;
        const double w = uniform(rng, opt.weight_lo, opt.weight_hi);
        edges.push_back({i, j, w});
        if (opt.symmetric) edges.push_back({j, i, w});
      }
    }
    Digraph g = build_graph(opt.n, std::move(edges));
    if (!is_irreducible(g)) continue;
    if (opt.require_assumption1 && !check_no_covering(g).assumption1_holds()) continue;
    return g;
  }
  throw InvalidArgument("erdos_renyi: no admissible graph after " +
                        std::to_string(opt.max_retries) + " attempts");
}

}  // namespace dynpriv

#endif  // DYNPRIV_GRAPH_HPP
