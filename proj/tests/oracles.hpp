#ifndef DYNPRIV_TESTS_ORACLES_HPP
#define DYNPRIV_TESTS_ORACLES_HPP

// Independent reference computations used only by the tests. Nothing here
// calls into the library's numerics.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>
#include <vector>

#include "dynpriv/graph.hpp"
#include "dynpriv/linalg.hpp"
#include "dynpriv/random.hpp"

namespace oracle {

using dynpriv::Matrix;
using dynpriv::Vector;

/// Determinant by the Leibniz permutation sum (n <= 7).
inline double det_leibniz(const Matrix& a) {
  const std::size_t n = a.rows();
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), 0);
  double total = 0.0;
  do {
    int inversions = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) inversions += p[i] > p[j];
    double term = inversions % 2 ? -1.0 : 1.0;
    for (std::size_t i = 0; i < n; ++i) term *= a(i, p[i]);
    total += term;
  } while (std::next_permutation(p.begin(), p.end()));
  return total;
}

inline Matrix minor_without(const Matrix& a, std::size_t r, std::size_t c) {
  Matrix m(a.rows() - 1, a.cols() - 1);
  for (std::size_t i = 0, mi = 0; i < a.rows(); ++i) {
    if (i == r) continue;
    for (std::size_t j = 0, mj = 0; j < a.cols(); ++j) {
      if (j == c) continue;
      m(mi, mj++) = a(i, j);
    }
    ++mi;
  }
  return m;
}

/// Cramer's rule.
inline Vector cramer_solve(const Matrix& a, const Vector& b) {
  const double d = det_leibniz(a);
  Vector x(b.size());
  for (std::size_t k = 0; k < b.size(); ++k) {
    Matrix ak = a;
    for (std::size_t i = 0; i < b.size(); ++i) ak(i, k) = b[i];
    x[k] = det_leibniz(ak) / d;
  }
  return x;
}

/// Eigenvalues of a symmetric 3x3 matrix from its characteristic polynomial
/// (trigonometric solution of the depressed cubic), ascending.
inline std::vector<double> eig3_charpoly(const Matrix& a) {
  const double tr = a(0, 0) + a(1, 1) + a(2, 2);
  const double c2 = a(0, 0) * a(1, 1) + a(0, 0) * a(2, 2) + a(1, 1) * a(2, 2) - a(0, 1) * a(1, 0) -
                    a(0, 2) * a(2, 0) - a(1, 2) * a(2, 1);
  const double det = det_leibniz(a);
  // lambda^3 - tr lambda^2 + c2 lambda - det = 0, lambda = mu + tr/3
  const double s = tr / 3.0;
  const double p = c2 - tr * tr / 3.0;
  const double q = -det + c2 * s - 2.0 * s * s * s;
  // mu^3 + p mu + q = 0
  std::vector<double> out;
  if (std::abs(p) < 1e-300) {
    out = {s + std::cbrt(-q), s + std::cbrt(-q), s + std::cbrt(-q)};
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) out.push_back(s + m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0));
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Transitive closure by Floyd-Warshall on the edge set.
inline bool strongly_connected_closure(const dynpriv::Digraph& g) {
  const auto n = static_cast<std::size_t>(g.size());
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) r[i][i] = true;
  for (const auto& e : g.edges()) r[static_cast<std::size_t>(e.src)][static_cast<std::size_t>(e.dst)] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!r[i][j]) return false;
  return true;
}

/// All (i, j), i != j, with closed in-neighborhood of i a subset of j's,
/// built from the raw edge list with std::set.
inline std::set<std::pair<int, int>> covering_bruteforce(const dynpriv::Digraph& g) {
  const int n = g.size();
  std::vector<std::set<int>> nb(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) nb[static_cast<std::size_t>(i)].insert(i);
  for (const auto& e : g.edges()) nb[static_cast<std::size_t>(e.dst)].insert(e.src);
  std::set<std::pair<int, int>> out;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      bool subset = true;
      for (int k : nb[static_cast<std::size_t>(i)]) subset = subset && nb[static_cast<std::size_t>(j)].count(k);
      if (subset) out.insert({i, j});
    }
  return out;
}

/// Left null vector of a Laplacian via diagonal cofactors (matrix-tree
/// theorem), normalized to sum 1.
inline Vector null_vector_cofactors(const Matrix& l) {
  Vector xi(l.rows());
  for (std::size_t i = 0; i < l.rows(); ++i) xi[i] = det_leibniz(minor_without(l, i, i));
  const double s = std::accumulate(xi.begin(), xi.end(), 0.0);
  for (double& v : xi) v /= s;
  return xi;
}

/// Neumaier-compensated sum.
inline double compensated_sum(const Vector& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  return s + c;
}

/// Random digraph with edge probability p (not necessarily connected).
inline dynpriv::Digraph random_digraph(int n, double p, dynpriv::Rng& rng, double wlo = 1.0, double whi = 1.0) {
  std::vector<dynpriv::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && dynpriv::uniform01(rng) < p) edges.push_back({i, j, dynpriv::uniform(rng, wlo, whi)});
  return dynpriv::build_graph(n, std::move(edges));
}

/// Random strongly connected digraph: a shuffled Hamiltonian cycle plus
/// extra random edges.
inline dynpriv::Digraph random_strong_digraph(int n, double p, dynpriv::Rng& rng, double wlo = 0.5,
                                              double whi = 2.0) {
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::pair<int, int>> seen;
  std::vector<dynpriv::Edge> edges;
  if (n > 1) {
    for (int k = 0; k < n; ++k) {
      const int a = order[static_cast<std::size_t>(k)], b = order[static_cast<std::size_t>((k + 1) % n)];
      if (seen.insert({a, b}).second) edges.push_back({a, b, dynpriv::uniform(rng, wlo, whi)});
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && !seen.count({i, j}) && dynpriv::uniform01(rng) < p) {
        seen.insert({i, j});
        edges.push_back({i, j, dynpriv::uniform(rng, wlo, whi)});
      }
  return dynpriv::build_graph(n, std::move(edges));
}

inline Matrix random_symmetric(std::size_t n, dynpriv::Rng& rng, double scale = 1.0) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) a(i, j) = a(j, i) = dynpriv::uniform(rng, -scale, scale);
  return a;
}

/// Random symmetric positive definite matrix B^T B + eps I.
inline Matrix random_spd(std::size_t n, dynpriv::Rng& rng) {
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = dynpriv::uniform(rng, -1.0, 1.0);
  Matrix m = b.transposed() * b;
  for (std::size_t i = 0; i < n; ++i) m(i, i) += 0.1;
  return m;
}

}  // namespace oracle

#endif  // DYNPRIV_TESTS_ORACLES_HPP
