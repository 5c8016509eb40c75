#include "dynpriv/graph.hpp"

#include <set>

#include <gtest/gtest.h>

#include "dynpriv/errors.hpp"
#include "oracles.hpp"

namespace dynpriv {
namespace {

Digraph directed_3cycle() { return build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {2, 0, 1.0}}); }

// Hub 0 receives from 1 and 2 with weight 2.
Digraph star_into_hub() { return build_graph(3, {{1, 0, 2.0}, {2, 0, 2.0}}); }

TEST(Graph, DirectedCycleNeighborhoods) {
  const Digraph g = directed_3cycle();
  EXPECT_EQ(g.in_neighbors(1), std::vector<int>{0});
  EXPECT_EQ(g.in_neighbors(2), std::vector<int>{1});
  EXPECT_EQ(g.in_neighbors(0), std::vector<int>{2});
  EXPECT_EQ(g.closed_in_neighborhood(0), (std::vector<int>{0, 2}));
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_FALSE(g.has_edge(1, 0));
}

TEST(Graph, SingleNode) {
  const Digraph g = build_graph(1, {});
  EXPECT_EQ(g.size(), 1);
  EXPECT_EQ(laplacian(g)(0, 0), 0.0);
  EXPECT_TRUE(is_irreducible(g));
}

TEST(Graph, ConstructionErrorsNameTheEdge) {
  try {
    build_graph(3, {{0, 1, 1.0}, {0, 0, 1.0}});
    FAIL() << "self-loop accepted";
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("0->0"), std::string::npos);
  }
  EXPECT_THROW(build_graph(3, {{0, 1, 1.0}, {0, 1, 2.0}}), InvalidArgument);
  EXPECT_THROW(build_graph(3, {{0, 3, 1.0}}), InvalidArgument);
  EXPECT_THROW(build_graph(3, {{0, 1, 0.0}}), InvalidArgument);
  EXPECT_THROW(build_graph(3, {{0, 1, -1.0}}), InvalidArgument);
  EXPECT_THROW(build_graph(0, {}), InvalidArgument);
}

TEST(Graph, LaplacianOfDirectedCycle) {
  const LaplacianMatrix l = laplacian(directed_3cycle());
  const Matrix ref{{1, 0, -1}, {-1, 1, 0}, {0, -1, 1}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(l(i, j), ref(i, j));
}

TEST(Graph, LaplacianOfStar) {
  const LaplacianMatrix l = laplacian(star_into_hub());
  EXPECT_EQ(l(0, 0), 4.0);
  EXPECT_EQ(l(0, 1), -2.0);
  EXPECT_EQ(l(0, 2), -2.0);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(l(1, j), 0.0);
    EXPECT_EQ(l(2, j), 0.0);
  }
  EXPECT_FALSE(is_weight_balanced(l));
}

TEST(Graph, LaplacianRowsSumToZero) {
  Rng rng = make_rng(20);
  for (int trial = 0; trial < 50; ++trial) {
    const Digraph g = oracle::random_digraph(8, 0.4, rng, 0.1, 5.0);
    const LaplacianMatrix l = laplacian(g);
    const Vector l1 = l.matrix() * Vector(8, 1.0);
    EXPECT_LE(norm_inf(l1), 1e-12);
  }
}

TEST(Graph, LaplacianRejectsPositiveOffDiagonal) {
  EXPECT_THROW(LaplacianMatrix(Matrix{{0.0, 1.0}, {0.0, 0.0}}), InvalidArgument);
}

TEST(Graph, WeightBalance) {
  EXPECT_TRUE(is_weight_balanced(laplacian(directed_3cycle())));
  Rng rng = make_rng(21);
  // Symmetric weights give a balanced Laplacian.
  std::vector<Edge> edges;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j)
      if (uniform01(rng) < 0.5) {
        const double w = uniform(rng, 0.5, 3.0);
        edges.push_back({i, j, w});
        edges.push_back({j, i, w});
      }
  EXPECT_TRUE(is_weight_balanced(laplacian(build_graph(6, edges))));
}

TEST(Graph, Irreducibility) {
  EXPECT_TRUE(is_irreducible(directed_3cycle()));
  EXPECT_FALSE(is_irreducible(build_graph(2, {})));
  EXPECT_FALSE(is_irreducible(build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}})));
}

TEST(Graph, IrreducibilityMatchesTransitiveClosure) {
  Rng rng = make_rng(22);
  int connected = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 8;
    const Digraph g = oracle::random_digraph(n, 0.3, rng);
    const bool ref = oracle::strongly_connected_closure(g);
    EXPECT_EQ(is_irreducible(g), ref);
    EXPECT_EQ(is_irreducible(laplacian(g).matrix()), ref);
    connected += ref;
  }
  EXPECT_GT(connected, 20);  // both branches exercised
}

TEST(Graph, CoveringExamples) {
  EXPECT_TRUE(check_no_covering(directed_3cycle()).assumption1_holds());
  const AssumptionReport k3 = check_no_covering(complete_graph(3));
  EXPECT_EQ(k3.covering_violations.size(), 6u);
  const AssumptionReport two = check_no_covering(cycle_graph(2));
  EXPECT_TRUE(two.irreducible);
  EXPECT_FALSE(two.assumption1_holds());
}

TEST(Graph, CoveringMatchesSetInclusionOracle) {
  Rng rng = make_rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 2 + trial % 7;
    const Digraph g = oracle::random_strong_digraph(n, 0.3, rng);
    const AssumptionReport r = check_no_covering(g);
    const std::set<std::pair<int, int>> got(r.covering_violations.begin(), r.covering_violations.end());
    EXPECT_EQ(got, oracle::covering_bruteforce(g));
    EXPECT_TRUE(r.irreducible);
  }
}

TEST(Graph, CoveringIsDirectional) {
  // N_1 ∪ {1} = {0,1} ⊂ N_0 ∪ {0} = {0,1,2}, but not conversely.
  const Digraph g = build_graph(3, {{1, 0, 1.0}, {2, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}});
  const auto r = check_no_covering(g);
  const std::set<std::pair<int, int>> got(r.covering_violations.begin(), r.covering_violations.end());
  EXPECT_TRUE(got.count({1, 0}));
  EXPECT_FALSE(got.count({0, 1}));
}

TEST(Graph, LeftNullVectorBalanced) {
  const Vector xi = left_null_vector(laplacian(directed_3cycle()));
  for (double v : xi) EXPECT_NEAR(v, 1.0 / 3.0, 1e-14);
}

TEST(Graph, LeftNullVectorMatchesCofactorOracle) {
  // Unbalanced strongly connected 3-node graph.
  const Digraph g = build_graph(3, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 0, 3.0}, {1, 0, 0.5}});
  const LaplacianMatrix l = laplacian(g);
  const Vector xi = left_null_vector(l);
  const Vector ref = oracle::null_vector_cofactors(l.matrix());
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(xi[i], ref[i], 1e-12);
}

TEST(Graph, LeftNullVectorPositiveOnRandomIrreducible) {
  Rng rng = make_rng(24);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 6;
    const Digraph g = oracle::random_strong_digraph(n, 0.3, rng);
    const LaplacianMatrix l = laplacian(g);
    const Vector xi = left_null_vector(l);
    const Vector ref = oracle::null_vector_cofactors(l.matrix());
    double s = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      EXPECT_GT(xi[i], 0.0);
      EXPECT_NEAR(xi[i], ref[i], 1e-10);
      s += xi[i];
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
    const Vector res = l.matrix().transposed() * xi;
    EXPECT_LE(norm_inf(res), 1e-10);
  }
}

TEST(Graph, LeftNullVectorRejectsReducible) {
  try {
    left_null_vector(laplacian(build_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}})));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("null vector not unique"), std::string::npos);
  }
}

TEST(Graph, ErdosRenyiGeneratorContract) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Digraph g = erdos_renyi_graph({.n = 12, .p = 0.35, .seed = seed, .symmetric = true});
    EXPECT_TRUE(is_irreducible(g));
    EXPECT_TRUE(check_no_covering(g).assumption1_holds());
    EXPECT_TRUE(is_weight_balanced(laplacian(g)));
  }
  const Digraph a = erdos_renyi_graph({.n = 10, .p = 0.4, .seed = 5});
  const Digraph b = erdos_renyi_graph({.n = 10, .p = 0.4, .seed = 5});
  ASSERT_EQ(a.edges().size(), b.edges().size());
  for (std::size_t k = 0; k < a.edges().size(); ++k) {
    EXPECT_EQ(a.edges()[k].src, b.edges()[k].src);
    EXPECT_EQ(a.edges()[k].dst, b.edges()[k].dst);
  }
  EXPECT_THROW(erdos_renyi_graph({.n = 3, .p = 1.0, .seed = 1, .max_retries = 5}), InvalidArgument);
}

TEST(Graph, CycleGenerators) {
  const Digraph ring = cycle_graph(5, 1.0, true);
  EXPECT_EQ(ring.edges().size(), 10u);
  EXPECT_TRUE(check_no_covering(ring).assumption1_holds());
  EXPECT_EQ(cycle_graph(4).edges().size(), 4u);
}

}  // namespace
}  // namespace dynpriv
