#include "dynpriv/dynamics.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "dynpriv/errors.hpp"
#include "dynpriv/graph.hpp"
#include "oracles.hpp"

namespace dynpriv {
namespace {

LaplacianMatrix ring_laplacian(int n) { return laplacian(cycle_graph(n, 1.0, true)); }

Vector random_vector(std::size_t n, Rng& rng, double lo = -3.0, double hi = 3.0) {
  Vector v(n);
  for (double& x : v) x = uniform(rng, lo, hi);
  return v;
}

LipschitzDemo demo_drift() {
  return {Matrix{{-1.0, 0.5}, {0.0, -2.0}}, Matrix{{0.3, 0.0}, {0.1, 0.2}}};
}

TEST(Dynamics, ConsensusFieldVanishesOnAgreement) {
  const SystemSpec spec = make_average_consensus(ring_laplacian(5));
  const Vector dx = field_unmasked(spec, 0.0, Vector(5, 2.5));
  EXPECT_LE(norm_inf(dx), 1e-15);
}

TEST(Dynamics, SaturatedNetOrigin) {
  const Matrix a = cycle_graph(4, 1.0, true).adjacency();
  const SystemSpec spec = make_saturated_net(a, 0.4);
  EXPECT_EQ(norm_inf(field_unmasked(spec, 0.0, Vector(4, 0.0))), 0.0);
}

TEST(Dynamics, SaturatedNetRejectsUnstableGain) {
  const Matrix a = cycle_graph(4, 1.0, true).adjacency();  // rho(A) = 2
  EXPECT_THROW(make_saturated_net(a, 0.6), InvalidArgument);
  EXPECT_NO_THROW(make_saturated_net(a, 0.6, false));
  EXPECT_THROW(make_saturated_net(Matrix{{1.0, 0.0}, {0.0, 0.0}}, 0.1), InvalidArgument);
}

TEST(Dynamics, FriedkinJohnsenStationaryAtLinearSolve) {
  Rng rng = make_rng(40);
  const LaplacianMatrix l = laplacian(oracle::random_strong_digraph(4, 0.3, rng));
  const Vector theta{0.3, 0.0, 0.8, 0.5};
  const Vector xo = random_vector(4, rng);
  Matrix m = l.matrix();
  for (std::size_t i = 0; i < 4; ++i) m(i, i) += theta[i];
  Vector rhs(4);
  for (std::size_t i = 0; i < 4; ++i) rhs[i] = theta[i] * xo[i];
  const Vector xs = oracle::cramer_solve(m, rhs);
  const SystemSpec spec = make_friedkin_johnsen(l, theta, xo);
  EXPECT_LE(norm_inf(field_unmasked(spec, 0.0, xs)), 1e-12);
}

TEST(Dynamics, FriedkinJohnsenValidation) {
  const LaplacianMatrix l = ring_laplacian(3);
  EXPECT_THROW(make_friedkin_johnsen(l, {0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}), InvalidArgument);
  EXPECT_THROW(make_friedkin_johnsen(l, {0.5, 1.5, 0.0}, {1.0, 2.0, 3.0}), InvalidArgument);
  EXPECT_THROW(make_friedkin_johnsen(l, {0.5, 0.5}, {1.0, 2.0, 3.0}), InvalidArgument);
}

TEST(Dynamics, ConsensusRejectsUnbalanced) {
  const Digraph g = build_graph(3, {{0, 1, 2.0}, {1, 2, 1.0}, {2, 0, 1.0}});
  EXPECT_THROW(make_average_consensus(laplacian(g)), InvalidArgument);
}

TEST(Dynamics, LorenzHandValue) {
  const Vector ds = exosystem_field(Lorenz{}, Vector{1.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(ds[0], 0.0);
  EXPECT_DOUBLE_EQ(ds[1], 26.0);
  EXPECT_NEAR(ds[2], 1.0 - 8.0 / 3.0, 1e-15);
  const Vector again = exosystem_field(Lorenz{}, Vector{1.0, 1.0, 1.0});
  EXPECT_EQ(ds, again);
}

TEST(Dynamics, LipschitzDemoAtOrigin) {
  EXPECT_EQ(norm_inf(exosystem_field(demo_drift(), Vector{0.0, 0.0})), 0.0);
}

TEST(Dynamics, PinnedSyncNeedsExosystem) {
  const SystemSpec spec = make_pinned_sync(ring_laplacian(3), Matrix::identity(2), {1.0, 0.0, 0.0}, demo_drift());
  EXPECT_THROW(field_unmasked(spec, 0.0, Vector(6, 0.0)), InvalidArgument);
  const MaskedSystem ms(spec);
  EXPECT_THROW(field_masked(ms, 0.0, Vector(6, 0.0)), InvalidArgument);
}

TEST(Dynamics, PinnedSyncValidation) {
  const LaplacianMatrix l = ring_laplacian(3);
  EXPECT_THROW(make_pinned_sync(l, Matrix{{1.0, 2.0}, {0.0, 1.0}}, {1.0, 0.0, 0.0}, demo_drift()),
               InvalidArgument);
  EXPECT_THROW(make_pinned_sync(l, Matrix{{-1.0, 0.0}, {0.0, 1.0}}, {1.0, 0.0, 0.0}, demo_drift()),
               InvalidArgument);
  EXPECT_THROW(make_pinned_sync(l, Matrix::identity(2), {1.0, -1.0, 0.0}, demo_drift()), InvalidArgument);
  EXPECT_THROW(make_pinned_sync(l, Matrix::identity(3), {1.0, 0.0, 0.0}, demo_drift()), InvalidArgument);
}

TEST(Dynamics, LipschitzEstimateLinearDrifts) {
  const Box box = Box::cube(2, -5.0, 5.0);
  const LipschitzDemo contracting{Matrix{{-1.0, 0.0}, {0.0, -1.0}}, Matrix(2, 2)};
  const LipschitzDemo expanding{Matrix{{2.0, 0.0}, {0.0, 2.0}}, Matrix(2, 2)};
  const double q1 = estimate_lipschitz_q(contracting, Matrix::identity(2), box, 200, 1);
  const double q2 = estimate_lipschitz_q(expanding, Matrix::identity(2), box, 200, 1);
  EXPECT_LE(q1, 0.0);
  EXPECT_NEAR(q1, -1.0 / 1.2, 1e-12);
  EXPECT_NEAR(q2, 2.0 * 1.2, 1e-12);
}

TEST(Dynamics, LipschitzEstimateReproducible) {
  const Box box = Box::cube(2, -3.0, 3.0);
  const double a = estimate_lipschitz_q(demo_drift(), Matrix::identity(2), box, 500, 9);
  const double b = estimate_lipschitz_q(demo_drift(), Matrix::identity(2), box, 500, 9);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(std::isfinite(a));
  EXPECT_THROW(estimate_lipschitz_q(demo_drift(), Matrix::identity(2), box, 1, 9), InvalidArgument);
  const Box flat{Vector{1.0, 1.0}, Vector{1.0, 1.0}};
  EXPECT_THROW(estimate_lipschitz_q(demo_drift(), Matrix::identity(2), flat, 10, 9), InvalidArgument);
}

TEST(Dynamics, LipschitzEstimateBoundsSampledPairs) {
  // The estimate must dominate every pair ratio it could have drawn.
  const Box box = Box::cube(3, -20.0, 20.0);
  const Drift lorenz = Lorenz{};
  const double q = estimate_lipschitz_q(lorenz, Matrix::identity(3), box, 4000, 3);
  Rng rng = make_rng(99);
  int above = 0;
  for (int k = 0; k < 2000; ++k) {
    const Vector x = random_vector(3, rng, -20.0, 20.0), z = random_vector(3, rng, -20.0, 20.0);
    const Vector fx = exosystem_field(lorenz, x), fz = exosystem_field(lorenz, z);
    double num = 0.0, den = 0.0;
    for (int c = 0; c < 3; ++c) {
      num += (x[c] - z[c]) * (fx[c] - fz[c]);
      den += (x[c] - z[c]) * (x[c] - z[c]);
    }
    above += num / den > q;
  }
  EXPECT_EQ(above, 0);
}

TEST(Dynamics, MaskedSystemChannelCount) {
  const SystemSpec spec = make_average_consensus(ring_laplacian(4));
  EXPECT_THROW(MaskedSystem(spec, MaskBank::identity(3)), InvalidArgument);
}

TEST(Dynamics, IdentityBankMatchesUnmasked) {
  Rng rng = make_rng(41);
  const Digraph g = oracle::random_strong_digraph(6, 0.3, rng);
  const LaplacianMatrix l = laplacian(g);
  const Vector theta = random_vector(6, rng, 0.1, 1.0);
  const Vector xo = random_vector(6, rng);
  const SystemSpec specs[] = {
      make_saturated_net(g.adjacency(), 0.5 / spectral_radius_nonnegative(g.adjacency())),
      make_friedkin_johnsen(l, theta, xo),
      make_pinned_sync(l, Matrix{{2.0, 0.3}, {0.3, 1.0}}, {1.0, 0, 0.5, 0, 0, 0}, demo_drift()),
  };
  for (const SystemSpec& spec : specs) {
    const MaskedSystem ms(spec);
    const std::size_t d = state_dimension(spec);
    const Vector x = random_vector(d, rng);
    const Vector s = random_vector(exo_dimension(spec), rng);
    const auto sopt = s.empty() ? std::nullopt : std::optional<std::span<const double>>(s);
    const Vector a = field_unmasked(spec, 1.5, x, sopt);
    const Vector b = field_masked(ms, 1.5, x, sopt);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(a[i], b[i], 1e-12) << system_name(spec);
  }
}

TEST(Dynamics, MaskedFieldAppliesBaseFieldToOutput) {
  // Dense reference: evaluate the mask by hand, then the unmasked field at y.
  Rng rng = make_rng(42);
  const Digraph g = oracle::random_strong_digraph(5, 0.4, rng);
  const Vector x0 = random_vector(5, rng);
  const MaskBank bank = make_private_bank(MaskKind::VanishingAffine, 1.0, x0, 5);
  const double t = 0.37;
  const Vector x = random_vector(5, rng);
  Vector y(5);
  for (std::size_t i = 0; i < 5; ++i) {
    const MaskParams& p = bank[i].params();
    y[i] = (1.0 + p.phi * std::exp(-p.sigma * t)) * (x[i] + p.gamma * std::exp(-p.delta * t));
  }
  const SystemSpec sat = make_saturated_net(g.adjacency(), 0.5 / spectral_radius_nonnegative(g.adjacency()));
  const Vector ref = field_unmasked(sat, t, y);
  const Vector got = field_masked(MaskedSystem(sat, bank), t, x);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(got[i], ref[i], 1e-12);
}

TEST(Dynamics, MaskedFjUsesMaskedReference) {
  Rng rng = make_rng(43);
  const LaplacianMatrix l = laplacian(oracle::random_strong_digraph(4, 0.4, rng));
  const Vector theta = random_vector(4, rng, 0.2, 1.0), xo = random_vector(4, rng);
  const MaskBank bank = make_private_bank(MaskKind::Affine, 1.0, xo, 6);
  const double t = 0.9;
  const Vector x = random_vector(4, rng);
  const Vector y = bank.eval(t, x), yo = bank.eval(t, xo), yo0 = bank.eval(0.0, xo);
  const Vector ly = l.matrix() * y;
  const Vector got = field_masked(MaskedSystem(make_friedkin_johnsen(l, theta, xo), bank), t, x);
  const Vector frozen = field_masked(MaskedSystem(make_friedkin_johnsen(l, theta, xo, true), bank), t, x);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(got[i], -ly[i] - theta[i] * y[i] + theta[i] * yo[i], 1e-12);
    EXPECT_NEAR(frozen[i], -ly[i] - theta[i] * y[i] + theta[i] * yo0[i], 1e-12);
  }
}

TEST(Dynamics, MaskedPinnedMatchesKroneckerForm) {
  Rng rng = make_rng(44);
  const int n = 4;
  const LaplacianMatrix l = laplacian(oracle::random_strong_digraph(n, 0.4, rng));
  const Matrix r{{1.5, 0.2}, {0.2, 0.7}};
  const Vector pins{2.0, 0.0, 0.5, 0.0};
  const LipschitzDemo f = demo_drift();
  const Vector x0 = random_vector(2 * n, rng);
  const MaskBank bank = make_private_bank(MaskKind::Additive, 1.0, x0, 7);
  const MaskedSystem ms(make_pinned_sync(l, r, pins, f), bank);
  const double t = 0.2;
  const Vector x = random_vector(2 * n, rng), s = random_vector(2, rng);
  const Vector y = bank.eval(t, x);
  // -(L kron R) y - (P kron R)(y - 1 kron s) + F(y)
  const Matrix lr = kron(l.matrix(), r);
  const Matrix pr = kron(Matrix::diagonal(pins), r);
  Vector ys(2 * n);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 2; ++c) ys[2 * i + c] = y[2 * i + c] - s[c];
  const Vector a = lr * y, b = pr * ys;
  const Vector got = field_masked(ms, t, x, std::span<const double>(s));
  for (int i = 0; i < n; ++i) {
    const Vector fi = exosystem_field(f, std::span<const double>(y).subspan(2 * i, 2));
    for (int c = 0; c < 2; ++c) EXPECT_NEAR(got[2 * i + c], fi[c] - a[2 * i + c] - b[2 * i + c], 1e-12);
  }
}

TEST(Dynamics, MaskedConsensusConservesSum) {
  Rng rng = make_rng(45);
  for (int trial = 0; trial < 20; ++trial) {
    const auto g = erdos_renyi_graph({.n = 8, .p = 0.4, .seed = static_cast<std::uint64_t>(trial), .symmetric = true,
                                      .weight_lo = 0.5, .weight_hi = 2.0});
    const Vector x0 = random_vector(8, rng);
    const MaskBank bank = make_private_bank(MaskKind::VanishingAffine, 2.0, x0, trial);
    const MaskedSystem ms(make_average_consensus(laplacian(g)), bank);
    const Vector dx = field_masked(ms, uniform(rng, 0.0, 5.0), random_vector(8, rng));
    EXPECT_NEAR(oracle::compensated_sum(dx), 0.0, 1e-12);
  }
}

TEST(Dynamics, MaskedConsensusHasNoEquilibriumAtAgreement) {
  const LaplacianMatrix l = ring_laplacian(5);
  const Vector x(5, 1.7);
  Rng rng = make_rng(46);
  const Vector x0 = random_vector(5, rng);
  const MaskBank bank = make_private_bank(MaskKind::VanishingAffine, 1.0, x0, 8);
  EXPECT_GT(norm_inf(field_masked(MaskedSystem(make_average_consensus(l), bank), 0.0, x)), 0.0);
}

}  // namespace
}  // namespace dynpriv
