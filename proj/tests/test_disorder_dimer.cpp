#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qsplit;

namespace {

OperatorMatrix long_chain(std::size_t n) {
  LatticeSpec s;
  s.n_sites = n;
  s.mass = 0.2;
  s.boundary = Boundary::open;
  return build_hamiltonian(s);
}

DisorderScenario small_scenario() {
  DisorderScenario sc;
  sc.lattice.n_sites = 1200;
  sc.lattice.mass = 0.2;
  sc.lattice.boundary = Boundary::open;
  LatticeSpec ring = sc.lattice;
  ring.boundary = Boundary::periodic;
  sc.projectors = band_projectors(ring);
  SplitterSettings st;
  st.rho = 20;
  st.embed_factor = 3;
  const SplitterMatrix sp = synthesize_splitter(sc.lattice, st, 700);
  sc.setup = scattering_setup(sc.lattice, sp, 700);
  WavePacketSpec p;
  p.center = 300;
  p.width = 20;
  sc.packet = make_packet(sc.lattice, p, sc.projectors);
  return sc;
}

}  // namespace

// ---------------------------------------------------------------------------
// disorder-study

TEST(Perturb, ZeroSigmaIsIdentity) {
  const OperatorMatrix h = long_chain(50);
  DisorderConfig c;
  c.sigma_delta = 0.0;
  EXPECT_EQ(perturb_couplings(h, c, 3).entries(), h.entries());
}

TEST(Perturb, FactorStatisticsAndOnsiteUntouched) {
  const OperatorMatrix h = long_chain(3000);
  DisorderConfig c;
  c.sigma_delta = 0.1;
  c.seed = 42;
  std::vector<double> f;
  const OperatorMatrix p = perturb_couplings(h, c, 0, {}, &f);
  ASSERT_EQ(f.size(), 2999u);
  double mean, sd;
  mean_std(f, mean, sd);
  EXPECT_NEAR(mean, 1.0, 0.006);
  EXPECT_NEAR(sd, 0.1, 0.005);
  EXPECT_EQ(p.entries().diagonal(), h.entries().diagonal());
  EXPECT_LT(hermiticity_defect(p.entries()), 1e-15);
  for (Eigen::Index i = 0; i + 1 < 3000; i += 97)
    EXPECT_DOUBLE_EQ(p.entries()(i, i + 1).real(), f[static_cast<std::size_t>(i)] * h.entries()(i, i + 1).real());
}

TEST(Perturb, DeterministicPerSeedAndRealization) {
  const OperatorMatrix h = long_chain(200);
  DisorderConfig c;
  c.sigma_delta = 0.3;
  c.seed = 7;
  EXPECT_EQ(perturb_couplings(h, c, 5).entries(), perturb_couplings(h, c, 5).entries());
  EXPECT_NE(perturb_couplings(h, c, 5).entries(), perturb_couplings(h, c, 6).entries());
  DisorderConfig d = c;
  d.seed = 8;
  EXPECT_NE(perturb_couplings(h, c, 5).entries(), perturb_couplings(h, d, 5).entries());
}

TEST(Perturb, ScopesSelectBonds) {
  const OperatorMatrix h = long_chain(100);
  const SiteWindow w{40, 59};
  DisorderConfig c;
  c.sigma_delta = 0.5;
  c.seed = 1;
  c.scope = DisorderScope::splitter_only;
  const CMatrix a = perturb_couplings(h, c, 0, w).entries();
  c.scope = DisorderScope::leads_only;
  const CMatrix b = perturb_couplings(h, c, 0, w).entries();
  for (Eigen::Index i = 0; i + 1 < 100; ++i) {
    const bool inside = i >= 40 && i + 1 <= 59;
    EXPECT_EQ(a(i, i + 1) == h.entries()(i, i + 1), !inside) << i;
    EXPECT_EQ(b(i, i + 1) == h.entries()(i, i + 1), inside) << i;
  }
  EXPECT_EQ(disorder_scope_from_string("leads_only"), DisorderScope::leads_only);
  EXPECT_EQ(to_string(DisorderScope::splitter_only), "splitter_only");
  EXPECT_THROW(disorder_scope_from_string("nowhere"), Error);
}

TEST(Perturb, ConfigValidation) {
  DisorderConfig c;
  c.sigma_delta = -0.1;
  EXPECT_THROW(c.validate(), Error);
  c.sigma_delta = 0.1;
  c.n_realizations = 0;
  EXPECT_THROW(c.validate(), Error);
}

TEST(NormalStream, MatchesBoxMullerReference) {
  NormalStream s(123, 4);
  std::mt19937_64 eng(splitmix64(123 ^ splitmix64(4 + 0x632be59bd9b4e019ULL)));
  const double u1 = (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  EXPECT_DOUBLE_EQ(s.next(), r * std::cos(2.0 * kPi * u2));
  EXPECT_DOUBLE_EQ(s.next(), r * std::sin(2.0 * kPi * u2));
}

TEST(MeanStd, SampleStatistics) {
  double m, s;
  mean_std({1.0, 2.0, 3.0, 4.0}, m, s);
  EXPECT_DOUBLE_EQ(m, 2.5);
  EXPECT_NEAR(s, std::sqrt(5.0 / 3.0), 1e-15);
  mean_std({}, m, s);
  EXPECT_EQ(m, 0.0);
}

TEST(Sweep, CleanLimitReproducibleAndThreadIndependent) {
  const DisorderScenario sc = small_scenario();
  DisorderConfig c;
  c.n_realizations = 4;
  c.seed = 2026;
  c.scope = DisorderScope::splitter_only;
  const DisorderSweepResult a = disorder_sweep(sc, {0.0, 0.05}, c, 1);
  const DisorderSweepResult b = disorder_sweep(sc, {0.0, 0.05}, c, 3);
  ASSERT_EQ(a.points.size(), 2u);
  EXPECT_NEAR(a.points[0].mean_r_plus, a.clean.r_plus, 1e-3);
  EXPECT_NEAR(a.points[0].mean_t_minus, a.clean.t_minus, 1e-3);
  EXPECT_EQ(a.points[0].std_t_minus, 0.0);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.points[i].r_plus, b.points[i].r_plus);
    EXPECT_EQ(a.points[i].t_minus, b.points[i].t_minus);
    EXPECT_EQ(a.points[i].n_ok, 4u);
    EXPECT_GE(a.points[i].mean_r_plus, 0.0);
    EXPECT_LE(a.points[i].mean_r_plus, 1.0);
    EXPECT_GE(a.points[i].std_r_plus, 0.0);
  }
  EXPECT_GT(a.points[1].std_t_minus + a.points[1].std_r_plus, 0.0);
}

TEST(Sweep, ErrorBarsShrinkWithRealizations) {
  // standard error of the mean ~ 1/sqrt(n): compare n = 4 and n = 16 at one sigma
  const DisorderScenario sc = small_scenario();
  DisorderConfig c;
  c.seed = 5;
  c.n_realizations = 16;
  c.scope = DisorderScope::splitter_only;
  const DisorderPoint p = disorder_sweep(sc, {0.1}, c, 1).points[0];
  ASSERT_EQ(p.n_ok, 16u);
  std::vector<double> first(p.t_minus.begin(), p.t_minus.begin() + 4);
  double m4, s4, m16, s16;
  mean_std(first, m4, s4);
  mean_std(p.t_minus, m16, s16);
  const double se4 = s4 / 2.0, se16 = s16 / std::sqrt(static_cast<double>(p.n_ok));
  EXPECT_LT(se16, se4 * 1.5);
  EXPECT_GT(s16, 0.0);
}

TEST(Sweep, LeadDisorderReachingTheEdgesIsExcludedAndCounted) {
  // bond disorder in the leads backscatters part of the packet to the chain ends
  const DisorderScenario sc = small_scenario();
  DisorderConfig c;
  c.seed = 9;
  c.n_realizations = 2;
  c.scope = DisorderScope::leads_only;
  const DisorderPoint p = disorder_sweep(sc, {0.05}, c, 2).points[0];
  EXPECT_EQ(p.n_ok, 0u);
  EXPECT_EQ(p.n_failed, 2u);
  EXPECT_TRUE(p.r_plus.empty());
}

// ---------------------------------------------------------------------------
// dimer-inversion

TEST(Triangle, CompleteGraphSpectra) {
  const auto p = triangle_spectrum({0.0, 1.0, +1});
  EXPECT_NEAR(p[0], -1.0, 1e-12);
  EXPECT_NEAR(p[1], -1.0, 1e-12);
  EXPECT_NEAR(p[2], 2.0, 1e-12);
  const auto m = triangle_spectrum({0.0, 1.0, -1});
  EXPECT_NEAR(m[0], -2.0, 1e-12);
  EXPECT_NEAR(m[1], 1.0, 1e-12);
  EXPECT_NEAR(m[2], 1.0, 1e-12);
}

TEST(Triangle, InversionIdentityRandom) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ud(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    const double e0 = ud(rng), d = 0.01 + std::abs(ud(rng));
    const TriangleBlock plus{e0, d, +1}, minus{e0, d, -1};
    const Eigen::Matrix3d u = triangle_inversion_unitary();
    const Eigen::Matrix3d lhs = u * minus.matrix() * u.transpose();
    const Eigen::Matrix3d rhs = 2.0 * e0 * Eigen::Matrix3d::Identity() - plus.matrix();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
    const auto sp = triangle_spectrum(plus), sm = triangle_spectrum(minus);
    std::vector<double> a(sm.begin(), sm.end()), b;
    for (double v : sp) b.push_back(2.0 * e0 - v);
    EXPECT_LT(oracle::spectrum_distance(a, b), 1e-12);
    // complete-graph spectra: e0 + {2d, -d, -d} and e0 + {-2d, d, d}
    EXPECT_LT(oracle::spectrum_distance(b, {e0 - 2.0 * d, e0 + d, e0 + d}), 1e-12);
    EXPECT_LT(oracle::spectrum_distance({sp.begin(), sp.end()}, {e0 + 2.0 * d, e0 - d, e0 - d}), 1e-12);
  }
}

TEST(Triangle, Validation) {
  EXPECT_THROW((TriangleBlock{0.0, -1.0, 1}).matrix(), Error);
  EXPECT_THROW((TriangleBlock{0.0, 1.0, 0}).matrix(), Error);
}

TEST(Hexamer, PatternTranscription) {
  const CMatrix h = hexamer_hamiltonian({1.0, 0.2, 0.1}).entries();
  auto at = [&](int i, int j) { return h(i - 1, j - 1).real(); };
  for (int i = 1; i <= 6; ++i) EXPECT_EQ(at(i, i), 0.0);
  EXPECT_EQ(at(1, 2), 1.0);
  EXPECT_EQ(at(3, 4), 1.0);
  EXPECT_EQ(at(5, 6), 1.0);
  EXPECT_EQ(at(1, 3), 0.2);
  EXPECT_EQ(at(1, 5), 0.2);
  EXPECT_EQ(at(3, 5), 0.2);
  EXPECT_EQ(at(1, 6), 0.1);
  EXPECT_EQ(at(2, 3), 0.1);
  EXPECT_EQ(at(4, 5), 0.1);
  int nonzero = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) nonzero += h(i, j) != Complex(0.0);
  EXPECT_EQ(nonzero, 18);
}

TEST(Hexamer, DecoupledDimers) {
  const HexamerLevels l = hexamer_levels({1.5, 0.0, 0.0});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(l.energies[static_cast<std::size_t>(i)], -1.5, 1e-12);
  for (int i = 3; i < 6; ++i) EXPECT_NEAR(l.energies[static_cast<std::size_t>(i)], 1.5, 1e-12);
}

TEST(Hexamer, C3SymmetryAndSectors) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const CMatrix p = c3_permutation();
  EXPECT_LT(max_abs(p * p * p - CMatrix::Identity(6, 6)), 1e-15);
  for (int i = 0; i < 100; ++i) {
    const HexamerCouplings c{ud(rng), ud(rng), ud(rng)};
    const CMatrix h = hexamer_hamiltonian(c).entries();
    EXPECT_LT(max_abs(p * h - h * p), 1e-12);
    const HexamerLevels l = hexamer_levels(c);
    EXPECT_TRUE(l.pattern_ok()) << c.d << " " << c.f << " " << c.g;
    // sector levels reproduce the dense spectrum: singlets once, doublets twice
    const HexamerSectors s = hexamer_sectors(c);
    std::vector<double> rec{s.singlets[0], s.singlets[1], s.doublets[0], s.doublets[0], s.doublets[1], s.doublets[1]};
    EXPECT_LT(oracle::spectrum_distance(rec, oracle::eigen_eigenvalues(h)), 1e-12);
  }
}

TEST(Hexamer, ReferenceCouplingsPattern) {
  const HexamerLevels l = hexamer_levels({1.0, 0.2, 0.1});
  EXPECT_EQ(l.n_doublets, 2u);
  EXPECT_EQ(l.n_singlets, 2u);
}

TEST(Hexamer, StrongDimerClustersAroundPlusMinusD) {
  const HexamerLevels l = hexamer_levels({10.0, 0.3, 0.2});
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(l.energies[static_cast<std::size_t>(i)], -10.0, 1.0);
  for (int i = 3; i < 6; ++i) EXPECT_NEAR(l.energies[static_cast<std::size_t>(i)], 10.0, 1.0);
  // f = 0 leaves a bipartite graph: exact +- symmetry
  const HexamerLevels b = hexamer_levels({1.0, 0.0, 0.3});
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(b.energies[static_cast<std::size_t>(i)], -b.energies[static_cast<std::size_t>(5 - i)], 1e-12);
}

TEST(Hexamer, PhysicalRegime) {
  EXPECT_TRUE((HexamerCouplings{1.0, 0.2, 0.1}).physical());
  EXPECT_FALSE((HexamerCouplings{0.1, 0.2, 0.1}).physical());
}

TEST(Hexamer, SignGaugeLeavesSpectrumInvariant) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ud(0.1, 1.0);
  for (int i = 0; i < 20; ++i) {
    // relabel into a chain order so every first off-diagonal is nonzero
    const HexamerCouplings c{ud(rng), -ud(rng), ud(rng)};
    const CMatrix h = hexamer_hamiltonian(c).entries();
    const int order[6] = {1, 0, 5, 4, 3, 2};  // 2-1-6-5-4-3 follows d, g, d, g, d
    CMatrix q = CMatrix::Zero(6, 6);
    for (int a = 0; a < 6; ++a) q(a, order[a]) = 1.0;
    const CMatrix hc = q * h * q.transpose();
    const SignGauge g = sign_gauge(OperatorMatrix(hc, true));
    EXPECT_LT(oracle::spectrum_distance(oracle::eigen_eigenvalues(hc), oracle::eigen_eigenvalues(g.h_gauged.entries())),
              1e-12);
  }
}

TEST(Sweep, ConstantCurveHasNoCrossing) {
  std::vector<double> grid;
  for (int i = 0; i <= 30; ++i) grid.push_back(3.0 * i);
  const SweepReport r = spectrum_sweep([](double) { return HexamerCouplings{1.0, 0.2, 0.1}; }, grid);
  EXPECT_TRUE(r.crossings.empty());
  EXPECT_EQ(r.rows.size(), grid.size());
}

TEST(Sweep, SignFlipOfOuterCouplingCrosses) {
  std::vector<double> grid;
  for (int i = 0; i <= 90; ++i) grid.push_back(i);
  auto curve = [](double th) { return HexamerCouplings{1.0, 0.2, 0.3 - 0.6 * th / 90.0}; };
  const SweepReport r = spectrum_sweep(curve, grid);
  ASSERT_FALSE(r.crossings.empty());
  // independent check: gap from dense levels, sign change bracketing the crossing
  const double th = r.crossings.front();
  auto gap = [&](double t) {
    const HexamerSectors s = hexamer_sectors(curve(t));
    return s.singlets[0] - s.doublets[0];
  };
  EXPECT_LT(gap(std::floor(th)) * gap(std::ceil(th) + 1e-9), 0.0);
  // continuity along the grid
  for (std::size_t i = 1; i < r.rows.size(); ++i)
    for (std::size_t k = 0; k < 6; ++k)
      EXPECT_LT(std::abs(r.rows[i].levels.energies[k] - r.rows[i - 1].levels.energies[k]), 0.05);
}

TEST(Overlap, GeometryAndCouplings) {
  OverlapModel m;
  const auto p = m.positions(0.0);
  EXPECT_NEAR(p[0].norm(), 1.0, 1e-12);
  EXPECT_NEAR((p[1] - p[0]).norm(), 0.6, 1e-12);
  EXPECT_NEAR(p[1].norm(), 1.6, 1e-12);
  const HexamerCouplings c = m.couplings(30.0);
  EXPECT_NEAR(c.d, std::exp(-0.6 / 0.25), 1e-12);
  EXPECT_GT(c.d, 0.0);
  m.xi = 0.0;
  EXPECT_THROW(m.couplings(0.0), Error);
}
