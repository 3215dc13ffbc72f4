#pragma once

// Triangular blocks, the six-site dimer ring and its C3 structure.
// Sites are 0-indexed here: inner resonators 0, 2, 4, their dimer partners
// 1, 3, 5.

#include <array>
#include <functional>

#include "qsplit/core.hpp"

namespace qsplit {

struct TriangleBlock {
  double e0 = 0.0;
  double delta = 1.0;
  int sign = +1;

  void validate() const {
    require(delta > 0.0, "triangle.delta", "delta must be positive");
    require(sign == 1 || sign == -1, "triangle.sign", "sign must be +1 or -1");
  }

  Eigen::Matrix3d matrix() const {
    validate();
    Eigen::Matrix3d h;
    h << e0, delta, sign * delta, delta, e0, delta, sign * delta, delta, e0;
    return h;
  }
};

/// diag{-1, 1, -1}: maps H- to 2 E0 - H+.
inline Eigen::Matrix3d triangle_inversion_unitary() {
  return Eigen::Vector3d(-1.0, 1.0, -1.0).asDiagonal();
}

/// Ascending eigenvalues of a real symmetric 3x3 by QR iteration.  The
/// trigonometric closed form loses half the digits at a double eigenvalue,
/// which every triangle block has.
inline std::array<double, 3> symmetric3_eigenvalues(const Eigen::Matrix3d& a) {
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(1), es.eigenvalues()(2)};
}

inline std::array<double, 3> triangle_spectrum(const TriangleBlock& b) {
  return symmetric3_eigenvalues(b.matrix());
}

struct HexamerCouplings {
  double d = 1.0, f = 0.2, g = 0.1;

  /// Strong intradimer regime |d| >= |f| >= |g|.
  bool physical() const { return std::abs(d) >= std::abs(f) && std::abs(f) >= std::abs(g); }
};

inline OperatorMatrix hexamer_hamiltonian(const HexamerCouplings& c) {
  CMatrix h = CMatrix::Zero(6, 6);
  auto set = [&](int i, int j, double v) { h(i - 1, j - 1) = h(j - 1, i - 1) = v; };
  set(1, 2, c.d), set(3, 4, c.d), set(5, 6, c.d);
  set(1, 3, c.f), set(1, 5, c.f), set(3, 5, c.f);
  set(1, 6, c.g), set(2, 3, c.g), set(4, 5, c.g);
  return OperatorMatrix(std::move(h), true);
}

/// Cyclic relabeling (1,2) -> (3,4) -> (5,6) -> (1,2) as a 6x6 permutation.
inline CMatrix c3_permutation() {
  CMatrix p = CMatrix::Zero(6, 6);
  for (int i = 0; i < 6; ++i) p((i + 2) % 6, i) = 1.0;
  return p;
}

/// Levels of the C3-invariant sector (two singlets) and of one chiral
/// sector (each value a doublet), both ascending.
struct HexamerSectors {
  std::array<double, 2> singlets{};
  std::array<double, 2> doublets{};
};

inline HexamerSectors hexamer_sectors(const HexamerCouplings& c) {
  const CMatrix h = hexamer_hamiltonian(c).entries();
  const Complex w = std::polar(1.0, 2.0 * kPi / 3.0);
  HexamerSectors out;
  for (int sector = 0; sector < 2; ++sector) {
    const Complex z = sector == 0 ? Complex(1.0) : w;
    CMatrix basis = CMatrix::Zero(6, 2);
    for (int cell = 0; cell < 3; ++cell) {
      const Complex ph = std::pow(z, cell) / std::sqrt(3.0);
      basis(2 * cell, 0) = ph;
      basis(2 * cell + 1, 1) = ph;
    }
    const CMatrix block = basis.adjoint() * h * basis;
    const RVector e = hermitian_eigenvalues(0.5 * (block + block.adjoint()));
    auto& dst = sector == 0 ? out.singlets : out.doublets;
    dst = {e(0), e(1)};
  }
  return out;
}

struct LevelCluster {
  double energy;
  std::size_t multiplicity;
};

/// Groups ascending eigenvalues whose neighbour gap is below tol * ||H||.
inline std::vector<LevelCluster> cluster_levels(const std::vector<double>& ascending, double scale,
                                                double rel_tol = 1e-9) {
  std::vector<LevelCluster> out;
  const double tol = rel_tol * std::max(scale, 1e-300);
  for (std::size_t i = 0; i < ascending.size(); ++i) {
    if (!out.empty() && ascending[i] - ascending[i - 1] < tol) {
      auto& c = out.back();
      c.energy = (c.energy * static_cast<double>(c.multiplicity) + ascending[i]) /
                 static_cast<double>(c.multiplicity + 1);
      ++c.multiplicity;
    } else {
      out.push_back({ascending[i], 1});
    }
  }
  return out;
}

struct HexamerLevels {
  std::array<double, 6> energies{};
  std::array<std::string, 6> labels{};  // "singlet" or "doublet" from clustering
  std::size_t n_doublets = 0, n_singlets = 0;
  bool pattern_ok() const { return n_doublets == 2 && n_singlets == 2; }
};

inline HexamerLevels hexamer_levels(const HexamerCouplings& c, double rel_tol = 1e-9) {
  const CMatrix h = hexamer_hamiltonian(c).entries();
  const std::vector<double> e = to_std(hermitian_eigenvalues(h));
  const double scale = h.operatorNorm();
  HexamerLevels out;
  std::size_t idx = 0;
  for (const auto& cl : cluster_levels(e, scale, rel_tol)) {
    const std::string label = cl.multiplicity == 1   ? "singlet"
                              : cl.multiplicity == 2 ? "doublet"
                                                     : "multiplet" + std::to_string(cl.multiplicity);
    if (cl.multiplicity == 1) ++out.n_singlets;
    if (cl.multiplicity == 2) ++out.n_doublets;
    for (std::size_t m = 0; m < cl.multiplicity; ++m, ++idx) {
      out.energies[idx] = e[idx];
      out.labels[idx] = label;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

using CouplingCurve = std::function<HexamerCouplings(double)>;

struct SweepRow {
  double theta = 0.0;
  HexamerCouplings couplings;
  HexamerLevels levels;
  HexamerSectors sectors;
  double gap = 0.0;  // lower singlet minus lower doublet
};

struct SweepReport {
  std::vector<SweepRow> rows;
  std::vector<double> crossings;  // theta values where the gap changes sign
};

/// Levels along a coupling curve.  Crossings are located by linear
/// interpolation of the lower-singlet / lower-doublet gap.
inline SweepReport spectrum_sweep(const CouplingCurve& curve, const std::vector<double>& theta_grid) {
  SweepReport rep;
  for (double th : theta_grid) {
    SweepRow r;
    r.theta = th;
    r.couplings = curve(th);
    r.levels = hexamer_levels(r.couplings);
    r.sectors = hexamer_sectors(r.couplings);
    r.gap = r.sectors.singlets[0] - r.sectors.doublets[0];
    rep.rows.push_back(r);
  }
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    const double g0 = rep.rows[i - 1].gap, g1 = rep.rows[i].gap;
    if (g0 == 0.0 && i == 1) rep.crossings.push_back(rep.rows[0].theta);
    if (g1 == 0.0 || (g0 < 0.0) != (g1 < 0.0)) {
      if (g0 == 0.0) continue;
      const double t0 = rep.rows[i - 1].theta, t1 = rep.rows[i].theta;
      rep.crossings.push_back(t0 + (t1 - t0) * g0 / (g0 - g1));
    }
  }
  return rep;
}

/// Exponential-overlap geometry: inner resonators on a circle of radius R at
/// angles 90 + 120 i degrees, each partner at distance ell from its inner
/// resonator, tilted by theta from the outward radial direction.  Every
/// coupling is amplitude * exp(-r / xi).
struct OverlapModel {
  double radius = 1.0;
  double ell = 0.6;
  double xi = 0.25;
  double amplitude = 1.0;

  void validate() const {
    require(radius > 0.0 && ell > 0.0 && xi > 0.0, "overlap.geometry",
            "radius, ell and xi must be positive");
  }

  std::array<Eigen::Vector2d, 6> positions(double theta_deg) const {
    std::array<Eigen::Vector2d, 6> p;
    const double th = theta_deg * kPi / 180.0;
    for (int i = 0; i < 3; ++i) {
      const double phi = kPi / 2.0 + 2.0 * kPi * i / 3.0;
      p[2 * i] = radius * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      p[2 * i + 1] = p[2 * i] + ell * Eigen::Vector2d(std::cos(phi + th), std::sin(phi + th));
    }
    return p;
  }

  HexamerCouplings couplings(double theta_deg) const {
    validate();
    const auto p = positions(theta_deg);
    auto k = [&](int a, int b) { return amplitude * std::exp(-(p[a] - p[b]).norm() / xi); };
    // outer partner of dimer i couples to the inner resonator of dimer i+1
    return HexamerCouplings{k(0, 1), k(0, 2), k(1, 2)};
  }
};

}  // namespace qsplit
