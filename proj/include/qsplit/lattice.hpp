#pragma once

// Bipartite tight-binding chain in Dirac form.
//
// Site n = 2j is the upper (even) quasispin component of cell j, site 2j+1
// the lower (odd) one.  T is the one-site translation T|n> = |n+1>.
// The kinetic operators are
//   Pi1 = 1 + (T^2 + T†^2)/2,   Pi2 = (T†^2 - T^2)/(2i),
// which, together with alpha1, alpha2, beta acting inside each cell, give
// H = Delta (alpha1 Pi1 + alpha2 Pi2) + mu beta + E0 exactly on a ring.

#include <cmath>
#include <string>
#include <vector>

#include "qsplit/core.hpp"

namespace qsplit {

enum class Boundary { periodic, open };

inline std::string to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "open";
}

struct LatticeSpec {
  std::size_t n_sites = 64;
  double hopping = 1.0;       // Delta
  double mass = 0.0;          // mu, half the on-site splitting
  double mean_onsite = 0.0;   // E0
  double lattice_constant = 1.0;
  Boundary boundary = Boundary::periodic;

  std::size_t n_cells() const { return n_sites / 2; }

  void validate() const {
    require(n_sites >= 4, "lattice.n_sites", "n_sites must be at least 4");
    require(n_sites % 2 == 0, "lattice.n_sites", "n_sites must be even");
    require(hopping > 0.0, "lattice.hopping", "hopping must be positive");
    require(mass >= 0.0, "lattice.mass", "mass must be non-negative");
    require(lattice_constant > 0.0, "lattice.lattice_constant",
            "lattice constant must be positive");
  }
};

/// Alternating on-site energies E0 + mu (even sites), E0 - mu (odd sites).
inline std::vector<double> bipartite_onsite(const LatticeSpec& spec) {
  std::vector<double> v(spec.n_sites);
  for (std::size_t n = 0; n < spec.n_sites; ++n)
    v[n] = spec.mean_onsite + (n % 2 == 0 ? spec.mass : -spec.mass);
  return v;
}

/// One-site translation T|n> = |n+1>, wrapping only on a ring.
inline CMatrix translation(const LatticeSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.n_sites);
  CMatrix t = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) t(i + 1, i) = 1.0;
  if (spec.boundary == Boundary::periodic) t(0, n - 1) = 1.0;
  return t;
}

inline OperatorMatrix build_hamiltonian(const LatticeSpec& spec,
                                        const std::vector<double>& onsite) {
  spec.validate();
  require(onsite.size() == spec.n_sites, "lattice.onsite",
          "onsite list has " + std::to_string(onsite.size()) + " entries, expected " +
              std::to_string(spec.n_sites));
  const auto n = static_cast<Eigen::Index>(spec.n_sites);
  CMatrix h = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) h(i, i) = onsite[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < n; ++i) h(i, i + 1) = h(i + 1, i) = spec.hopping;
  if (spec.boundary == Boundary::periodic) {
    h(0, n - 1) += spec.hopping;
    h(n - 1, 0) += spec.hopping;
  }
  const std::size_t bw = spec.boundary == Boundary::periodic ? spec.n_sites - 1 : 1;
  return OperatorMatrix(std::move(h), true, bw);
}

inline OperatorMatrix build_hamiltonian(const LatticeSpec& spec) {
  return build_hamiltonian(spec, bipartite_onsite(spec));
}

struct DiracOperators {
  OperatorMatrix pi1, pi2, alpha1, alpha2, beta;
  /// Set for open chains: the Dirac identity then only holds away from the ends.
  bool approximate = false;
};

inline DiracOperators build_dirac_operators(const LatticeSpec& spec) {
  spec.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_sites);
  const CMatrix t = translation(spec);
  const CMatrix t2 = t * t;
  const CMatrix t2d = t2.adjoint();
  const CMatrix id = CMatrix::Identity(n, n);

  CMatrix a1 = CMatrix::Zero(n, n), a2 = CMatrix::Zero(n, n), b = CMatrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; i += 2) {
    a1(i + 1, i) = 1.0;
    a1(i, i + 1) = 1.0;
    a2(i + 1, i) = kI;
    a2(i, i + 1) = -kI;
    b(i, i) = 1.0;
    b(i + 1, i + 1) = -1.0;
  }
  return DiracOperators{
      OperatorMatrix(id + 0.5 * (t2 + t2d), true),
      OperatorMatrix((t2d - t2) / (2.0 * kI), true),
      OperatorMatrix(std::move(a1), true, 1),
      OperatorMatrix(std::move(a2), true, 1),
      OperatorMatrix(std::move(b), true, 0),
      spec.boundary == Boundary::open,
  };
}

/// E_k = sqrt(4 Delta^2 cos^2 k + mu^2), the distance of either band from E0.
inline double band_gap_half(const LatticeSpec& spec, double k) {
  const double c = std::cos(k);
  return std::sqrt(4.0 * spec.hopping * spec.hopping * c * c + spec.mass * spec.mass);
}

inline double dispersion(const LatticeSpec& spec, double k, Band s) {
  return spec.mean_onsite + sign_of(s) * band_gap_half(spec, k);
}

/// dE_{k,s}/dk.
inline double group_velocity(const LatticeSpec& spec, double k, Band s) {
  const double e = band_gap_half(spec, k);
  if (e == 0.0) return sign_of(s) * 2.0 * spec.hopping;
  return -sign_of(s) * 2.0 * spec.hopping * spec.hopping * std::sin(2.0 * k) / e;
}

/// Reduced-zone grid k_j = 2 pi j / N, j = 0 .. N/2 - 1, for a ring of N sites.
inline std::vector<double> k_grid(const LatticeSpec& spec) {
  std::vector<double> ks(spec.n_cells());
  for (std::size_t j = 0; j < ks.size(); ++j)
    ks[j] = 2.0 * kPi * static_cast<double>(j) / static_cast<double>(spec.n_sites);
  return ks;
}

/// Scalar half angles of the band rotation at wave number k.
///
/// cos(theta/2) = sqrt((E_k + mu) / 2E_k) and sin(theta/2) carries the sign of
/// cos k, so that sin(theta) = 2 Delta cos k / E_k.  At the massless Dirac
/// point (E_k = 0) the limit from below is taken.
struct HalfAngles {
  double gap_half = 0.0;  // E_k
  double cos_half = 1.0;
  double sin_half = 0.0;
};

inline HalfAngles half_angles(const LatticeSpec& spec, double k) {
  HalfAngles h;
  h.gap_half = band_gap_half(spec, k);
  const double ck = std::cos(k);
  const double sgn = ck < 0.0 ? -1.0 : 1.0;
  if (h.gap_half == 0.0) {
    h.cos_half = std::sqrt(0.5);
    h.sin_half = std::sqrt(0.5);
    return h;
  }
  h.cos_half = std::sqrt((h.gap_half + spec.mass) / (2.0 * h.gap_half));
  h.sin_half = sgn * std::sqrt(std::max(0.0, (h.gap_half - spec.mass) / (2.0 * h.gap_half)));
  return h;
}

/// 2x2 rotation exp(-i k sigma3 / 2) exp(-i theta sigma2 / 2) in the cell
/// gauge (both sites of cell j carry the phase e^{2ikj}).  Column 0 is the
/// upper band spinor, column 1 the lower one.
inline Eigen::Matrix2cd cell_rotation(const LatticeSpec& spec, double k) {
  const HalfAngles h = half_angles(spec, k);
  const Complex em = std::exp(-0.5 * kI * k), ep = std::exp(0.5 * kI * k);
  Eigen::Matrix2cd u;
  u << em * h.cos_half, -em * h.sin_half, ep * h.sin_half, ep * h.cos_half;
  return u;
}

struct BlochBand {
  double k = 0.0;
  Band band = Band::upper;
  double energy = 0.0;
  // Unit spinor in the site gauge (phase e^{ikn} on every site n); equal to
  // the continuum amplitudes up to a global phase and their 1/sqrt(4 pi).
  Complex u_plus, u_minus;
};

inline bool on_k_grid(const LatticeSpec& spec, double k) {
  const double j = k * static_cast<double>(spec.n_sites) / (2.0 * kPi);
  const double jr = std::round(j);
  return std::abs(j - jr) < 1e-9 && jr >= 0.0 &&
         jr < static_cast<double>(spec.n_cells());
}

/// Bloch eigenstate |k, s> and its normalized site-basis vector.
inline std::pair<BlochBand, CVector> bloch_state(const LatticeSpec& spec, double k, Band s) {
  spec.validate();
  require(spec.boundary == Boundary::periodic, "bloch.boundary",
          "Bloch states are exact eigenstates only on a ring");
  require(on_k_grid(spec, k), "bloch.k_off_grid",
          "k = " + std::to_string(k) + " is not on the ring's reduced-zone grid");

  const Eigen::Matrix2cd u = cell_rotation(spec, k);
  const int col = s == Band::upper ? 0 : 1;
  const Complex up = u(0, col), dn = u(1, col);

  BlochBand band;
  band.k = k;
  band.band = s;
  band.energy = dispersion(spec, k, s);
  // cell gauge -> site gauge: the odd site picks up an extra e^{-ik}.
  const Complex gauge = std::exp(0.5 * kI * k);
  band.u_plus = up * gauge;
  band.u_minus = dn * gauge * std::exp(-kI * k);

  const auto m = static_cast<Eigen::Index>(spec.n_cells());
  const double norm = 1.0 / std::sqrt(static_cast<double>(m));
  CVector v(2 * m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const Complex ph = std::exp(2.0 * kI * k * static_cast<double>(j)) * norm;
    v(2 * j) = ph * up;
    v(2 * j + 1) = ph * dn;
  }
  return {band, v};
}

/// Exact kinetic eigenvalues near the conical point k = pi/2 - kappa/2 and
/// their leading-order expansions.
struct ConicalCheck {
  double p1 = 0.0, p2 = 0.0;                    // exact: 1 + cos 2k, sin 2k
  double p1_expansion = 0.0, p2_expansion = 0.0;  // kappa^2/2, kappa
};

inline ConicalCheck conical_expansion_check(const LatticeSpec& spec, double kappa_offset) {
  (void)spec;
  const double k = 0.5 * kPi - 0.5 * kappa_offset;
  ConicalCheck c;
  c.p1 = 1.0 + std::cos(2.0 * k);
  c.p2 = std::sin(2.0 * k);
  c.p1_expansion = 0.5 * kappa_offset * kappa_offset;
  c.p2_expansion = kappa_offset;
  return c;
}

}  // namespace qsplit
