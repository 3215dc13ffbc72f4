#pragma once

// Splitter synthesis: a gate acting on one FW component, mapped back to the
// site basis.  The series over gate cells m uses lattice I-sums
//
//   I~^{s,s'}_d = (2 pi / N) sum_{k in full zone} eps(k) sqrt((E_k + s mu)/E_k) e^{ik(d - s'/2)}
//
// where eps(k) = sign(cos k) is included for the lower-weight (s = -)
// amplitude.  For a gate on cell m the site-space column of U_FW is
// proportional to I~_{n-2m}, which makes V a sum of rank-one terms.

#include <map>
#include <tuple>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "qsplit/fw.hpp"

namespace qsplit {

/// FW-picture gate: V_FW(m) on the contiguous cell window [first_cell, first_cell + rho).
struct FwGateProfile {
  std::size_t first_cell = 0;
  std::vector<double> values;

  std::size_t rho() const { return values.size(); }
  std::size_t first_site() const { return 2 * first_cell; }
  std::size_t last_site() const { return 2 * (first_cell + rho()) - 1; }

  static FwGateProfile uniform(std::size_t first_cell, std::size_t rho, double v0) {
    return FwGateProfile{first_cell, std::vector<double>(rho, v0)};
  }

  /// Uniform window whose site span [2c0, 2c0 + 2 rho) is centred on `center_site`.
  static FwGateProfile centered(std::size_t center_site, std::size_t rho, double v0) {
    require(center_site / 2 >= rho / 2, "gate.support", "gate window starts before site 0");
    return uniform(center_site / 2 - rho / 2, rho, v0);
  }

  void validate(const LatticeSpec& spec) const {
    require(rho() >= 1, "gate.support", "gate needs at least one cell");
    for (double v : values) require(std::isfinite(v), "gate.values", "gate values must be finite");
    require(first_cell + rho() <= spec.n_cells(), "gate.support_overflow",
            "gate window [" + std::to_string(first_cell) + ", " +
                std::to_string(first_cell + rho()) + ") exceeds the " +
                std::to_string(spec.n_cells()) + " cells of the lattice");
  }
};

enum class SplitterMode { one_sided, symmetric, geometric };

inline std::string to_string(SplitterMode m) {
  switch (m) {
    case SplitterMode::one_sided: return "one_sided";
    case SplitterMode::symmetric: return "symmetric";
    case SplitterMode::geometric: return "geometric";
  }
  return "?";
}

inline SplitterMode splitter_mode_from_string(const std::string& s) {
  if (s == "one_sided") return SplitterMode::one_sided;
  if (s == "symmetric") return SplitterMode::symmetric;
  if (s == "geometric") return SplitterMode::geometric;
  throw Error("splitter.mode", "unknown splitter mode '" + s + "'");
}

enum class GateVariant { one_sided, symmetric };

struct SplitterMatrix {
  OperatorMatrix v;
  SplitterMode mode = SplitterMode::one_sided;
  std::size_t neighbor_order = 0;  // geometric mode only
  std::size_t range = 0;           // rho, in cells
  std::size_t window_lo = 0, window_hi = 0;  // gate span in sites, inclusive

  std::size_t center_site() const { return window_lo + 2 * (range / 2); }
};

// ---------------------------------------------------------------------------
// Continuum I-integrals and their limits.

struct IIntegralResult {
  Complex value;
  double error_estimate = 0.0;
  bool converged = false;
};

/// int_{-pi}^{pi} dk sqrt((E_k + s mu)/E_k) e^{ik(n - s'/2)}, adaptive
/// Gauss-Kronrod on the three pieces between the kinks at k = +-pi/2.
inline IIntegralResult i_integral(int n, int s, int sp, double mu, double delta,
                                  double tol = 1e-13) {
  require(delta > 0.0, "i_integral.delta", "hopping must be positive");
  require(mu >= 0.0, "i_integral.mu", "mass must be non-negative");
  require((s == 1 || s == -1) && (sp == 1 || sp == -1), "i_integral.signs",
          "band signs must be +1 or -1");
  const double x = n - 0.5 * sp;
  auto weight = [=](double k) {
    const double c = std::cos(k);
    const double e = std::sqrt(4.0 * delta * delta * c * c + mu * mu);
    if (mu == 0.0) return 1.0;
    // (E - mu)/E written without cancellation
    if (s < 0) return std::sqrt(4.0 * delta * delta * c * c / (e * (e + mu)));
    return std::sqrt((e + mu) / e);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  // the weight varies on the scale mu / (2 Delta) around k = +-pi/2:
  // geometric breakpoints towards both points
  std::vector<double> cuts{-kPi, -0.5 * kPi, 0.5 * kPi, kPi};
  for (double w = mu / (2.0 * delta); mu > 0.0 && w < 0.25 * kPi; w *= 4.0)
    for (double c : {-0.5 * kPi, 0.5 * kPi})
      for (double side : {-1.0, 1.0}) cuts.push_back(c + side * w);
  std::sort(cuts.begin(), cuts.end());
  double re = 0.0, im = 0.0, err = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    // Boost's sub-interval error floor is 2 eps of the unscaled integral, so
    // short pieces are mapped onto [-1, 1] before integrating
    const double mid = 0.5 * (cuts[p] + cuts[p + 1]), half = 0.5 * (cuts[p + 1] - cuts[p]);
    double e1 = 0.0, e2 = 0.0;
    re += GK::integrate([&](double u) { const double k = mid + half * u; return half * weight(k) * std::cos(k * x); },
                        -1.0, 1.0, 30, tol, &e1);
    im += GK::integrate([&](double u) { const double k = mid + half * u; return half * weight(k) * std::sin(k * x); },
                        -1.0, 1.0, 30, tol, &e2);
    err += std::abs(e1) + std::abs(e2);
  }
  IIntegralResult r{Complex(re, im), err, err < 1e-9};
  if (!r.converged)
    throw Error("i_integral.not_converged",
                "quadrature error estimate " + std::to_string(err) + " exceeds 1e-9");
  return r;
}

/// Heavy-mass limit (mu >> Delta) of the I-integral.
inline double i_integral_heavy_limit(int n, int s, int sp) {
  const double sign_n = (n % 2 == 0) ? 1.0 : -1.0;
  return 4.0 * std::sqrt(1.0 + s) * sp * sign_n / (sp - 2.0 * n);
}

/// Light-mass limit (mu << Delta); exact at mu = 0.
inline double i_integral_light_limit(int n, int sp) {
  const double sign_n = (n % 2 == 0) ? 1.0 : -1.0;
  return 4.0 * sp * sign_n / (sp - 2.0 * n);
}

struct IIntegralTable {
  std::map<std::tuple<int, int, int>, Complex> values;
  double mass_ratio = 0.0;
  double max_error_estimate = 0.0;
};

inline IIntegralTable i_integral_table(int n_min, int n_max, double mu, double delta) {
  IIntegralTable t;
  t.mass_ratio = mu / delta;
  for (int n = n_min; n <= n_max; ++n)
    for (int s : {1, -1})
      for (int sp : {1, -1}) {
        const IIntegralResult r = i_integral(n, s, sp, mu, delta);
        t.values[{n, s, sp}] = r.value;
        t.max_error_estimate = std::max(t.max_error_estimate, r.error_estimate);
      }
  return t;
}

// ---------------------------------------------------------------------------
// Lattice I-sums and the series assembly.

/// (2 pi/N) sum over k_l = -pi + 2 pi l / N, l = 0..N-1, for d = 0..N-1 (the
/// sum is N-periodic in d).  eps(k) = +1 on (-pi/2, pi/2], matching the
/// branch used by half_angles().
inline std::vector<Complex> lattice_i_sums(const LatticeSpec& spec, int s, int sp, bool signed_weight) {
  const auto n = static_cast<long>(spec.n_sites);
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<double> ks(static_cast<std::size_t>(n));
  for (long l = 0; l < n; ++l) {
    const double k = -kPi + 2.0 * kPi * static_cast<double>(l) / static_cast<double>(n);
    ks[static_cast<std::size_t>(l)] = k;
    const double c = std::cos(k);
    const double e = band_gap_half(spec, k);
    double ratio = 1.0;
    if (spec.mass > 0.0)
      ratio = s > 0 ? (e + spec.mass) / e
                    : 4.0 * spec.hopping * spec.hopping * c * c / (e * (e + spec.mass));
    double eps = 1.0;
    if (signed_weight) eps = (4 * l > n && 4 * l <= 3 * n) ? 1.0 : -1.0;
    w[static_cast<std::size_t>(l)] = eps * std::sqrt(ratio);
  }
  std::vector<Complex> out(static_cast<std::size_t>(n));
  for (long d = 0; d < n; ++d) {
    const double x = static_cast<double>(d) - 0.5 * sp;
    Complex acc = 0.0;
    for (long l = 0; l < n; ++l)
      acc += w[static_cast<std::size_t>(l)] * std::polar(1.0, ks[static_cast<std::size_t>(l)] * x);
    out[static_cast<std::size_t>(d)] = acc * (2.0 * kPi / static_cast<double>(n));
  }
  return out;
}

enum class GateComponent { upper, lower };

/// Columns U_FW |2m + sigma> for the gate cells m, one column per cell.
inline CMatrix gate_kernel(const LatticeSpec& spec, const FwGateProfile& gate, GateComponent comp) {
  const std::vector<Complex> big = lattice_i_sums(spec, +1, +1, false);
  const std::vector<Complex> small = lattice_i_sums(spec, -1, +1, true);
  const auto n = static_cast<long>(spec.n_sites);
  const double root2 = std::sqrt(2.0);
  const Complex pref = comp == GateComponent::upper ? 1.0 / (kPi * root2 * Complex(1.0, 1.0))
                                                    : 1.0 / (kPi * root2 * Complex(1.0, -1.0));
  CMatrix k(n, static_cast<Eigen::Index>(gate.rho()));
  for (std::size_t c = 0; c < gate.rho(); ++c) {
    const long m = static_cast<long>(gate.first_cell + c);
    for (long row = 0; row < n; ++row) {
      const auto d = static_cast<std::size_t>(((row - 2 * m) % n + n) % n);
      Complex val;
      if (comp == GateComponent::upper)
        val = row % 2 == 0 ? big[d] : small[d];
      else
        val = row % 2 == 0 ? -small[d] : big[d];
      k(row, static_cast<Eigen::Index>(c)) = pref * val;
    }
  }
  return k;
}

namespace detail {

/// Series sum K diag(g) K† restricted to the first `rows` sites of the ring.
inline CMatrix series_sum(const FwGateProfile& gate, const LatticeSpec& ring, GateVariant variant,
                          Eigen::Index rows) {
  const Eigen::Map<const RVector> g(gate.values.data(), static_cast<Eigen::Index>(gate.rho()));
  const CMatrix ku = gate_kernel(ring, gate, GateComponent::upper).topRows(rows);
  CMatrix v = ku * g.asDiagonal() * ku.adjoint();
  if (variant == GateVariant::symmetric) {
    const CMatrix kd = gate_kernel(ring, gate, GateComponent::lower).topRows(rows);
    v -= kd * g.asDiagonal() * kd.adjoint();
  }
  return 0.5 * (v + v.adjoint());
}

inline SplitterMatrix wrap_splitter(CMatrix v, const FwGateProfile& gate, GateVariant variant) {
  SplitterMatrix out;
  out.v = OperatorMatrix(std::move(v), true);
  out.mode = variant == GateVariant::one_sided ? SplitterMode::one_sided : SplitterMode::symmetric;
  out.range = gate.rho();
  out.window_lo = gate.first_site();
  out.window_hi = gate.last_site();
  return out;
}

}  // namespace detail

/// Site-space splitter V = U_FW (P_gate (x) V_FW) U_FW† as a series over gate cells.
/// one_sided: gate on the upper component; symmetric: sigma3 (x) V_FW.
inline SplitterMatrix potential_blocks(const FwGateProfile& gate, const LatticeSpec& spec,
                                       GateVariant variant) {
  spec.validate();
  gate.validate(spec);
  return detail::wrap_splitter(
      detail::series_sum(gate, spec, variant, static_cast<Eigen::Index>(spec.n_sites)), gate, variant);
}

/// Removes on-site terms and every coupling beyond `neighbor_order`.
inline SplitterMatrix geometric_truncate(const SplitterMatrix& in, std::size_t neighbor_order) {
  require(neighbor_order >= 1, "geometric.order", "neighbor order must be at least 1");
  CMatrix v = in.v.entries();
  for (Eigen::Index c = 0; c < v.cols(); ++c)
    for (Eigen::Index r = 0; r < v.rows(); ++r)
      if (r == c || static_cast<std::size_t>(std::abs(r - c)) > neighbor_order) v(r, c) = 0.0;
  SplitterMatrix out = in;
  out.v = OperatorMatrix(std::move(v), true, std::min(neighbor_order, in.v.dim() - 1));
  out.mode = SplitterMode::geometric;
  out.neighbor_order = neighbor_order;
  return out;
}

struct SplitterSettings {
  SplitterMode mode = SplitterMode::one_sided;
  std::size_t rho = 60;
  std::size_t neighbor_order = 2;
  double v0 = 2.0;
  // Synthesize on a ring of embed_factor * N sites and keep the leading N x N
  // block.  V decays only like 1/|n - n'|, so on an N-site ring the wrap-around
  // couples the gate straight to both ends of an open chain.
  std::size_t embed_factor = 1;
};

/// Gate centred on `center_site`, synthesized on a ring of
/// s.embed_factor * spec.n_sites sites.
inline SplitterMatrix synthesize_splitter(const LatticeSpec& spec, const SplitterSettings& s,
                                          std::size_t center_site) {
  require(s.embed_factor >= 1, "splitter.embed_factor", "embed_factor must be at least 1");
  spec.validate();
  LatticeSpec ring = spec;
  ring.boundary = Boundary::periodic;
  ring.n_sites = spec.n_sites * s.embed_factor;
  const FwGateProfile gate = FwGateProfile::centered(center_site, s.rho, s.v0);
  gate.validate(spec);
  const GateVariant variant =
      s.mode == SplitterMode::symmetric ? GateVariant::symmetric : GateVariant::one_sided;
  SplitterMatrix out = detail::wrap_splitter(
      detail::series_sum(gate, ring, variant, static_cast<Eigen::Index>(spec.n_sites)), gate, variant);
  if (s.mode == SplitterMode::geometric) out = geometric_truncate(out, s.neighbor_order);
  return out;
}

// ---------------------------------------------------------------------------

struct SignGauge {
  OperatorMatrix u_sign;
  OperatorMatrix h_gauged;
};

/// Diagonal phase gauge making the first off-diagonal real and non-negative.
inline SignGauge sign_gauge(const OperatorMatrix& h) {
  require(h.hermitian(), "sign_gauge.not_hermitian", "sign gauge needs a Hermitian matrix");
  const auto n = static_cast<Eigen::Index>(h.dim());
  RVector phase = RVector::Zero(n);
  for (Eigen::Index i = 1; i < n; ++i) {
    const Complex sub = h.entries()(i, i - 1);
    require(std::abs(sub) > 0.0, "sign_gauge.zero_coupling",
            "first off-diagonal element (" + std::to_string(i) + ", " + std::to_string(i - 1) +
                ") is zero; accumulated phase undefined");
    phase(i) = phase(i - 1) + std::arg(sub);
  }
  CVector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = std::polar(1.0, -phase(i));
  CMatrix g = d.asDiagonal() * h.entries() * d.conjugate().asDiagonal();
  for (Eigen::Index i = 1; i < n; ++i) g(i, i - 1) = std::abs(g(i, i - 1)), g(i - 1, i) = g(i, i - 1);
  return SignGauge{OperatorMatrix(CMatrix(d.asDiagonal()), false, 0), OperatorMatrix(std::move(g), true)};
}

/// H_free (with the spec's own boundary) plus the splitter, shifted by an
/// even number of sites so its centre lands on `center` (rounded down to a
/// cell boundary).  The window must keep `lead_margin` sites to either edge.
inline OperatorMatrix assemble_scattering_hamiltonian(const LatticeSpec& spec,
                                                      const SplitterMatrix& splitter,
                                                      std::size_t center,
                                                      std::size_t lead_margin = 20) {
  spec.validate();
  require(splitter.v.dim() == spec.n_sites, "assemble.dimension",
          "splitter dimension does not match the lattice");
  const long n = static_cast<long>(spec.n_sites);
  const long shift = 2 * ((static_cast<long>(center) - static_cast<long>(splitter.center_site())) / 2);
  const long lo = static_cast<long>(splitter.window_lo) + shift;
  const long hi = static_cast<long>(splitter.window_hi) + shift;
  require(lo >= static_cast<long>(lead_margin) && hi + static_cast<long>(lead_margin) < n,
          "assemble.lead_length",
          "splitter window [" + std::to_string(lo) + ", " + std::to_string(hi) +
              "] leaves less than " + std::to_string(lead_margin) + " lead sites; need N >= " +
              std::to_string(hi - lo + 1 + 2 * static_cast<long>(lead_margin)));

  CMatrix h = build_hamiltonian(spec).entries();
  const CMatrix& v = splitter.v.entries();
  if (shift == 0) {
    h += v;
  } else {
    for (long c = 0; c < n; ++c) {
      const long cs = ((c + shift) % n + n) % n;
      for (long r = 0; r < n; ++r) h(((r + shift) % n + n) % n, cs) += v(r, c);
    }
  }
  return OperatorMatrix(std::move(h), true);
}

}  // namespace qsplit
