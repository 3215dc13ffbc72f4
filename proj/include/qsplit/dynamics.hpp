#pragma once

#include <optional>

#include "qsplit/splitter.hpp"

namespace qsplit {

/// Dimer position operator X = (a/2) sum_n (n - n mod 2) |n><n|.
inline RVector position_diagonal(const LatticeSpec& spec) {
  RVector x(static_cast<Eigen::Index>(spec.n_sites));
  for (std::size_t n = 0; n < spec.n_sites; ++n)
    x(static_cast<Eigen::Index>(n)) = 0.5 * spec.lattice_constant * static_cast<double>(n - n % 2);
  return x;
}

inline OperatorMatrix position_operator(const LatticeSpec& spec) {
  return OperatorMatrix(CMatrix(position_diagonal(spec).cast<Complex>().asDiagonal()), true, 0);
}

inline double position_expectation(const CVector& psi, const LatticeSpec& spec) {
  return psi.cwiseAbs2().dot(position_diagonal(spec));
}

inline double position_expectation(const WavePacket& psi, const LatticeSpec& spec) {
  require(psi.dim() == spec.n_sites, "dynamics.dimension", "state/lattice size mismatch");
  return position_expectation(psi.amplitudes, spec);
}

/// psi = w- normalize(P- g e^{i kappa n}) + w+ normalize(P+ g e^{-i kappa n}),
/// g a Gaussian of width lambda around the packet centre.
inline WavePacket make_packet(const LatticeSpec& spec, const WavePacketSpec& p,
                              const BandProjectors& proj) {
  spec.validate();
  p.validate();
  require(proj.p_plus.dim() == spec.n_sites, "packet.dimension", "projector/lattice size mismatch");
  const auto n = static_cast<Eigen::Index>(spec.n_sites);
  const double lam2 = 4.0 * p.width * p.width;
  const double edge_dist = std::min(p.center, static_cast<double>(n - 1) - p.center);
  // probability density of the envelope at the nearest edge
  require(edge_dist > 0.0 && std::exp(-2.0 * edge_dist * edge_dist / lam2) < 1e-8, "packet.too_wide",
          "Gaussian tail at the lattice edge exceeds 1e-8; move the centre or shrink the width");

  CVector up(n), dn(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = static_cast<double>(i) - p.center;
    const double g = std::exp(-d * d / lam2);
    dn(i) = g * std::polar(1.0, p.kick * static_cast<double>(i));
    up(i) = g * std::polar(1.0, -p.kick * static_cast<double>(i));
  }
  CVector a = proj.p_minus.entries() * dn;
  CVector b = proj.p_plus.entries() * up;
  a /= a.norm();
  b /= b.norm();
  WavePacket out;
  out.spec = p;
  out.amplitudes = p.w_minus * a + p.w_plus * b;
  out.amplitudes /= out.amplitudes.norm();
  return out;
}

/// Exact unitary propagation through one dense eigendecomposition.
class Propagator {
 public:
  explicit Propagator(const OperatorMatrix& h) {
    require(h.hermitian(), "dynamics.not_hermitian", "propagation needs a Hermitian Hamiltonian");
    eig_ = hermitian_eigen(h.entries());
  }

  const HermitianEigen& eigen() const { return eig_; }

  /// Eigenbasis coefficients <E_j|psi0>.
  CVector coefficients(const CVector& psi0) const { return eig_.vectors.adjoint() * psi0; }

  CVector evolve_coefficients(const CVector& coeff, double t) const {
    CVector ph(coeff.size());
    for (Eigen::Index j = 0; j < coeff.size(); ++j)
      ph(j) = std::polar(1.0, -eig_.values(j) * t) * coeff(j);
    return eig_.vectors * ph;
  }

  WavePacket evolve(const WavePacket& psi0, double t) const {
    WavePacket out = psi0;
    out.amplitudes = evolve_coefficients(coefficients(psi0.amplitudes), t);
    out.time = psi0.time + t;
    return out;
  }

  std::vector<WavePacket> propagate(const WavePacket& psi0, const std::vector<double>& times) const {
    const CVector c = coefficients(psi0.amplitudes);
    std::vector<WavePacket> out;
    out.reserve(times.size());
    for (double t : times) {
      WavePacket w = psi0;
      w.amplitudes = evolve_coefficients(c, t);
      w.time = psi0.time + t;
      out.push_back(std::move(w));
    }
    return out;
  }

  double energy(const CVector& coeff) const { return coeff.cwiseAbs2().dot(eig_.values); }

 private:
  HermitianEigen eig_;
};

inline std::vector<WavePacket> propagate(const OperatorMatrix& h, const WavePacket& psi0,
                                         const std::vector<double>& times) {
  return Propagator(h).propagate(psi0, times);
}

// ---------------------------------------------------------------------------
// Scattering.

struct RunSettings {
  double t_max = 2400.0;  // >= 2 T_c for the baseline; runs stop at separation
  std::size_t n_outputs = 480;
  double edge_tolerance = 1e-6;
  std::size_t edge_sites = 10;
  double enter_threshold = 0.05;  // window probability marking arrival at the splitter
  double exit_threshold = 0.01;   // window probability marking separation
  double window_pad = 2.0;        // padding around the gate span, in packet widths
  std::optional<double> fixed_time;  // evaluate once at this time instead of detecting separation
  bool record_series = false;
  std::size_t snapshot_every = 0;  // 0 disables per-site snapshots

  void validate() const {
    require(t_max > 0.0, "run.t_max", "t_max must be positive");
    require(n_outputs >= 1, "run.n_outputs", "n_outputs must be at least 1");
  }
};

struct TimeSample {
  double t, x, p_plus, left_prob, right_prob;
};

struct Snapshot {
  double t;
  RVector prob, prob_plus, prob_minus;
};

struct ScatteringResult {
  double r_plus = 0, t_plus = 0, r_minus = 0, t_minus = 0;
  std::size_t partition_site = 0;
  double collision_time = 0;   // N / (2 Delta kappa)
  double separation_time = 0;  // time at which the coefficients were read off
  double edge_probability = 0; // worst value over the run
  double window_probability = 0;
  double norm_drift = 0;
  double energy_drift = 0;
  std::vector<TimeSample> series;
  std::vector<Snapshot> snapshots;
};

/// Scattering geometry: Hamiltonian, gate span [window_lo, window_hi] and
/// left/right partition, all in sites of the embedded chain.
struct ScatteringSetup {
  OperatorMatrix hamiltonian;
  std::size_t window_lo = 0, window_hi = 0;
  std::size_t partition_site = 0;
};

inline ScatteringSetup scattering_setup(const LatticeSpec& spec, const SplitterMatrix& splitter,
                                        std::size_t center, std::size_t lead_margin = 20) {
  ScatteringSetup s;
  s.hamiltonian = assemble_scattering_hamiltonian(spec, splitter, center, lead_margin);
  const long shift =
      2 * ((static_cast<long>(center) - static_cast<long>(splitter.center_site())) / 2);
  s.window_lo = static_cast<std::size_t>(static_cast<long>(splitter.window_lo) + shift);
  s.window_hi = static_cast<std::size_t>(static_cast<long>(splitter.window_hi) + shift);
  s.partition_site = center;
  return s;
}

inline ScatteringResult scattering_run(const LatticeSpec& spec, const ScatteringSetup& setup,
                                       const Propagator& prop, const WavePacket& psi0,
                                       const BandProjectors& proj, const RunSettings& run) {
  run.validate();
  const auto n = static_cast<Eigen::Index>(spec.n_sites);
  const WavePacketSpec& p = psi0.spec;
  const double wp = std::norm(p.w_plus), wm = std::norm(p.w_minus);

  ScatteringResult res;
  res.partition_site = setup.partition_site;
  res.collision_time = static_cast<double>(spec.n_sites) / (2.0 * spec.hopping * p.kick);

  const CVector c = prop.coefficients(psi0.amplitudes);
  const double e0 = prop.energy(c);
  const double pad = run.window_pad * p.width;
  const auto wlo = static_cast<Eigen::Index>(std::max(0.0, static_cast<double>(setup.window_lo) - pad));
  const auto whi = static_cast<Eigen::Index>(
      std::min(static_cast<double>(n - 1), static_cast<double>(setup.window_hi) + pad));
  const auto part = static_cast<Eigen::Index>(setup.partition_site);
  const auto es = static_cast<Eigen::Index>(run.edge_sites);
  const RVector xdiag = position_diagonal(spec);

  std::vector<double> times;
  if (run.fixed_time) {
    times.push_back(*run.fixed_time);
  } else {
    for (std::size_t i = 1; i <= run.n_outputs; ++i)
      times.push_back(run.t_max * static_cast<double>(i) / static_cast<double>(run.n_outputs));
  }

  bool entered = false;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    const CVector psi = prop.evolve_coefficients(c, t);
    const RVector prob = psi.cwiseAbs2();
    const double edge = prob.head(es).sum() + prob.tail(es).sum();
    res.edge_probability = std::max(res.edge_probability, edge);
    res.norm_drift = std::max(res.norm_drift, std::abs(prob.sum() - 1.0));
    const double win = prob.segment(wlo, whi - wlo + 1).sum();
    if (win > run.enter_threshold) entered = true;

    const bool want_series = run.record_series;
    const bool want_snap = run.snapshot_every > 0 && ti % run.snapshot_every == 0;
    const bool done = run.fixed_time.has_value() || (entered && win < run.exit_threshold);
    CVector a, b;
    if (want_series || want_snap || done) {
      a = proj.p_plus.entries() * psi;
      b = proj.p_minus.entries() * psi;
    }
    if (want_series)
      res.series.push_back({t, prob.dot(xdiag), a.squaredNorm(), prob.head(part).sum(),
                            prob.tail(n - part).sum()});
    if (want_snap) res.snapshots.push_back({t, prob, a.cwiseAbs2(), b.cwiseAbs2()});

    if (edge >= run.edge_tolerance)
      throw Error("dynamics.edge_contamination",
                  "edge probability " + std::to_string(edge) + " at t = " + std::to_string(t) +
                      " exceeds " + std::to_string(run.edge_tolerance));
    if (done) {
      const double ap_l = a.head(part).squaredNorm(), ap_r = a.tail(n - part).squaredNorm();
      const double bm_l = b.head(part).squaredNorm(), bm_r = b.tail(n - part).squaredNorm();
      if (wp > 1e-14) res.r_plus = ap_l / wp, res.t_plus = ap_r / wp;
      if (wm > 1e-14) res.r_minus = bm_l / wm, res.t_minus = bm_r / wm;
      res.separation_time = t;
      res.window_probability = win;
      // <H> read from the evolved coefficients; exact up to rounding.
      res.energy_drift = std::abs(prop.energy(prop.coefficients(psi)) - e0);
      return res;
    }
  }
  throw Error("dynamics.not_separated",
              std::string(entered ? "packet still overlaps the splitter window"
                                  : "packet never reached the splitter window") +
                  " at t_max = " + std::to_string(run.t_max));
}

/// Convenience path: embed the splitter, build the packet and run.
inline ScatteringResult scattering_run(const LatticeSpec& spec, const SplitterMatrix& splitter,
                                       std::size_t center, const WavePacketSpec& pspec,
                                       const BandProjectors& proj, const RunSettings& run) {
  const ScatteringSetup setup = scattering_setup(spec, splitter, center);
  const Propagator prop(setup.hamiltonian);
  return scattering_run(spec, setup, prop, make_packet(spec, pspec, proj), proj, run);
}

/// <X(t)> on a uniform time grid t_i = i dt, i = 0..n_steps.
inline std::vector<double> position_trace(const LatticeSpec& spec, const Propagator& prop,
                                          const WavePacket& psi0, double dt, std::size_t n_steps,
                                          double* worst_edge = nullptr, std::size_t edge_sites = 20) {
  const CVector c = prop.coefficients(psi0.amplitudes);
  const RVector xdiag = position_diagonal(spec);
  const auto n = c.size();
  const auto es = static_cast<Eigen::Index>(edge_sites);
  // Batched: Psi = Q * (phases .* c) for a block of times at once.
  const Eigen::Index block = 64;
  std::vector<double> out(n_steps + 1);
  double edge = 0.0;
  for (std::size_t start = 0; start <= n_steps; start += block) {
    const auto cnt = static_cast<Eigen::Index>(std::min<std::size_t>(block, n_steps + 1 - start));
    CMatrix ph(n, cnt);
    for (Eigen::Index j = 0; j < cnt; ++j) {
      const double t = dt * static_cast<double>(start + static_cast<std::size_t>(j));
      for (Eigen::Index i = 0; i < n; ++i) ph(i, j) = std::polar(1.0, -prop.eigen().values(i) * t) * c(i);
    }
    const CMatrix psi = prop.eigen().vectors * ph;
    for (Eigen::Index j = 0; j < cnt; ++j) {
      const RVector prob = psi.col(j).cwiseAbs2();
      out[start + static_cast<std::size_t>(j)] = prob.dot(xdiag);
      edge = std::max(edge, prob.head(es).sum() + prob.tail(es).sum());
    }
  }
  if (worst_edge) *worst_edge = edge;
  return out;
}

}  // namespace qsplit
