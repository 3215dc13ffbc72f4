#pragma once

#include <unsupported/Eigen/FFT>

#include "qsplit/dynamics.hpp"

namespace qsplit {

struct ZittTrace {
  std::vector<double> times;
  std::vector<double> x_zitt;
  double ballistic_slope = 0.0;
  double ballistic_intercept = 0.0;
};

struct LineFit {
  double slope = 0.0, intercept = 0.0, rms_residual = 0.0;
};

inline LineFit least_squares_line(const std::vector<double>& x, const std::vector<double>& y) {
  require(x.size() == y.size() && x.size() >= 2, "fit.size", "need at least two points");
  Eigen::MatrixXd a(static_cast<Eigen::Index>(x.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    a(static_cast<Eigen::Index>(i), 0) = x[i];
    a(static_cast<Eigen::Index>(i), 1) = 1.0;
    b(static_cast<Eigen::Index>(i)) = y[i];
  }
  const Eigen::Vector2d coef = a.colPivHouseholderQr().solve(b);
  LineFit f{coef(0), coef(1), 0.0};
  f.rms_residual = std::sqrt((a * coef - b).squaredNorm() / static_cast<double>(x.size()));
  return f;
}

/// Subtracts the least-squares line over the whole window.
inline ZittTrace extract_zitt(const std::vector<double>& times, const std::vector<double>& x) {
  require(times.size() == x.size(), "zitt.size", "times and positions differ in length");
  require(times.size() >= 200, "zitt.trace_too_short",
          "need at least 200 samples, got " + std::to_string(times.size()));
  for (std::size_t i = 1; i < times.size(); ++i)
    require(times[i] > times[i - 1], "zitt.times", "times must be strictly increasing");
  require(times.back() - times.front() >= 50.0, "zitt.trace_too_short",
          "trace must span at least 50 time units");
  const LineFit f = least_squares_line(times, x);
  ZittTrace z;
  z.times = times;
  z.ballistic_slope = f.slope;
  z.ballistic_intercept = f.intercept;
  z.x_zitt.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) z.x_zitt[i] = x[i] - (f.slope * times[i] + f.intercept);
  return z;
}

struct SpectralPeak {
  double omega = 0.0;
  double magnitude = 0.0;  // relative to the largest peak
};

struct ZittFit {
  double envelope_exponent = 0.0;
  double amplitude_a = 0.0;  // envelope prefactor: |x_zitt| ~ A t^{exponent}
  double amplitude_b = 0.0;  // spectral weight ratio of the 2 omega_1 line to the 2 omega_2 line
  std::vector<double> frequencies;
  std::vector<SpectralPeak> peaks;
  double fit_residual = 0.0;
  std::size_t n_maxima = 0;
  double bin_width = 0.0;
  std::vector<double> maxima_t, maxima_amp;
};

inline double window_start(const ZittTrace& zt, double late_fraction) {
  const double t0 = zt.times.front(), t1 = zt.times.back();
  return std::max(t0 + late_fraction * (t1 - t0), 10.0);
}

/// Log-log line through the local maxima of |x_zitt| in the late window.
inline ZittFit fit_envelope(const ZittTrace& zt, double late_fraction = 0.08) {
  const double ts = window_start(zt, late_fraction);
  ZittFit fit;
  std::vector<double> lt, la;
  for (std::size_t i = 1; i + 1 < zt.x_zitt.size(); ++i) {
    const double a = std::abs(zt.x_zitt[i]);
    if (zt.times[i] <= ts || a <= std::abs(zt.x_zitt[i - 1]) || a <= std::abs(zt.x_zitt[i + 1]))
      continue;
    fit.maxima_t.push_back(zt.times[i]);
    fit.maxima_amp.push_back(a);
    lt.push_back(std::log(zt.times[i]));
    la.push_back(std::log(a));
  }
  fit.n_maxima = lt.size();
  require(lt.size() >= 5, "zitt.too_few_maxima",
          "only " + std::to_string(lt.size()) + " local maxima in the fit window");
  const LineFit f = least_squares_line(lt, la);
  fit.envelope_exponent = f.slope;
  fit.amplitude_a = std::exp(f.intercept);
  fit.fit_residual = f.rms_residual;
  return fit;
}

/// Peaks of the Hann-windowed spectrum of x_zitt sqrt(t) over the late window.
/// Peaks below `min_relative` of the strongest one are dropped, as are the two
/// bins next to DC (Hann main lobe of the residual trend).
inline std::vector<SpectralPeak> zitt_spectrum_peaks(const ZittTrace& zt, double late_fraction,
                                                     double min_relative, double* bin_width) {
  const double ts = window_start(zt, late_fraction);
  std::vector<double> y;
  std::vector<double> tt;
  for (std::size_t i = 0; i < zt.times.size(); ++i)
    if (zt.times[i] > ts) {
      y.push_back(zt.x_zitt[i] * std::sqrt(zt.times[i]));
      tt.push_back(zt.times[i]);
    }
  require(y.size() >= 16, "zitt.trace_too_short", "late window holds too few samples");
  const double dt = tt[1] - tt[0];
  for (std::size_t i = 2; i < tt.size(); ++i)
    require(std::abs(tt[i] - tt[i - 1] - dt) < 1e-9 * std::max(1.0, dt), "zitt.non_uniform",
            "spectral analysis needs uniform sampling");
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  const std::size_t m = y.size();
  for (std::size_t i = 0; i < m; ++i)
    y[i] = (y[i] - mean) * (0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / (m - 1)));

  Eigen::FFT<double> fft;
  std::vector<Complex> spec;
  fft.fwd(spec, y);
  const std::size_t half = m / 2 + 1;
  std::vector<double> mag(half);
  for (std::size_t i = 0; i < half; ++i) mag[i] = std::abs(spec[i]);
  const double dw = 2.0 * kPi / (static_cast<double>(m) * dt);
  if (bin_width) *bin_width = dw;

  std::vector<SpectralPeak> peaks;
  double top = 0.0;
  for (std::size_t i = 2; i + 1 < half; ++i)
    if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1]) {
      peaks.push_back({dw * static_cast<double>(i), mag[i]});
      top = std::max(top, mag[i]);
    }
  std::vector<SpectralPeak> kept;
  for (auto& p : peaks)
    if (p.magnitude >= min_relative * top) kept.push_back({p.omega, p.magnitude / top});
  std::sort(kept.begin(), kept.end(),
            [](const SpectralPeak& a, const SpectralPeak& b) { return a.magnitude > b.magnitude; });
  return kept;
}

/// Predicted Zitterbewegung lines 2 omega_1 = 2 mu and 2 omega_2 = 2 sqrt(4 Delta^2 + mu^2).
inline std::vector<double> predicted_zitt_frequencies(const LatticeSpec& spec) {
  std::vector<double> f;
  if (spec.mass > 0.0) f.push_back(2.0 * spec.mass);
  f.push_back(2.0 * std::sqrt(4.0 * spec.hopping * spec.hopping + spec.mass * spec.mass));
  return f;
}

/// Stationary points of E_{k,s} on [0, pi]: k = 0, pi/2, pi.
inline std::vector<double> band_stationary_points() { return {0.0, 0.5 * kPi, kPi}; }

inline ZittFit identify_frequencies(const ZittTrace& zt, const LatticeSpec& spec,
                                    double late_fraction = 0.08, double min_relative = 0.01) {
  const double dt = zt.times[1] - zt.times[0];
  const double nyquist = kPi / dt;
  const std::vector<double> pred = predicted_zitt_frequencies(spec);
  require(pred.back() < nyquist, "zitt.aliasing",
          "2 omega_2 = " + std::to_string(pred.back()) + " lies above the Nyquist frequency " +
              std::to_string(nyquist));
  ZittFit fit;
  fit.peaks = zitt_spectrum_peaks(zt, late_fraction, min_relative, &fit.bin_width);
  for (const auto& p : fit.peaks) fit.frequencies.push_back(p.omega);
  // relative weight of the low line (2 mu) against the high one
  auto weight_near = [&](double w) {
    double best = 0.0;
    for (const auto& p : fit.peaks)
      if (std::abs(p.omega - w) <= fit.bin_width + 0.02 * w) best = std::max(best, p.magnitude);
    return best;
  };
  if (pred.size() == 2 && weight_near(pred[1]) > 0.0)
    fit.amplitude_b = weight_near(pred[0]) / weight_near(pred[1]);
  return fit;
}

/// True when some reported peak lies within one bin plus 2% of `omega`.
inline bool has_peak_near(const ZittFit& fit, double omega) {
  for (const auto& p : fit.peaks)
    if (std::abs(p.omega - omega) <= fit.bin_width + 0.02 * omega) return true;
  return false;
}

/// Interband part of <X(t)> on a ring, by quadrature over the k-grid:
///   x_inter(t) = 2 Re sum_k a+*(k) a-(k) e^{2 i E_k t} A_{+-}(k),
/// a_s(k) = <k,s|psi0>, A_{+-} = <u+| i d/dq u-> with cell momentum q = 2k.
inline std::vector<double> interband_position(const LatticeSpec& spec, const CVector& psi0,
                                              const std::vector<double>& times) {
  LatticeSpec ring = spec;
  ring.boundary = Boundary::periodic;
  require(static_cast<std::size_t>(psi0.size()) == spec.n_sites, "zitt.dimension",
          "state/lattice size mismatch");
  const auto m = static_cast<Eigen::Index>(ring.n_cells());
  std::vector<double> ks = k_grid(ring);
  std::vector<Complex> weight(ks.size());
  std::vector<double> freq(ks.size());
  for (std::size_t l = 0; l < ks.size(); ++l) {
    const double k = ks[l];
    const Eigen::Matrix2cd u = cell_rotation(ring, k);
    Complex ap = 0.0, am = 0.0;
    for (Eigen::Index j = 0; j < m; ++j) {
      const Complex ph = std::polar(1.0, -2.0 * k * static_cast<double>(j));
      ap += ph * (std::conj(u(0, 0)) * psi0(2 * j) + std::conj(u(1, 0)) * psi0(2 * j + 1));
      am += ph * (std::conj(u(0, 1)) * psi0(2 * j) + std::conj(u(1, 1)) * psi0(2 * j + 1));
    }
    const double norm = 1.0 / static_cast<double>(m);
    const double e = band_gap_half(ring, k);
    const double d = ring.hopping;
    // A_{+-} = (a/4) (-sin(theta) - i dtheta/dk)
    const Complex conn = 0.25 * ring.lattice_constant *
                         Complex(-2.0 * d * std::cos(k) / e, 2.0 * d * ring.mass * std::sin(k) / (e * e));
    weight[l] = std::conj(ap) * am * norm * conn;
    freq[l] = 2.0 * e;
  }
  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    Complex acc = 0.0;
    for (std::size_t l = 0; l < ks.size(); ++l) acc += weight[l] * std::polar(1.0, freq[l] * times[i]);
    out[i] = 2.0 * acc.real();
  }
  return out;
}

/// The bracket i[u+ (u-)^* - u- (u+)^*] for one band; identically zero.
inline double diagonal_interband_bracket(const BlochBand& b) {
  const Complex v = kI * (b.u_plus * std::conj(b.u_minus) - b.u_minus * std::conj(b.u_plus));
  return std::abs(v);
}

}  // namespace qsplit
