#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

namespace qsplit {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Library error carrying a stable machine-readable code next to the message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

inline void require(bool ok, const char* code, const std::string& what) {
  if (!ok) throw Error(code, what);
}

/// Quasispin band index: upper (+1) or lower (-1) energy band.
enum class Band : int { lower = -1, upper = +1 };

inline int sign_of(Band b) { return static_cast<int>(b); }
inline Band band_from_sign(int s) { return s >= 0 ? Band::upper : Band::lower; }

inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const CMatrix& m) {
  return max_abs(m - m.adjoint());
}

/// Largest |row - col| among entries with modulus above `tol`.
inline std::size_t compute_bandwidth(const CMatrix& m, double tol = 0.0) {
  std::size_t bw = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      if (std::abs(m(r, c)) > tol)
        bw = std::max<std::size_t>(bw, static_cast<std::size_t>(std::abs(r - c)));
  return bw;
}

/// Dense operator over the site basis.
///
/// The hermitian flag is a checked claim: constructing an OperatorMatrix with
/// `hermitian = true` verifies it against the conjugate transpose at 1e-12
/// (relative to the largest entry).
class OperatorMatrix {
 public:
  OperatorMatrix() = default;

  explicit OperatorMatrix(CMatrix entries, bool hermitian = false,
                          std::optional<std::size_t> bandwidth = std::nullopt)
      : entries_(std::move(entries)), hermitian_(hermitian), bandwidth_(bandwidth) {
    require(entries_.rows() == entries_.cols(), "not_square",
            "operator matrix must be square");
    if (hermitian_) {
      const double scale = std::max(1.0, max_abs(entries_));
      require(hermiticity_defect(entries_) <= 1e-12 * scale, "not_hermitian",
              "matrix flagged hermitian differs from its adjoint");
    }
    if (bandwidth_) {
      require(compute_bandwidth(entries_) <= *bandwidth_, "bandwidth_violation",
              "nonzero entry outside declared bandwidth");
    }
  }

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const CMatrix& entries() const { return entries_; }
  bool hermitian() const { return hermitian_; }
  std::optional<std::size_t> bandwidth() const { return bandwidth_; }

  Complex operator()(std::size_t r, std::size_t c) const {
    return entries_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

 private:
  CMatrix entries_;
  bool hermitian_ = false;
  std::optional<std::size_t> bandwidth_;
};

/// Plain-text dense dump: header line "dim", then one row per line of
/// "re im" pairs separated by spaces.
inline void write_dense(std::ostream& os, const CMatrix& m) {
  os.precision(17);
  os << m.rows() << '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) os << ' ';
      os << m(r, c).real() << ' ' << m(r, c).imag();
    }
    os << '\n';
  }
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
struct HermitianEigen {
  RVector values;
  CMatrix vectors;  // columns are orthonormal eigenvectors
};

/// Dense Hermitian eigendecomposition (LAPACK zheevd, divide and conquer).
inline HermitianEigen hermitian_eigen(const CMatrix& h) {
  require(h.rows() == h.cols(), "not_square", "eigensolver needs a square matrix");
  const auto n = static_cast<lapack_int>(h.rows());
  HermitianEigen out;
  out.vectors = h;
  out.values.resize(n);
  if (n == 0) return out;
  const lapack_int info = LAPACKE_zheevd(
      LAPACK_COL_MAJOR, 'V', 'U', n,
      reinterpret_cast<lapack_complex_double*>(out.vectors.data()), n,
      out.values.data());
  require(info == 0, "eigensolver_failed",
          "zheevd failed with info=" + std::to_string(info));
  return out;
}

inline RVector hermitian_eigenvalues(const CMatrix& h) {
  require(h.rows() == h.cols(), "not_square", "eigensolver needs a square matrix");
  const auto n = static_cast<lapack_int>(h.rows());
  CMatrix work = h;
  RVector w(n);
  if (n == 0) return w;
  const lapack_int info = LAPACKE_zheevd(
      LAPACK_COL_MAJOR, 'N', 'U', n,
      reinterpret_cast<lapack_complex_double*>(work.data()), n, w.data());
  require(info == 0, "eigensolver_failed",
          "zheevd failed with info=" + std::to_string(info));
  return w;
}

/// Gaussian packet parameters.  The band weights are the amplitudes of the
/// upper (w_plus) and lower (w_minus) band components.
struct WavePacketSpec {
  double width = 40.0;  // lambda, in sites
  double kick = 0.5;    // kappa
  Complex w_plus{1.0 / 1.4142135623730951, 0.0};
  Complex w_minus{1.0 / 1.4142135623730951, 0.0};
  double center = 300.0;  // site index

  void validate() const {
    require(kick > 0.0 && kick < kPi, "packet.kick", "kick must lie in (0, pi)");
    require(width >= 2.0, "packet.width", "width must be at least 2 sites");
    const double norm = std::norm(w_plus) + std::norm(w_minus);
    require(std::abs(norm - 1.0) < 1e-10, "packet.band_weights",
            "band weights must satisfy |w+|^2 + |w-|^2 = 1");
  }
};

struct WavePacket {
  CVector amplitudes;
  double time = 0.0;
  WavePacketSpec spec;

  std::size_t dim() const { return static_cast<std::size_t>(amplitudes.size()); }
  double norm() const { return amplitudes.norm(); }
};

inline std::vector<double> sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

inline std::vector<double> to_std(const RVector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace qsplit
