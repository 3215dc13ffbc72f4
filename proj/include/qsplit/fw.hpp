#pragma once

// Lattice Foldy-Wouthuysen transformation.
//
// U_FW = sum_k |k,s><k,s'| (U_k)_{ss'} with U_k from cell_rotation(), where
// |k,s> = M^{-1/2} sum_j e^{2ikj} |2j+s> (s = 0 upper/even, 1 lower/odd).
// Every operator built here is cell-translation invariant, so it is filled
// from an M-periodic 2x2 kernel in O(N^2).

#include <functional>

#include "qsplit/lattice.hpp"

namespace qsplit {

namespace detail {

inline void require_ring(const LatticeSpec& spec) {
  spec.validate();
  require(spec.boundary == Boundary::periodic, "fw.boundary",
          "the FW transformation is exact only on a ring");
}

/// Site matrix A_{2j+a, 2j'+b} = (1/M) sum_l e^{2 i k_l (j - j')} f(k_l)_{ab}.
inline CMatrix cell_circulant(const LatticeSpec& spec,
                              const std::function<Eigen::Matrix2cd(double)>& f) {
  const auto m = static_cast<Eigen::Index>(spec.n_cells());
  const std::vector<double> ks = k_grid(spec);
  std::vector<Eigen::Matrix2cd> fk(ks.size());
  for (std::size_t l = 0; l < ks.size(); ++l) fk[l] = f(ks[l]);

  std::vector<Complex> roots(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r)
    roots[static_cast<std::size_t>(r)] =
        std::polar(1.0, 2.0 * kPi * static_cast<double>(r) / static_cast<double>(m));

  std::vector<Eigen::Matrix2cd> kernel(static_cast<std::size_t>(m));
  for (Eigen::Index d = 0; d < m; ++d) {
    Eigen::Matrix2cd acc = Eigen::Matrix2cd::Zero();
    for (Eigen::Index l = 0; l < m; ++l)
      acc += roots[static_cast<std::size_t>((l * d) % m)] * fk[static_cast<std::size_t>(l)];
    kernel[static_cast<std::size_t>(d)] = acc / static_cast<double>(m);
  }

  CMatrix out(2 * m, 2 * m);
  for (Eigen::Index jp = 0; jp < m; ++jp)
    for (Eigen::Index j = 0; j < m; ++j)
      out.block<2, 2>(2 * j, 2 * jp) = kernel[static_cast<std::size_t>(((j - jp) % m + m) % m)];
  return out;
}

inline CMatrix scalar_circulant(const LatticeSpec& spec, const std::function<double(double)>& f) {
  return cell_circulant(spec, [&](double k) -> Eigen::Matrix2cd {
    return Eigen::Matrix2cd::Identity() * f(k);
  });
}

}  // namespace detail

struct FwOperators {
  LatticeSpec spec;
  OperatorMatrix u_fw;
  OperatorMatrix h_fw;  // U† H U, computed by explicit products
  OperatorMatrix cos_half_theta, sin_half_theta, cos_half_phi, sin_half_phi;
};

inline CMatrix fw_unitary(const LatticeSpec& spec) {
  detail::require_ring(spec);
  return detail::cell_circulant(spec, [&](double k) { return cell_rotation(spec, k); });
}

inline FwOperators build_fw(const LatticeSpec& spec) {
  detail::require_ring(spec);
  FwOperators fw;
  fw.spec = spec;
  CMatrix u = fw_unitary(spec);
  const CMatrix h = build_hamiltonian(spec).entries();
  CMatrix hf = u.adjoint() * h * u;
  hf = 0.5 * (hf + hf.adjoint()).eval();
  fw.h_fw = OperatorMatrix(std::move(hf), true);
  fw.u_fw = OperatorMatrix(std::move(u));
  fw.cos_half_theta = OperatorMatrix(
      detail::scalar_circulant(spec, [&](double k) { return half_angles(spec, k).cos_half; }),
      true);
  fw.sin_half_theta = OperatorMatrix(
      detail::scalar_circulant(spec, [&](double k) { return half_angles(spec, k).sin_half; }),
      true);
  fw.cos_half_phi =
      OperatorMatrix(detail::scalar_circulant(spec, [](double k) { return std::cos(0.5 * k); }));
  fw.sin_half_phi =
      OperatorMatrix(detail::scalar_circulant(spec, [](double k) { return std::sin(0.5 * k); }));
  return fw;
}

/// As build_fw, rejecting on-site lists that are not of the uniform E0 +- mu form.
inline FwOperators build_fw(const LatticeSpec& spec, const std::vector<double>& onsite) {
  const std::vector<double> expected = bipartite_onsite(spec);
  require(onsite.size() == expected.size(), "fw.onsite", "onsite length mismatch");
  for (std::size_t n = 0; n < onsite.size(); ++n)
    require(std::abs(onsite[n] - expected[n]) <= 1e-12 * std::max(1.0, std::abs(expected[n])),
            "fw.non_bipartite",
            "on-site energy at site " + std::to_string(n) +
                " is not of the uniform bipartite form E0 +- mu");
  return build_fw(spec);
}

struct BandProjectors {
  OperatorMatrix p_plus, p_minus;
};

/// Spectral projectors P_s = sum_k |k,s><k,s|.
inline BandProjectors band_projectors(const LatticeSpec& spec) {
  detail::require_ring(spec);
  auto proj = [&](int col) {
    return detail::cell_circulant(spec, [&, col](double k) -> Eigen::Matrix2cd {
      const Eigen::Vector2cd v = cell_rotation(spec, k).col(col);
      return v * v.adjoint();
    });
  };
  return BandProjectors{OperatorMatrix(proj(0), true), OperatorMatrix(proj(1), true)};
}

/// Cross-check form P_s = U_FW (1 + s sigma3)/2 U_FW†.
inline BandProjectors band_projectors(const FwOperators& fw) {
  const CMatrix& u = fw.u_fw.entries();
  const Eigen::Index n = u.rows();
  CMatrix up(n, n / 2), dn(n, n / 2);
  for (Eigen::Index j = 0; j < n / 2; ++j) {
    up.col(j) = u.col(2 * j);
    dn.col(j) = u.col(2 * j + 1);
  }
  CMatrix pp = up * up.adjoint(), pm = dn * dn.adjoint();
  pp = 0.5 * (pp + pp.adjoint()).eval();
  pm = 0.5 * (pm + pm.adjoint()).eval();
  return BandProjectors{OperatorMatrix(std::move(pp), true), OperatorMatrix(std::move(pm), true)};
}

enum class FwDirection { forward, inverse };

/// forward: psi -> U† psi (into the block-diagonal picture); inverse: psi -> U psi.
inline WavePacket apply_fw(const FwOperators& fw, const WavePacket& state, FwDirection dir) {
  require(state.dim() == fw.u_fw.dim(), "fw.dimension_mismatch",
          "state has " + std::to_string(state.dim()) + " sites, transformation " +
              std::to_string(fw.u_fw.dim()));
  WavePacket out = state;
  out.amplitudes = dir == FwDirection::forward ? CVector(fw.u_fw.entries().adjoint() * state.amplitudes)
                                               : CVector(fw.u_fw.entries() * state.amplitudes);
  return out;
}

/// Largest |<even| A |odd>| entry.
inline double off_block_norm(const CMatrix& a) {
  double worst = 0.0;
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = (c + 1) % 2; r < a.rows(); r += 2)
      worst = std::max(worst, std::abs(a(r, c)));
  return worst;
}

}  // namespace qsplit
