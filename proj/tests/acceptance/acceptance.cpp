// Acceptance gate: one PASS/FAIL line per criterion, followed by the measured
// values.  `--only N` runs a single criterion.

#include <chrono>
#include <cstring>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles.hpp"

using namespace qsplit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    detail << "    " << (ok ? "[ok]  " : "[red] ") << what << "\n";
  }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

LatticeSpec ring(std::size_t n, double delta, double mu, double e0 = 0.0) {
  return LatticeSpec{n, delta, mu, e0, 1.0, Boundary::periodic};
}

ScenarioConfig baseline() { return load_config(std::nullopt, {}, Purpose::scatter); }

// ---------------------------------------------------------------------------

void criterion_1(Verdict& v) {
  const auto t0 = Clock::now();
  double rec_err = 0.0, cliff_err = 0.0;
  for (std::size_t n : {8u, 64u, 256u}) {
    // the Dirac operators carry no parameters; build them once per size
    const DiracOperators d = build_dirac_operators(ring(n, 1.0, 0.0));
    const auto dim = static_cast<Eigen::Index>(n);
    const CMatrix id = CMatrix::Identity(dim, dim);
    const CMatrix& a1 = d.alpha1.entries();
    const CMatrix& a2 = d.alpha2.entries();
    const CMatrix& b = d.beta.entries();
    const CMatrix kinetic = a1 * d.pi1.entries() + a2 * d.pi2.entries();
    for (const CMatrix* x : {&a1, &a2, &b}) cliff_err = std::max(cliff_err, max_abs(*x * *x - id));
    cliff_err = std::max(cliff_err, max_abs(a1 * a2 + a2 * a1));
    cliff_err = std::max(cliff_err, max_abs(a1 * b + b * a1));
    cliff_err = std::max(cliff_err, max_abs(a2 * b + b * a2));
    for (double delta : {0.5, 1.0, 2.0})
      for (double mu : {0.0, 0.2, 1.0, 3.0}) {
        const double e0 = 0.3;
        const LatticeSpec s = ring(n, delta, mu, e0);
        const CMatrix rec = delta * kinetic + mu * b + e0 * id;
        rec_err = std::max(rec_err, max_abs(build_hamiltonian(s).entries() - rec));
        rec_err = std::max(rec_err, max_abs(oracle::ring_hamiltonian(n, delta, mu, e0) - rec));
      }
  }
  const double t = seconds_since(t0);
  v.require(rec_err < 1e-12, "max |H - (Delta alpha.Pi + mu beta + E0)| = " + num(rec_err) + " < 1e-12");
  v.require(cliff_err < 1e-12, "max Clifford defect = " + num(cliff_err) + " < 1e-12");
  v.require(t < 1.0, "runtime " + num(t) + " s < 1 s");
}

void criterion_2(Verdict& v) {
  const auto t0 = Clock::now();
  const LatticeSpec s = ring(200, 1.0, 0.2);
  std::vector<double> analytic;
  for (double k : k_grid(s))
    for (Band b : {Band::lower, Band::upper}) analytic.push_back(dispersion(s, k, b));
  const double err =
      oracle::spectrum_distance(analytic, oracle::eigen_eigenvalues(build_hamiltonian(s).entries()));
  const double t = seconds_since(t0);
  v.require(err < 1e-10, "max |E_analytic - E_dense| (N = 200) = " + num(err) + " < 1e-10");
  v.require(t < 1.0, "runtime " + num(t) + " s < 1 s");
}

void criterion_3(Verdict& v) {
  const auto t0 = Clock::now();
  const LatticeSpec s = ring(512, 1.0, 0.2);
  const FwOperators fw = build_fw(s);
  const CMatrix& u = fw.u_fw.entries();
  const CMatrix id = CMatrix::Identity(512, 512);
  const double unit = max_abs(u.adjoint() * u - id);
  const double off = off_block_norm(fw.h_fw.entries());
  const BandProjectors p = band_projectors(s);
  const CMatrix h = build_hamiltonian(s).entries();
  const CMatrix& pp = p.p_plus.entries();
  const CMatrix& pm = p.p_minus.entries();
  double proj = 0.0;
  proj = std::max(proj, max_abs(pp * pp - pp));
  proj = std::max(proj, max_abs(pm * pm - pm));
  proj = std::max(proj, max_abs(pp + pm - id));
  proj = std::max(proj, max_abs(pp * pm));
  proj = std::max(proj, max_abs(pp * h - h * pp));
  proj = std::max(proj, max_abs(pm * h - h * pm));
  const double t = seconds_since(t0);
  v.require(unit < 1e-12, "max |U†U - 1| = " + num(unit) + " < 1e-12");
  v.require(off < 1e-10, "max off-block |U†HU| = " + num(off) + " < 1e-10");
  v.require(proj < 1e-10, "projector algebra defect = " + num(proj) + " < 1e-10");
  v.require(t < 5.0, "runtime " + num(t) + " s < 5 s (N = 512)");
}

void criterion_4(Verdict& v) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (double mu : {0.2, 1.0}) {
    const LatticeSpec s = ring(128, 1.0, mu);
    for (std::size_t rho : {1u, 4u, 10u})
      for (GateVariant var : {GateVariant::one_sided, GateVariant::symmetric}) {
        FwGateProfile g = FwGateProfile::uniform(20, rho, 2.0);
        for (std::size_t c = 0; c < rho; ++c) g.values[c] *= 1.0 + 0.05 * static_cast<double>(c);
        const CMatrix ref = oracle::splitter_by_matrix_product(s.n_sites, s.hopping, s.mass, g.first_cell,
                                                               g.values, var == GateVariant::symmetric);
        worst = std::max(worst, max_abs(potential_blocks(g, s, var).v.entries() - ref));
      }
  }
  const double t = seconds_since(t0);
  v.require(worst < 1e-8, "max |V_series - U_FW G U_FW†| (rho = 1, 4, 10; both variants) = " + num(worst) +
                              " < 1e-8");
  v.require(t < 10.0, "runtime " + num(t) + " s < 10 s");
}

void criterion_5(Verdict& v) {
  double heavy = 0.0, light = 0.0;
  int light_worst_n = 0;
  for (int n = -5; n <= 5; ++n)
    for (int sp : {1, -1}) {
      // s = - has a vanishing leading term; its error is measured on the s = + scale
      const double scale = std::abs(i_integral_heavy_limit(n, 1, sp));
      for (int s : {1, -1}) {
        const double q = i_integral(n, s, sp, 100.0, 1.0).value.real();
        heavy = std::max(heavy, std::abs(q - i_integral_heavy_limit(n, s, sp)) / scale);
        const double ql = i_integral(n, s, sp, 0.01, 1.0).value.real();
        const double lim = i_integral_light_limit(n, sp);
        const double e = std::abs(ql - lim) / std::abs(lim);
        if (e > light) light = e, light_worst_n = n;
      }
    }
  const double exact = std::abs(i_integral(0, 1, 1, 0.0, 1.0).value - Complex(4.0, 0.0));
  v.require(heavy < 0.03, "heavy mass mu/Delta = 100: max relative error " + num(heavy) + " < 3%");
  v.require(light < 0.03, "light mass mu/Delta = 0.01: max relative error " + num(light) + " (n = " +
                              std::to_string(light_worst_n) + ") < 3%");
  v.require(exact < 1e-9, "|I(0, +, +; mu = 0) - 4| = " + num(exact) + " < 1e-9");
}

void criterion_6(Verdict& v) {
  const ScenarioConfig c = load_config(std::nullopt, {}, Purpose::zitt);
  for (double mu : {0.25, 0.5, 1.0}) {
    const auto t0 = Clock::now();
    const ZittRun r = zitt_run(c.lattice, c.zitt, mu);
    LatticeSpec s = c.lattice;
    s.mass = mu;
    const std::vector<double> pred = predicted_zitt_frequencies(s);
    v.require(std::abs(r.envelope.envelope_exponent + 0.5) <= 0.1,
              "mu = " + num(mu) + ": envelope exponent " + num(r.envelope.envelope_exponent) + " in -0.5 +- 0.1");
    for (double w : pred) {
      double nearest = 0.0;
      for (double f : r.spectrum.frequencies)
        if (nearest == 0.0 || std::abs(f - w) < std::abs(nearest - w)) nearest = f;
      v.require(has_peak_near(r.spectrum, w), "mu = " + num(mu) + ": line at " + num(w) + ", nearest peak " +
                                                  num(nearest) + " (bin " + num(r.spectrum.bin_width) + ")");
    }
    v.detail << "    mu = " << mu << ": runtime " << num(seconds_since(t0)) << " s, edge probability "
             << num(r.worst_edge) << "\n";
  }
}

void criterion_7(Verdict& v) {
  const auto t0 = Clock::now();
  const ScenarioConfig c = baseline();
  const LatticeSpec ring_spec = detail::ring_of(c.lattice);
  const BandProjectors proj = band_projectors(ring_spec);
  const SplitterMatrix sp = synthesize_splitter(c.lattice, c.splitter.settings, c.splitter.center);
  const ScatteringResult r = scattering_run(c.lattice, sp, c.splitter.center, c.packet, proj, c.run);
  v.require(r.t_plus <= 0.02, "T+ = " + num(r.t_plus) + " <= 0.02");
  v.require(r.t_minus >= 0.99, "T- = " + num(r.t_minus) + " >= 0.99");
  v.detail << "    R+ = " << num(r.r_plus) << ", R- = " << num(r.r_minus) << ", t_sep = " << r.separation_time
           << ", edge = " << num(r.edge_probability) << ", runtime " << num(seconds_since(t0)) << " s\n";
}

void criterion_8(Verdict& v) {
  const auto t0 = Clock::now();
  const ScenarioConfig c = load_config(std::filesystem::path(QSPLIT_CONFIG_DIR) / "geometric.json", {},
                                       Purpose::scatter);
  const BandProjectors proj = band_projectors(detail::ring_of(c.lattice));
  const SplitterMatrix sp = synthesize_splitter(c.lattice, c.splitter.settings, c.splitter.center);
  const ScatteringResult r = scattering_run(c.lattice, sp, c.splitter.center, c.packet, proj, c.run);
  v.require(sp.mode == SplitterMode::geometric && sp.range == 10 && sp.neighbor_order == 2,
            "geometric splitter, rho = 10, order 2 (V0 = " + num(c.splitter.settings.v0) + ")");
  v.require(std::abs(r.r_plus - 0.679) <= 0.10, "R+ = " + num(r.r_plus) + " in 0.679 +- 0.10");
  v.require(std::abs(r.t_minus - 0.926) <= 0.10, "T- = " + num(r.t_minus) + " in 0.926 +- 0.10");
  v.detail << "    T+ = " << num(r.t_plus) << ", R- = " << num(r.r_minus) << ", t_sep = " << r.separation_time
           << ", runtime " << num(seconds_since(t0)) << " s\n";
}

void criterion_9(Verdict& v) {
  const ScenarioConfig c = baseline();
  const BandProjectors proj = band_projectors(detail::ring_of(c.lattice));
  {
    // one Hamiltonian, several kicks; slow packets dwell longer in the gate, whose 1/d tail
    // reaches the chain ends, so this limb runs on the baseline padded by 200 sites per side
    ScenarioConfig w = c;
    w.lattice.n_sites += 400;
    w.splitter.center += 200;
    w.packet.center += 200;
    const BandProjectors wproj = band_projectors(detail::ring_of(w.lattice));
    const SplitterMatrix sp = synthesize_splitter(w.lattice, w.splitter.settings, w.splitter.center);
    const ScatteringSetup setup = scattering_setup(w.lattice, sp, w.splitter.center, w.splitter.lead_margin);
    const Propagator prop(setup.hamiltonian);
    std::vector<double> rp, tm;
    for (double kappa : {0.3, 0.6, 0.9, 1.2}) {
      WavePacketSpec p = w.packet;
      p.kick = kappa;
      RunSettings run = w.run;
      run.t_max = std::max(run.t_max, static_cast<double>(w.lattice.n_sites) / (w.lattice.hopping * kappa));
      const ScatteringResult r =
          scattering_run(w.lattice, setup, prop, make_packet(w.lattice, p, wproj), wproj, run);
      rp.push_back(r.r_plus);
      tm.push_back(r.t_minus);
      v.detail << "    kappa = " << kappa << ": R+ = " << num(r.r_plus) << ", T- = " << num(r.t_minus)
               << ", edge = " << num(r.edge_probability) << "\n";
    }
    auto spread = [](const std::vector<double>& x) {
      const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
      double m, s;
      mean_std(x, m, s);
      return (*hi - *lo) / m;
    };
    v.require(spread(rp) < 0.05, "R+ variation over kappa in [0.3, 1.2]: " + num(spread(rp)) + " < 5%");
    v.require(spread(tm) < 0.05, "T- variation over kappa in [0.3, 1.2]: " + num(spread(tm)) + " < 5%");
  }
  double r_big = 0, t_big = 0, r_small = 0, t_small = 0;
  for (std::size_t rho : {60u, 20u, 8u, 4u, 2u, 1u}) {
    SplitterSettings st = c.splitter.settings;
    st.rho = rho;
    const SplitterMatrix sp = synthesize_splitter(c.lattice, st, c.splitter.center);
    const ScatteringResult r = scattering_run(c.lattice, sp, c.splitter.center, c.packet, proj, c.run);
    v.detail << "    rho = " << rho << ": R+ = " << num(r.r_plus) << ", T- = " << num(r.t_minus) << "\n";
    if (rho == 60) r_big = r.r_plus, t_big = r.t_minus;
    if (rho == 1) r_small = r.r_plus, t_small = r.t_minus;
  }
  v.require(r_small < 0.1 * r_big, "R+ -> 0 as rho -> 0: R+(1) / R+(60) = " + num(r_small / r_big) + " < 0.1");
  v.require(t_small < 0.1 * t_big, "T- -> 0 as rho -> 0: T-(1) / T-(60) = " + num(t_small / t_big) + " < 0.1");
}

void criterion_10(Verdict& v) {
  const auto t0 = Clock::now();
  const ScenarioConfig c = baseline();
  const DisorderScenario sc = disorder_scenario(c);
  DisorderConfig cfg;
  cfg.seed = 20260101;
  cfg.n_realizations = 50;
  const DisorderSweepResult main = disorder_sweep(sc, {0.1}, cfg);
  const DisorderPoint& p = main.points[0];
  const double r0 = main.clean.r_plus, t0c = main.clean.t_minus;
  v.detail << "    clean: R+ = " << num(r0) << ", T- = " << num(t0c) << "\n";
  v.detail << "    sigma = 0.1: mean R+ = " << num(p.mean_r_plus) << " +- " << num(p.std_r_plus) << ", mean T- = "
           << num(p.mean_t_minus) << " +- " << num(p.std_t_minus) << ", n_ok = " << p.n_ok
           << ", excluded = " << p.n_failed << "\n";
  v.require(p.n_ok == 50, "all 50 realizations usable (" + std::to_string(p.n_ok) + ")");
  v.require(std::abs(p.mean_r_plus - r0) <= 0.1 * r0,
            "mean R+ within 10% of clean: " + num(std::abs(p.mean_r_plus - r0) / r0));
  v.require(std::abs(p.mean_t_minus - t0c) <= 0.1 * t0c,
            "mean T- within 10% of clean: " + num(std::abs(p.mean_t_minus - t0c) / t0c));

  DisorderConfig strong = cfg;
  strong.n_realizations = 20;
  const DisorderSweepResult s = disorder_sweep(sc, {0.5, 1.0}, strong);
  const double eta0 = r0 * t0c;
  for (const auto& q : s.points) {
    const double eta = q.mean_r_plus * q.mean_t_minus;
    v.require(q.n_ok > 0 && eta < 0.5 * eta0, "sigma = " + num(q.sigma) + ": efficiency R+ T- = " + num(eta) +
                                    " < half the clean " + num(eta0) + " (mean R+ " + num(q.mean_r_plus) +
                                    ", mean T- " + num(q.mean_t_minus) + ", n = " + std::to_string(q.n_ok) + ")");
  }

  DisorderConfig again = cfg;
  again.n_realizations = 3;
  const DisorderSweepResult rep = disorder_sweep(sc, {0.1}, again);
  bool same = rep.clean.r_plus == main.clean.r_plus && rep.points[0].n_ok == 3 && p.n_ok >= 3;
  for (std::size_t i = 0; same && i < 3; ++i)
    same = rep.points[0].r_plus[i] == p.r_plus[i] && rep.points[0].t_minus[i] == p.t_minus[i];
  v.require(same, "fixed seed reproduces realizations 0..2 bit for bit");

  // not part of the verdict: the same sigma restricted to the splitter bonds, and the
  // default scope with the edge check lifted to show what the excluded runs looked like
  DisorderConfig inner = cfg;
  inner.scope = DisorderScope::splitter_only;
  inner.n_realizations = 20;
  const DisorderPoint q = disorder_sweep(sc, {0.1}, inner).points[0];
  v.detail << "    [info] splitter_only, sigma = 0.1, n = " << q.n_ok << ": mean R+ = " << num(q.mean_r_plus)
           << " +- " << num(q.std_r_plus) << ", mean T- = " << num(q.mean_t_minus) << " +- " << num(q.std_t_minus)
           << "\n";
  DisorderScenario loose = sc;
  loose.run.edge_tolerance = 1.0;
  DisorderConfig few = cfg;
  few.n_realizations = 10;
  const DisorderPoint w = disorder_sweep(loose, {0.1}, few).points[0];
  v.detail << "    [info] " << to_string(cfg.scope) << " without edge check, sigma = 0.1, n = " << w.n_ok
           << ": mean R+ = " << num(w.mean_r_plus) << ", mean T- = " << num(w.mean_t_minus) << "\n";
  v.detail << "    runtime " << num(seconds_since(t0)) << " s\n";
}

void criterion_11(Verdict& v) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-2.0, 2.0);
  double inv = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double e0 = ud(rng), d = 0.05 + std::abs(ud(rng));
    const TriangleBlock plus{e0, d, +1}, minus{e0, d, -1};
    const auto sp = triangle_spectrum(plus);
    std::vector<double> reflected;
    for (double e : sp) reflected.push_back(2.0 * e0 - e);
    const std::vector<double> sm = oracle::eigen_eigenvalues(minus.matrix().cast<Complex>());
    inv = std::max(inv, oracle::spectrum_distance(sm, reflected));
  }
  v.require(inv < 1e-12, "max |spec(H-) - (2 E0 - spec(H+))| = " + num(inv) + " < 1e-12");

  std::size_t good = 0;
  for (int i = 0; i < 100; ++i) {
    const HexamerCouplings c{ud(rng), ud(rng), ud(rng)};
    good += hexamer_levels(c, 1e-9).pattern_ok();
  }
  v.require(good == 100, "two doublets + two singlets in " + std::to_string(good) + " / 100 random draws");

  double gauge = 0.0;
  std::uniform_real_distribution<double> uph(-kPi, kPi);
  for (int i = 0; i < 50; ++i) {
    const Eigen::Index n = 4 + i % 9;
    CMatrix h = CMatrix::Zero(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      h(r, r) = ud(rng);
      for (Eigen::Index c = r + 1; c < n; ++c) {
        const double mag = c == r + 1 ? 0.1 + std::abs(ud(rng)) : (c - r <= 3 ? ud(rng) : 0.0);
        h(r, c) = std::polar(mag, uph(rng));
        h(c, r) = std::conj(h(r, c));
      }
    }
    const SignGauge g = sign_gauge(OperatorMatrix(h, true));
    gauge = std::max(gauge, oracle::spectrum_distance(oracle::eigen_eigenvalues(h),
                                                      oracle::eigen_eigenvalues(g.h_gauged.entries())));
    const CMatrix& u = g.u_sign.entries();
    gauge = std::max(gauge, max_abs(u * h * u.adjoint() - g.h_gauged.entries()));
  }
  v.require(gauge < 1e-12, "sign-gauge spectral invariance defect = " + num(gauge) + " < 1e-12");
  const double t = seconds_since(t0);
  v.require(t < 1.0, "runtime " + num(t) + " s < 1 s");
}

using Criterion = void (*)(Verdict&);
const Criterion kCriteria[] = {criterion_1, criterion_2, criterion_3, criterion_4,  criterion_5, criterion_6,
                               criterion_7, criterion_8, criterion_9, criterion_10, criterion_11};
const char* kNames[] = {"Dirac reconstruction and Clifford relations",
                        "analytic vs dense spectrum",
                        "FW unitarity, block diagonalization, projectors",
                        "series splitter vs matrix-product oracle",
                        "I-integral asymptotics",
                        "Zitterbewegung envelope and lines",
                        "full splitter efficiency",
                        "geometric splitter",
                        "capacity plateaus",
                        "disorder robustness",
                        "level inversion, hexamer pattern, sign gauge"};

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) only = std::atoi(argv[++i]);
  int failed = 0;
  for (int i = 1; i <= 11; ++i) {
    if (only && i != only) continue;
    Verdict v;
    try {
      kCriteria[i - 1](v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "    [red] exception: " << e.what() << "\n";
    }
    std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i << ": " << kNames[i - 1] << "\n"
              << v.detail.str() << std::flush;
    failed += !v.pass;
  }
  return failed ? 1 : 0;
}
