#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "qsplit/dynamics.hpp"

namespace qsplit {

enum class DisorderScope { whole_chain, splitter_only, leads_only };

inline std::string to_string(DisorderScope s) {
  switch (s) {
    case DisorderScope::whole_chain: return "whole_chain";
    case DisorderScope::splitter_only: return "splitter_only";
    case DisorderScope::leads_only: return "leads_only";
  }
  return "?";
}

inline DisorderScope disorder_scope_from_string(const std::string& s) {
  if (s == "whole_chain") return DisorderScope::whole_chain;
  if (s == "splitter_only") return DisorderScope::splitter_only;
  if (s == "leads_only") return DisorderScope::leads_only;
  throw Error("disorder.scope", "unknown disorder scope '" + s + "'");
}

struct DisorderConfig {
  double sigma_delta = 0.1;
  std::size_t n_realizations = 50;
  std::uint64_t seed = 0;
  DisorderScope scope = DisorderScope::whole_chain;

  void validate() const {
    require(sigma_delta >= 0.0, "disorder.sigma_delta", "sigma_delta must be non-negative");
    require(n_realizations >= 1, "disorder.n_realizations", "need at least one realization");
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Standard normals from mt19937_64 via Box-Muller.  Both the engine and
/// the transform are fully specified, so streams match across platforms.
class NormalStream {
 public:
  NormalStream(std::uint64_t seed, std::uint64_t stream)
      : eng_(splitmix64(seed ^ splitmix64(stream + 0x632be59bd9b4e019ULL))) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;          // [0, 1)
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

struct SiteWindow {
  std::size_t lo = 0, hi = 0;  // inclusive
  bool contains(std::size_t n) const { return n >= lo && n <= hi; }
};

/// Scales every in-scope nonzero off-diagonal pair (n < n') by (1 - delta),
/// one draw per pair in row-major upper-triangle order.  The window is only
/// consulted for the splitter_only / leads_only scopes.
inline OperatorMatrix perturb_couplings(const OperatorMatrix& h, const DisorderConfig& cfg,
                                        std::uint64_t realization, SiteWindow window = {},
                                        std::vector<double>* factors = nullptr) {
  require(h.hermitian(), "disorder.not_hermitian", "couplings must come from a Hermitian matrix");
  cfg.validate();
  CMatrix out = h.entries();
  if (cfg.sigma_delta == 0.0) return OperatorMatrix(std::move(out), true, h.bandwidth());
  NormalStream rng(cfg.seed, realization);
  const auto n = static_cast<Eigen::Index>(h.dim());
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = r + 1; c < n; ++c) {
      if (out(r, c) == Complex(0.0, 0.0)) continue;
      const bool inside = window.contains(static_cast<std::size_t>(r)) &&
                          window.contains(static_cast<std::size_t>(c));
      const bool in_scope = cfg.scope == DisorderScope::whole_chain ||
                            (cfg.scope == DisorderScope::splitter_only && inside) ||
                            (cfg.scope == DisorderScope::leads_only && !inside);
      if (!in_scope) continue;
      const double f = 1.0 - cfg.sigma_delta * rng.next();
      if (factors) factors->push_back(f);
      out(r, c) *= f;
      out(c, r) = std::conj(out(r, c));
    }
  return OperatorMatrix(std::move(out), true, h.bandwidth());
}

struct DisorderPoint {
  double sigma = 0.0;
  double mean_r_plus = 0, std_r_plus = 0, mean_t_minus = 0, std_t_minus = 0;
  std::size_t n_ok = 0, n_failed = 0;
  std::vector<double> r_plus, t_minus;  // per successful realization, in index order
};

struct DisorderSweepResult {
  ScatteringResult clean;
  std::vector<DisorderPoint> points;
  std::string scope;
};

/// Everything a realization needs: the clean setup and packet.
struct DisorderScenario {
  LatticeSpec lattice;
  ScatteringSetup setup;
  WavePacket packet;
  BandProjectors projectors;
  RunSettings run;
};

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  for (double x : v) sd += (x - mean) * (x - mean);
  sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
}

/// Runs the clean scenario to find its separation time, then evaluates every
/// disordered realization at that same time.  Realizations run on up to
/// `n_threads` workers; results are reduced in realization order.
inline DisorderSweepResult disorder_sweep(const DisorderScenario& sc, const std::vector<double>& sigmas,
                                          const DisorderConfig& cfg, unsigned n_threads = 0) {
  cfg.validate();
  DisorderSweepResult out;
  out.scope = to_string(cfg.scope);
  {
    const Propagator prop(sc.setup.hamiltonian);
    out.clean = scattering_run(sc.lattice, sc.setup, prop, sc.packet, sc.projectors, sc.run);
  }
  RunSettings fixed = sc.run;
  fixed.fixed_time = out.clean.separation_time;
  fixed.record_series = false;
  fixed.snapshot_every = 0;
  const SiteWindow window{sc.setup.window_lo, sc.setup.window_hi};
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());

  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    DisorderConfig c = cfg;
    c.sigma_delta = sigmas[si];
    c.validate();
    struct Slot {
      bool ok = false;
      double r = 0, t = 0;
    };
    std::vector<Slot> slots(cfg.n_realizations);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (std::size_t r; (r = next.fetch_add(1)) < slots.size();) {
        // same stream at every sigma: realization r sees one draw of delta/sigma
        const std::uint64_t stream = r;
        try {
          const ScatteringSetup s{perturb_couplings(sc.setup.hamiltonian, c, stream, window),
                                  sc.setup.window_lo, sc.setup.window_hi, sc.setup.partition_site};
          const Propagator prop(s.hamiltonian);
          const ScatteringResult res = scattering_run(sc.lattice, s, prop, sc.packet, sc.projectors, fixed);
          slots[r] = {true, res.r_plus, res.t_minus};
        } catch (const Error& e) {
          if (e.code() != "dynamics.edge_contamination") throw;
          slots[r] = {false, 0, 0};
        }
      }
    };
    const unsigned nt = static_cast<unsigned>(std::min<std::size_t>(n_threads, slots.size()));
    if (nt <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      std::exception_ptr err;
      std::mutex mu;
      for (unsigned i = 0; i < nt; ++i)
        pool.emplace_back([&]() {
          try {
            worker();
          } catch (...) {
            std::lock_guard<std::mutex> lock(mu);
            if (!err) err = std::current_exception();
          }
        });
      for (auto& t : pool) t.join();
      if (err) std::rethrow_exception(err);
    }
    DisorderPoint p;
    p.sigma = sigmas[si];
    for (const Slot& s : slots) {
      if (!s.ok) {
        ++p.n_failed;
        continue;
      }
      ++p.n_ok;
      p.r_plus.push_back(s.r);
      p.t_minus.push_back(s.t);
    }
    mean_std(p.r_plus, p.mean_r_plus, p.std_r_plus);
    mean_std(p.t_minus, p.mean_t_minus, p.std_t_minus);
    out.points.push_back(std::move(p));
  }
  return out;
}

}  // namespace qsplit
