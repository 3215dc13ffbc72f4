#pragma once

// Scenario configuration (JSON, versioned) and the run drivers behind each
// CLI subcommand.  Every driver writes into one output directory and
// returns the names of the files it produced.

#include <iomanip>

#include "qsplit/analysis.hpp"
#include "qsplit/dimer.hpp"
#include "qsplit/disorder.hpp"
#include "qsplit/io.hpp"

namespace qsplit {

inline constexpr int kSchemaVersion = 1;

struct SplitterConfig {
  SplitterSettings settings{SplitterMode::one_sided, 60, 2, 2.0, 3};
  std::size_t center = 700;
  std::size_t lead_margin = 20;
};

struct DisorderSettings {
  std::vector<double> sigma_list{0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  std::size_t n_realizations = 50;
  std::optional<std::uint64_t> seed;
  DisorderScope scope = DisorderScope::whole_chain;
  unsigned threads = 0;
};

struct ZittSettings {
  std::vector<double> mu_list{0.25, 0.5, 1.0};
  double width = 2.0;
  double kick = kPi / 4.0;
  double center = 600.0;
  double t_max = 250.0;
  double dt = 0.1;
  double late_fraction = 0.08;
};

struct HexamerSettings {
  std::string curve = "g_linear";  // g_linear | overlap
  double d = 1.0, f = 0.2;
  double g_from = 0.3, g_to = -0.3;
  double theta_from = 0.0, theta_to = 90.0;
  std::size_t n_theta = 91;
  OverlapModel overlap;
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  LatticeSpec lattice{1200, 1.0, 0.2, 0.0, 1.0, Boundary::open};
  WavePacketSpec packet;
  SplitterConfig splitter;
  RunSettings run;
  DisorderSettings disorder;
  ZittSettings zitt;
  HexamerSettings hexamer;
  std::string outputs = "out";
};

// ---------------------------------------------------------------------------
// JSON <-> config.

inline Json complex_to_json(Complex c) {
  if (c.imag() == 0.0) return c.real();
  return Json::array({c.real(), c.imag()});
}

inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["schema_version"] = c.schema_version;
  j["lattice"] = {{"n_sites", c.lattice.n_sites},
                  {"hopping", c.lattice.hopping},
                  {"mass", c.lattice.mass},
                  {"mean_onsite", c.lattice.mean_onsite},
                  {"lattice_constant", c.lattice.lattice_constant},
                  {"boundary", to_string(c.lattice.boundary)}};
  j["packet"] = {{"width", c.packet.width},
                 {"kick", c.packet.kick},
                 {"w_plus", complex_to_json(c.packet.w_plus)},
                 {"w_minus", complex_to_json(c.packet.w_minus)},
                 {"center", c.packet.center}};
  j["splitter"] = {{"mode", to_string(c.splitter.settings.mode)},
                   {"rho", c.splitter.settings.rho},
                   {"neighbor_order", c.splitter.settings.neighbor_order},
                   {"v0", c.splitter.settings.v0},
                   {"embed_factor", c.splitter.settings.embed_factor},
                   {"center", c.splitter.center},
                   {"lead_margin", c.splitter.lead_margin}};
  j["run"] = {{"t_max", c.run.t_max},
              {"n_outputs", c.run.n_outputs},
              {"edge_tolerance", c.run.edge_tolerance},
              {"edge_sites", c.run.edge_sites},
              {"snapshot_every", c.run.snapshot_every}};
  j["disorder"] = {{"sigma_list", c.disorder.sigma_list},
                   {"n_realizations", c.disorder.n_realizations},
                   {"seed", c.disorder.seed ? Json(*c.disorder.seed) : Json(nullptr)},
                   {"scope", to_string(c.disorder.scope)},
                   {"threads", c.disorder.threads}};
  j["zitt"] = {{"mu_list", c.zitt.mu_list},     {"width", c.zitt.width},
               {"kick", c.zitt.kick},           {"center", c.zitt.center},
               {"t_max", c.zitt.t_max},         {"dt", c.zitt.dt},
               {"late_fraction", c.zitt.late_fraction}};
  j["hexamer"] = {{"curve", c.hexamer.curve},
                  {"d", c.hexamer.d},
                  {"f", c.hexamer.f},
                  {"g_from", c.hexamer.g_from},
                  {"g_to", c.hexamer.g_to},
                  {"theta_from", c.hexamer.theta_from},
                  {"theta_to", c.hexamer.theta_to},
                  {"n_theta", c.hexamer.n_theta},
                  {"overlap",
                   {{"radius", c.hexamer.overlap.radius},
                    {"ell", c.hexamer.overlap.ell},
                    {"xi", c.hexamer.overlap.xi},
                    {"amplitude", c.hexamer.overlap.amplitude}}}};
  j["outputs"] = c.outputs;
  return j;
}

/// Field-level problems found while reading or validating a config.
struct ConfigReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

namespace detail {

class Reader {
 public:
  explicit Reader(ConfigReport& rep) : rep_(rep) {}

  template <class T>
  void get(const Json& obj, const std::string& path, const char* key, T& dst) {
    if (!obj.contains(key)) return;
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, unsigned>) {
        const Json& v = obj.at(key);
        if (!v.is_number_integer() || v.get<long long>() < 0)
          return fail(path + "." + key, "expected a non-negative integer");
        dst = static_cast<T>(v.get<unsigned long long>());
      } else {
        dst = obj.at(key).get<T>();
      }
    } catch (const std::exception&) {
      fail(path + "." + key, "has the wrong type");
    }
  }

  void get_complex(const Json& obj, const std::string& path, const char* key, Complex& dst) {
    if (!obj.contains(key)) return;
    const Json& v = obj.at(key);
    if (v.is_number()) {
      dst = v.get<double>();
    } else if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
      dst = Complex(v[0].get<double>(), v[1].get<double>());
    } else {
      fail(path + "." + key, "expected a number or [re, im]");
    }
  }

  void known(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) return fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      bool found = false;
      for (const char* k : keys) found = found || it.key() == k;
      if (!found) fail(path.empty() ? it.key() : path + "." + it.key(), "is not a known field");
    }
  }

  void fail(const std::string& field, const std::string& what) {
    rep_.violations.push_back(field + ": " + what);
  }

 private:
  ConfigReport& rep_;
};

inline const Json& section(const Json& j, const char* key) {
  static const Json empty = Json::object();
  return j.contains(key) ? j.at(key) : empty;
}

}  // namespace detail

/// Which subcommand a config is checked for; `all` applies every rule.
enum class Purpose { all, spectrum, scatter, zitt, disorder, splitter_matrix, hexamer };

/// Cross-field checks on a fully read config.
inline void validate_into(const ScenarioConfig& c, ConfigReport& rep, Purpose purpose = Purpose::all) {
  const bool all = purpose == Purpose::all;
  const bool scatter = all || purpose == Purpose::scatter || purpose == Purpose::disorder;
  const bool splitter = scatter || purpose == Purpose::splitter_matrix;
  auto check = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      rep.violations.push_back(e.code() + ": " + e.what());
    }
  };
  if (c.schema_version != kSchemaVersion)
    rep.violations.push_back("schema_version: expected " + std::to_string(kSchemaVersion) +
                             ", got " + std::to_string(c.schema_version));
  check([&] { c.lattice.validate(); });
  if (scatter) check([&] { c.packet.validate(); });
  if (scatter) check([&] { c.run.validate(); });
  if (scatter && c.packet.kick > 0.0 && c.lattice.hopping > 0.0) {
    const double tc = static_cast<double>(c.lattice.n_sites) / (2.0 * c.lattice.hopping * c.packet.kick);
    if (c.run.t_max < 2.0 * tc)
      rep.violations.push_back("run.t_max: must be at least 2 T_c = " + fmt_double(2.0 * tc) +
                               " (T_c = N / (2 Delta kappa))");
  }

  const std::size_t n = c.lattice.n_sites;
  const std::size_t rho = c.splitter.settings.rho;
  if (rho == 0) rep.violations.push_back("splitter.rho: must be at least 1");
  if (c.splitter.settings.embed_factor == 0)
    rep.violations.push_back("splitter.embed_factor: must be at least 1");
  if (c.splitter.settings.mode == SplitterMode::geometric && c.splitter.settings.neighbor_order == 0)
    rep.violations.push_back("splitter.neighbor_order: must be at least 1 for geometric mode");
  const long lo = static_cast<long>(c.splitter.center / 2) * 2 - 2 * static_cast<long>(rho / 2);
  const long hi = lo + 2 * static_cast<long>(rho) - 1;
  const long margin = static_cast<long>(c.splitter.lead_margin);
  if (splitter && (lo < margin || hi + margin >= static_cast<long>(n))) {
    const long need = std::max(hi + margin + 1, 2 * static_cast<long>(rho) + 2 * margin);
    rep.violations.push_back("splitter: window [" + std::to_string(lo) + ", " + std::to_string(hi) +
                             "] does not fit the lattice with " + std::to_string(margin) +
                             " lead sites; suggested minimum n_sites = " +
                             std::to_string(need + (need % 2)));
  }
  const double lam = c.packet.width;
  const double room = lam * std::sqrt(2.0 * std::log(1e8));  // |envelope|^2 < 1e-8
  if (scatter) {
    if (c.packet.center < room || c.packet.center + room > static_cast<double>(n) - 1.0)
      rep.violations.push_back("packet.center: packet tails reach the lattice edge; need " +
                               fmt_double(room) + " sites of clearance");
    else if (c.packet.center + room > static_cast<double>(lo))
      rep.violations.push_back("packet.center: packet overlaps the splitter window at t = 0");
  }
  if (all || purpose == Purpose::zitt) {
    if (c.zitt.dt <= 0.0) rep.violations.push_back("zitt.dt: must be positive");
    if (c.zitt.t_max <= 0.0) rep.violations.push_back("zitt.t_max: must be positive");
    for (double mu : c.zitt.mu_list)
      if (mu < 0.0) rep.violations.push_back("zitt.mu_list: masses must be non-negative");
    const double zroom = c.zitt.width * std::sqrt(2.0 * std::log(1e8));
    if (c.zitt.center < zroom || c.zitt.center + zroom > static_cast<double>(n) - 1.0)
      rep.violations.push_back("zitt.center: packet tails reach the lattice edge");
  }
  if (all || purpose == Purpose::disorder) {
    for (double s : c.disorder.sigma_list)
      if (s < 0.0) rep.violations.push_back("disorder.sigma_list: values must be non-negative");
    if (c.disorder.n_realizations == 0)
      rep.violations.push_back("disorder.n_realizations: must be at least 1");
  }
  if (all || purpose == Purpose::hexamer) {
    if (c.hexamer.curve != "g_linear" && c.hexamer.curve != "overlap")
      rep.violations.push_back("hexamer.curve: expected g_linear or overlap");
    if (c.hexamer.n_theta < 2) rep.violations.push_back("hexamer.n_theta: need at least 2 points");
    if (c.hexamer.curve == "overlap") check([&] { c.hexamer.overlap.validate(); });
  }
}

inline ScenarioConfig from_json(const Json& j, ConfigReport& rep, Purpose purpose = Purpose::all) {
  ScenarioConfig c;
  detail::Reader r(rep);
  if (!j.is_object()) {
    rep.violations.push_back("config: top level must be a JSON object");
    return c;
  }
  r.known(j, "", {"schema_version", "lattice", "packet", "splitter", "run", "disorder", "zitt",
                  "hexamer", "outputs"});
  r.get(j, "", "schema_version", c.schema_version);
  r.get(j, "", "outputs", c.outputs);

  const Json& l = detail::section(j, "lattice");
  r.known(l, "lattice", {"n_sites", "hopping", "mass", "mean_onsite", "lattice_constant", "boundary"});
  r.get(l, "lattice", "n_sites", c.lattice.n_sites);
  r.get(l, "lattice", "hopping", c.lattice.hopping);
  r.get(l, "lattice", "mass", c.lattice.mass);
  r.get(l, "lattice", "mean_onsite", c.lattice.mean_onsite);
  r.get(l, "lattice", "lattice_constant", c.lattice.lattice_constant);
  if (l.contains("boundary")) {
    std::string b;
    r.get(l, "lattice", "boundary", b);
    if (b == "periodic") c.lattice.boundary = Boundary::periodic;
    else if (b == "open") c.lattice.boundary = Boundary::open;
    else r.fail("lattice.boundary", "expected periodic or open");
  }

  const Json& p = detail::section(j, "packet");
  r.known(p, "packet", {"width", "kick", "w_plus", "w_minus", "center"});
  r.get(p, "packet", "width", c.packet.width);
  r.get(p, "packet", "kick", c.packet.kick);
  r.get_complex(p, "packet", "w_plus", c.packet.w_plus);
  r.get_complex(p, "packet", "w_minus", c.packet.w_minus);
  r.get(p, "packet", "center", c.packet.center);

  const Json& s = detail::section(j, "splitter");
  r.known(s, "splitter", {"mode", "rho", "neighbor_order", "v0", "embed_factor", "center", "lead_margin"});
  if (s.contains("mode")) {
    std::string m;
    r.get(s, "splitter", "mode", m);
    try {
      c.splitter.settings.mode = splitter_mode_from_string(m);
    } catch (const Error&) {
      r.fail("splitter.mode", "expected one_sided, symmetric or geometric");
    }
  }
  r.get(s, "splitter", "rho", c.splitter.settings.rho);
  r.get(s, "splitter", "neighbor_order", c.splitter.settings.neighbor_order);
  r.get(s, "splitter", "v0", c.splitter.settings.v0);
  r.get(s, "splitter", "embed_factor", c.splitter.settings.embed_factor);
  r.get(s, "splitter", "center", c.splitter.center);
  r.get(s, "splitter", "lead_margin", c.splitter.lead_margin);

  const Json& rn = detail::section(j, "run");
  r.known(rn, "run", {"t_max", "n_outputs", "edge_tolerance", "edge_sites", "snapshot_every"});
  r.get(rn, "run", "t_max", c.run.t_max);
  r.get(rn, "run", "n_outputs", c.run.n_outputs);
  r.get(rn, "run", "edge_tolerance", c.run.edge_tolerance);
  r.get(rn, "run", "edge_sites", c.run.edge_sites);
  r.get(rn, "run", "snapshot_every", c.run.snapshot_every);

  const Json& d = detail::section(j, "disorder");
  r.known(d, "disorder", {"sigma_list", "n_realizations", "seed", "scope", "threads"});
  r.get(d, "disorder", "sigma_list", c.disorder.sigma_list);
  r.get(d, "disorder", "n_realizations", c.disorder.n_realizations);
  if (d.contains("seed") && !d.at("seed").is_null()) {
    if (d.at("seed").is_number_unsigned()) c.disorder.seed = d.at("seed").get<std::uint64_t>();
    else r.fail("disorder.seed", "expected a non-negative integer");
  }
  if (d.contains("scope")) {
    std::string sc;
    r.get(d, "disorder", "scope", sc);
    try {
      c.disorder.scope = disorder_scope_from_string(sc);
    } catch (const Error&) {
      r.fail("disorder.scope", "expected whole_chain, splitter_only or leads_only");
    }
  }
  r.get(d, "disorder", "threads", c.disorder.threads);

  const Json& z = detail::section(j, "zitt");
  r.known(z, "zitt", {"mu_list", "width", "kick", "center", "t_max", "dt", "late_fraction"});
  r.get(z, "zitt", "mu_list", c.zitt.mu_list);
  r.get(z, "zitt", "width", c.zitt.width);
  r.get(z, "zitt", "kick", c.zitt.kick);
  r.get(z, "zitt", "center", c.zitt.center);
  r.get(z, "zitt", "t_max", c.zitt.t_max);
  r.get(z, "zitt", "dt", c.zitt.dt);
  r.get(z, "zitt", "late_fraction", c.zitt.late_fraction);

  const Json& h = detail::section(j, "hexamer");
  r.known(h, "hexamer", {"curve", "d", "f", "g_from", "g_to", "theta_from", "theta_to", "n_theta",
                         "overlap"});
  r.get(h, "hexamer", "curve", c.hexamer.curve);
  r.get(h, "hexamer", "d", c.hexamer.d);
  r.get(h, "hexamer", "f", c.hexamer.f);
  r.get(h, "hexamer", "g_from", c.hexamer.g_from);
  r.get(h, "hexamer", "g_to", c.hexamer.g_to);
  r.get(h, "hexamer", "theta_from", c.hexamer.theta_from);
  r.get(h, "hexamer", "theta_to", c.hexamer.theta_to);
  r.get(h, "hexamer", "n_theta", c.hexamer.n_theta);
  const Json& o = detail::section(h, "overlap");
  r.known(o, "hexamer.overlap", {"radius", "ell", "xi", "amplitude"});
  r.get(o, "hexamer.overlap", "radius", c.hexamer.overlap.radius);
  r.get(o, "hexamer.overlap", "ell", c.hexamer.overlap.ell);
  r.get(o, "hexamer.overlap", "xi", c.hexamer.overlap.xi);
  r.get(o, "hexamer.overlap", "amplitude", c.hexamer.overlap.amplitude);

  if (rep.ok()) validate_into(c, rep, purpose);
  return c;
}

/// Parses "a.b.c=value" and writes value (JSON if it parses, else a string).
inline void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "override.syntax",
          "override '" + assignment + "' must look like path.to.field=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(text);
  } catch (const std::exception&) {
    value = text;
  }
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!key.empty(), "override.syntax", "empty path component in '" + path + "'");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = Json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(is.good(), "config.unreadable", "cannot read config file " + path.string());
  try {
    return Json::parse(is);
  } catch (const std::exception& e) {
    throw Error("config.unparseable", path.string() + ": " + e.what());
  }
}

/// Reads, overrides, parses and validates; throws with every violation listed.
inline ScenarioConfig load_config(const std::optional<std::filesystem::path>& path,
                                  const std::vector<std::string>& overrides,
                                  Purpose purpose = Purpose::all) {
  Json j = path ? read_json_file(*path) : Json::object();
  for (const auto& o : overrides) apply_override(j, o);
  ConfigReport rep;
  ScenarioConfig c = from_json(j, rep, purpose);
  if (!rep.ok()) {
    std::string msg = "invalid config:";
    for (const auto& v : rep.violations) msg += "\n  " + v;
    throw Error("config.invalid", msg);
  }
  return c;
}

inline ConfigReport validate_config(const std::filesystem::path& path) {
  ConfigReport rep;
  from_json(read_json_file(path), rep);
  return rep;
}

// ---------------------------------------------------------------------------
// Drivers.

struct RunOutput {
  std::vector<std::string> files;
  Json summary;
};

namespace detail {

inline LatticeSpec ring_of(const LatticeSpec& spec) {
  LatticeSpec r = spec;
  r.boundary = Boundary::periodic;
  return r;
}

inline std::string tag(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

inline Json scattering_json(const ScatteringResult& r) {
  return Json{{"r_plus", r.r_plus},
              {"t_plus", r.t_plus},
              {"r_minus", r.r_minus},
              {"t_minus", r.t_minus},
              {"partition_site", r.partition_site},
              {"collision_time", r.collision_time},
              {"separation_time", r.separation_time},
              {"edge_probability", r.edge_probability},
              {"window_probability", r.window_probability},
              {"norm_drift", r.norm_drift},
              {"energy_drift", r.energy_drift}};
}

}  // namespace detail

inline RunOutput run_spectrum(const ScenarioConfig& c, const std::filesystem::path& dir) {
  const LatticeSpec ring = detail::ring_of(c.lattice);
  RunOutput out;
  std::vector<double> analytic;
  {
    CsvWriter w(dir / "bands.csv", {"k", "E_minus", "E_plus"});
    for (double k : k_grid(ring)) {
      const double em = dispersion(ring, k, Band::lower), ep = dispersion(ring, k, Band::upper);
      analytic.push_back(em);
      analytic.push_back(ep);
      w.row({k, em, ep});
    }
  }
  out.files.push_back("bands.csv");
  analytic = sorted(analytic);
  const std::vector<double> dense = to_std(hermitian_eigenvalues(build_hamiltonian(ring).entries()));
  double worst = 0.0;
  {
    CsvWriter w(dir / "eigenvalues.csv", {"index", "dense", "analytic", "abs_error"});
    for (std::size_t i = 0; i < dense.size(); ++i) {
      const double e = std::abs(dense[i] - analytic[i]);
      worst = std::max(worst, e);
      w.row({static_cast<double>(i), dense[i], analytic[i], e});
    }
  }
  out.files.push_back("eigenvalues.csv");
  double gap = std::numeric_limits<double>::infinity();
  for (double k : k_grid(ring)) gap = std::min(gap, 2.0 * band_gap_half(ring, k));
  out.summary = Json{{"n_sites", ring.n_sites}, {"max_abs_error", worst}, {"min_gap_on_grid", gap}};
  write_json(dir / "spectrum.json", out.summary);
  out.files.push_back("spectrum.json");
  return out;
}

inline RunOutput run_scatter(const ScenarioConfig& c, const std::filesystem::path& dir) {
  const LatticeSpec ring = detail::ring_of(c.lattice);
  const BandProjectors proj = band_projectors(ring);
  const SplitterMatrix sp = synthesize_splitter(ring, c.splitter.settings, c.splitter.center);
  const ScatteringSetup setup = scattering_setup(c.lattice, sp, c.splitter.center, c.splitter.lead_margin);
  const Propagator prop(setup.hamiltonian);
  RunSettings run = c.run;
  run.record_series = true;
  const ScatteringResult res =
      scattering_run(c.lattice, setup, prop, make_packet(c.lattice, c.packet, proj), proj, run);

  RunOutput out;
  {
    CsvWriter w(dir / "series.csv", {"t", "X", "P_plus", "left_prob", "right_prob"});
    for (const auto& s : res.series) w.row({s.t, s.x, s.p_plus, s.left_prob, s.right_prob});
  }
  out.files.push_back("series.csv");
  if (!res.snapshots.empty()) {
    CsvWriter w(dir / "snapshots.csv", {"t", "n", "prob", "prob_plus", "prob_minus"});
    for (const auto& s : res.snapshots)
      for (Eigen::Index n = 0; n < s.prob.size(); ++n)
        w.row({s.t, static_cast<double>(n), s.prob(n), s.prob_plus(n), s.prob_minus(n)});
    out.files.push_back("snapshots.csv");
  }
  out.summary = detail::scattering_json(res);
  out.summary["window"] = {setup.window_lo, setup.window_hi};
  write_json(dir / "result.json", Json{{"result", out.summary}, {"config", to_json(c)}});
  out.files.push_back("result.json");
  return out;
}

struct ZittRun {
  double mu = 0.0;
  std::vector<double> times, x;
  ZittTrace trace;
  ZittFit envelope, spectrum;
  double worst_edge = 0.0;
};

inline ZittRun zitt_run(const LatticeSpec& base, const ZittSettings& z, double mu) {
  LatticeSpec spec = base;
  spec.mass = mu;
  spec.boundary = Boundary::open;
  const BandProjectors proj = band_projectors(detail::ring_of(spec));
  WavePacketSpec p;
  p.width = z.width;
  p.kick = z.kick;
  p.center = z.center;
  p.w_plus = p.w_minus = Complex(1.0 / std::sqrt(2.0), 0.0);
  const WavePacket psi0 = make_packet(spec, p, proj);
  const Propagator prop(build_hamiltonian(spec));
  const auto steps = static_cast<std::size_t>(std::llround(z.t_max / z.dt));
  ZittRun r;
  r.mu = mu;
  r.x = position_trace(spec, prop, psi0, z.dt, steps, &r.worst_edge);
  for (std::size_t i = 0; i <= steps; ++i) r.times.push_back(z.dt * static_cast<double>(i));
  r.trace = extract_zitt(r.times, r.x);
  r.envelope = fit_envelope(r.trace, z.late_fraction);
  r.spectrum = identify_frequencies(r.trace, spec, z.late_fraction);
  return r;
}

inline Json zitt_fit_json(const ZittRun& r, const LatticeSpec& spec) {
  LatticeSpec s = spec;
  s.mass = r.mu;
  Json peaks = Json::array();
  for (const auto& p : r.spectrum.peaks) peaks.push_back({{"omega", p.omega}, {"relative", p.magnitude}});
  Json matched = Json::array();
  for (double w : predicted_zitt_frequencies(s))
    matched.push_back({{"predicted", w}, {"found", has_peak_near(r.spectrum, w)}});
  return Json{{"mu", r.mu},
              {"envelope_exponent", r.envelope.envelope_exponent},
              {"envelope_amplitude_A", r.envelope.amplitude_a},
              {"line_ratio_B", r.spectrum.amplitude_b},
              {"fit_residual", r.envelope.fit_residual},
              {"n_maxima", r.envelope.n_maxima},
              {"ballistic_slope", r.trace.ballistic_slope},
              {"frequencies", r.spectrum.frequencies},
              {"peaks", peaks},
              {"predicted", matched},
              {"bin_width", r.spectrum.bin_width},
              {"edge_probability", r.worst_edge}};
}

inline RunOutput run_zitt(const ScenarioConfig& c, const std::filesystem::path& dir) {
  RunOutput out;
  out.summary = Json::array();
  for (double mu : c.zitt.mu_list) {
    const ZittRun r = zitt_run(c.lattice, c.zitt, mu);
    const std::string t = detail::tag(mu);
    {
      CsvWriter w(dir / ("zitt_trace_mu" + t + ".csv"), {"t", "X", "x_zitt"});
      for (std::size_t i = 0; i < r.times.size(); ++i) w.row({r.times[i], r.x[i], r.trace.x_zitt[i]});
    }
    {
      CsvWriter w(dir / ("zitt_envelope_mu" + t + ".csv"), {"t", "abs_x_zitt", "log_t", "log_abs_x_zitt"});
      for (std::size_t i = 0; i < r.envelope.maxima_t.size(); ++i)
        w.row({r.envelope.maxima_t[i], r.envelope.maxima_amp[i], std::log(r.envelope.maxima_t[i]),
               std::log(r.envelope.maxima_amp[i])});
    }
    const Json fit = zitt_fit_json(r, c.lattice);
    write_json(dir / ("zitt_fit_mu" + t + ".json"), fit);
    out.files.insert(out.files.end(), {"zitt_trace_mu" + t + ".csv", "zitt_envelope_mu" + t + ".csv",
                                       "zitt_fit_mu" + t + ".json"});
    out.summary.push_back(fit);
  }
  return out;
}

inline DisorderScenario disorder_scenario(const ScenarioConfig& c) {
  const LatticeSpec ring = detail::ring_of(c.lattice);
  DisorderScenario sc;
  sc.lattice = c.lattice;
  sc.projectors = band_projectors(ring);
  const SplitterMatrix sp = synthesize_splitter(ring, c.splitter.settings, c.splitter.center);
  sc.setup = scattering_setup(c.lattice, sp, c.splitter.center, c.splitter.lead_margin);
  sc.packet = make_packet(c.lattice, c.packet, sc.projectors);
  sc.run = c.run;
  return sc;
}

inline RunOutput run_disorder(const ScenarioConfig& c, const std::filesystem::path& dir) {
  require(c.disorder.seed.has_value(), "disorder.seed_missing", "disorder runs need an explicit --seed");
  DisorderConfig cfg;
  cfg.n_realizations = c.disorder.n_realizations;
  cfg.seed = *c.disorder.seed;
  cfg.scope = c.disorder.scope;
  const DisorderSweepResult res =
      disorder_sweep(disorder_scenario(c), c.disorder.sigma_list, cfg, c.disorder.threads);
  RunOutput out;
  {
    CsvWriter w(dir / "disorder.csv",
                {"sigma", "mean_R+", "std_R+", "mean_T-", "std_T-", "n_ok", "n_failed"});
    for (const auto& p : res.points)
      w.row({p.sigma, p.mean_r_plus, p.std_r_plus, p.mean_t_minus, p.std_t_minus,
             static_cast<double>(p.n_ok), static_cast<double>(p.n_failed)});
  }
  {
    CsvWriter w(dir / "disorder_realizations.csv", {"sigma", "index", "R+", "T-"});
    for (const auto& p : res.points)
      for (std::size_t i = 0; i < p.r_plus.size(); ++i)
        w.row({p.sigma, static_cast<double>(i), p.r_plus[i], p.t_minus[i]});
  }
  Json pts = Json::array();
  for (const auto& p : res.points)
    pts.push_back({{"sigma", p.sigma},
                   {"mean_R+", p.mean_r_plus},
                   {"std_R+", p.std_r_plus},
                   {"mean_T-", p.mean_t_minus},
                   {"std_T-", p.std_t_minus},
                   {"n_ok", p.n_ok},
                   {"n_failed", p.n_failed}});
  out.summary = Json{{"clean", detail::scattering_json(res.clean)}, {"scope", res.scope}, {"points", pts}};
  write_json(dir / "disorder.json", out.summary);
  out.files = {"disorder.csv", "disorder_realizations.csv", "disorder.json"};
  return out;
}

inline RunOutput run_splitter_matrix(const ScenarioConfig& c, const std::filesystem::path& dir,
                                     std::size_t pad = 20) {
  const LatticeSpec ring = detail::ring_of(c.lattice);
  const SplitterMatrix sp = synthesize_splitter(ring, c.splitter.settings, c.splitter.center);
  const CMatrix& v = sp.v.entries();
  const auto n = static_cast<long>(ring.n_sites);
  const long lo = std::max(0L, static_cast<long>(sp.window_lo) - static_cast<long>(pad));
  const long hi = std::min(n - 1, static_cast<long>(sp.window_hi) + static_cast<long>(pad));
  {
    CsvWriter w(dir / "splitter.csv", {"row", "col", "re", "im"});
    for (long r = lo; r <= hi; ++r)
      for (long col = lo; col <= hi; ++col)
        if (v(r, col) != Complex(0.0, 0.0))
          w.row({static_cast<double>(r), static_cast<double>(col), v(r, col).real(), v(r, col).imag()});
  }
  RunOutput out;
  out.files.push_back("splitter.csv");
  out.summary = Json{{"mode", to_string(sp.mode)},
                     {"rho", sp.range},
                     {"neighbor_order", sp.neighbor_order},
                     {"window", {sp.window_lo, sp.window_hi}},
                     {"exported_block", {lo, hi}},
                     {"bandwidth", compute_bandwidth(v)},
                     {"max_abs", max_abs(v)},
                     {"hermiticity_defect", hermiticity_defect(v)}};
  write_json(dir / "splitter.json", out.summary);
  out.files.push_back("splitter.json");
  return out;
}

inline CouplingCurve hexamer_curve(const HexamerSettings& h) {
  if (h.curve == "overlap") {
    const OverlapModel m = h.overlap;
    return [m](double th) { return m.couplings(th); };
  }
  return [h](double th) {
    const double u = (th - h.theta_from) / (h.theta_to - h.theta_from);
    return HexamerCouplings{h.d, h.f, h.g_from + u * (h.g_to - h.g_from)};
  };
}

inline RunOutput run_hexamer(const ScenarioConfig& c, const std::filesystem::path& dir) {
  const HexamerSettings& h = c.hexamer;
  std::vector<double> grid(h.n_theta);
  for (std::size_t i = 0; i < h.n_theta; ++i)
    grid[i] = h.theta_from + (h.theta_to - h.theta_from) * static_cast<double>(i) /
                                 static_cast<double>(h.n_theta - 1);
  const SweepReport rep = spectrum_sweep(hexamer_curve(h), grid);
  {
    CsvWriter w(dir / "hexamer_levels.csv",
                {"theta", "E1", "E2", "E3", "E4", "E5", "E6", "labels", "d", "f", "g", "gap"});
    for (const auto& r : rep.rows) {
      std::vector<std::string> cells{fmt_double(r.theta)};
      for (double e : r.levels.energies) cells.push_back(fmt_double(e));
      std::string labels;
      for (std::size_t i = 0; i < 6; ++i) labels += (i ? ";" : "") + r.levels.labels[i];
      cells.push_back(labels);
      for (double x : {r.couplings.d, r.couplings.f, r.couplings.g, r.gap}) cells.push_back(fmt_double(x));
      w.row_strings(cells);
    }
  }
  RunOutput out;
  out.summary = Json{{"curve", h.curve}, {"n_theta", h.n_theta}, {"crossings", rep.crossings}};
  write_json(dir / "hexamer.json", out.summary);
  out.files = {"hexamer_levels.csv", "hexamer.json"};
  return out;
}

}  // namespace qsplit
