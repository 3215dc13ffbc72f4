#include <chrono>
#include <iostream>

#include <CLI11.hpp>

#include "qsplit/qsplit.hpp"

namespace fs = std::filesystem;
using namespace qsplit;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
};

int report_error(const std::string& code, const std::string& message) {
  Json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
  return code.rfind("config.", 0) == 0 || code.rfind("override.", 0) == 0 ? 2 : 1;
}

template <class Driver>
int execute(const std::string& command, Purpose purpose, const Common& opt,
            std::vector<std::string> extra, std::optional<std::uint64_t> seed, Driver driver) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  std::vector<std::string> overrides = opt.overrides;
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  if (seed) overrides.push_back("disorder.seed=" + std::to_string(*seed));
  std::optional<fs::path> path;
  if (!opt.config.empty()) path = opt.config;
  ScenarioConfig cfg = load_config(path, overrides, purpose);
  if (!opt.out.empty()) cfg.outputs = opt.out;

  const fs::path dir = cfg.outputs;
  fs::create_directories(dir);
  const Json resolved = to_json(cfg);
  write_json(dir / "config.json", resolved);
  RunOutput out = driver(cfg, dir);

  RunManifest m;
  m.command = command;
  m.config_hash = config_hash(resolved);
  m.seed = cfg.disorder.seed;
  m.started_utc = started;
  m.files = {"config.json"};
  m.files.insert(m.files.end(), out.files.begin(), out.files.end());
  m.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(dir, m);
  std::cout << Json{{"command", command}, {"output_dir", dir.string()}, {"summary", out.summary}}.dump(2)
            << "\n";
  return 0;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("config", c.config, "scenario JSON file (defaults are the baseline scenario)");
  sub->add_option("--set", c.overrides, "override a config field, e.g. --set lattice.mass=0.3")
      ->take_all();
  sub->add_option("-o,--out", c.out, "output directory (overrides config 'outputs')");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasispin splitter simulations on bipartite tight-binding chains"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common c_spec, c_scat, c_zitt, c_dis, c_mat, c_hex;
  auto* spectrum = app.add_subcommand("spectrum", "dense vs analytic spectrum of the ring");
  add_common(spectrum, c_spec);
  auto* scatter = app.add_subcommand("scatter", "band-resolved scattering off a splitter");
  add_common(scatter, c_scat);
  auto* zitt = app.add_subcommand("zitt", "Zitterbewegung traces and fits for each mass in zitt.mu_list");
  add_common(zitt, c_zitt);

  auto* disorder = app.add_subcommand("disorder", "Monte Carlo coupling-disorder sweep");
  add_common(disorder, c_dis);
  std::uint64_t seed = 0;
  disorder->add_option("--seed", seed, "64-bit RNG seed")->required();

  auto* matrix = app.add_subcommand("splitter-matrix", "export the synthesized splitter as CSV");
  add_common(matrix, c_mat);
  std::string mode;
  std::size_t rho = 0, order = 0;
  matrix->add_option("--mode", mode, "one_sided | symmetric | geometric");
  matrix->add_option("--rho", rho, "gate range in cells");
  matrix->add_option("--order", order, "neighbor order (geometric mode)");

  auto* hexamer = app.add_subcommand("hexamer", "hexamer level table and crossing report");
  add_common(hexamer, c_hex);

  auto* validate = app.add_subcommand("validate", "list config violations without running");
  std::string vpath;
  std::vector<std::string> voverrides;
  validate->add_option("config", vpath, "scenario JSON file")->required();
  validate->add_option("--set", voverrides, "override a config field")->take_all();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*spectrum) return execute("spectrum", Purpose::spectrum, c_spec, {}, std::nullopt, run_spectrum);
    if (*scatter) return execute("scatter", Purpose::scatter, c_scat, {}, std::nullopt, run_scatter);
    if (*zitt) return execute("zitt", Purpose::zitt, c_zitt, {}, std::nullopt, run_zitt);
    if (*disorder) return execute("disorder", Purpose::disorder, c_dis, {}, seed, run_disorder);
    if (*matrix) {
      std::vector<std::string> extra;
      if (!mode.empty()) extra.push_back("splitter.mode=\"" + mode + "\"");
      if (rho) extra.push_back("splitter.rho=" + std::to_string(rho));
      if (order) extra.push_back("splitter.neighbor_order=" + std::to_string(order));
      return execute("splitter-matrix", Purpose::splitter_matrix, c_mat, extra, std::nullopt,
                     [](const ScenarioConfig& c, const fs::path& d) { return run_splitter_matrix(c, d); });
    }
    if (*hexamer) return execute("hexamer", Purpose::hexamer, c_hex, {}, std::nullopt, run_hexamer);
    if (*validate) {
      Json j = read_json_file(vpath);
      for (const auto& o : voverrides) apply_override(j, o);
      ConfigReport rep;
      from_json(j, rep);
      std::cout << Json{{"valid", rep.ok()}, {"violations", rep.violations}}.dump(2) << "\n";
      return rep.ok() ? 0 : 2;
    }
  } catch (const Error& e) {
    return report_error(e.code(), e.what());
  } catch (const std::exception& e) {
    return report_error("internal", e.what());
  }
  return 0;
}
