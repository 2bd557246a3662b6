#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <nlohmann/json.hpp>

#include "pathsec/assurance.hpp"
#include "pathsec/errors.hpp"
#include "pathsec/experiment.hpp"
#include "pathsec/rng.hpp"
#include "pathsec/traffic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace pathsec;

namespace {

WindowFormat parse_format(const std::string& name) {
  if (name == "csv") return WindowFormat::Csv;
  if (name == "json") return WindowFormat::Json;
  throw Error(ErrorKind::Config, "format must be csv or json, got " + name);
}

int run_gen(const std::string& out_dir, int windows, int n, double injected_fraction,
            std::uint64_t seed, const std::string& config_path, const std::string& format_name,
            int bursts, int burst_len, double intensity) {
  TrafficConfig traffic =
      config_path.empty() ? default_traffic_config() : load_traffic_config(config_path);
  const WindowFormat format = parse_format(format_name);
  if (windows < 1) throw Error(ErrorKind::Config, "windows must be >= 1");
  if (injected_fraction < 0.0 || injected_fraction > 1.0)
    throw Error(ErrorKind::Config, "injected-fraction must be in [0, 1]");

  fs::create_directories(out_dir);
  store_traffic_config(traffic, (fs::path(out_dir) / "traffic_config.json").string());

  std::vector<int> order(windows);
  std::iota(order.begin(), order.end(), 0);
  auto rng = make_engine(derive_seed(seed, 1));
  std::shuffle(order.begin(), order.end(), rng);
  const int n_inj = static_cast<int>(std::llround(injected_fraction * windows));
  std::vector<char> injected(windows, 0);
  for (int i = 0; i < n_inj && i < windows; ++i) injected[order[i]] = 1;

  json manifest = json::array();
  int actual_injected = 0;
  for (int i = 0; i < windows; ++i) {
    EventWindow w = generate_baseline(traffic.catalog, n, derive_seed(seed, 1000 + i));
    char name[16];
    std::snprintf(name, sizeof name, "w%04d", i);
    w.id = name;
    if (injected[i]) {
      w = inject_attacks_exact(w, traffic.catalog, traffic.signatures, bursts, burst_len,
                               intensity, derive_seed(seed, 2000 + i));
      ++actual_injected;
    }
    const std::string ext = format == WindowFormat::Csv ? ".csv" : ".json";
    const fs::path file = fs::path(out_dir) / (w.id + ext);
    store_window(w, file.string(), format);
    manifest.push_back({{"file", file.filename().string()},
                        {"id", w.id},
                        {"injected", bool(injected[i])},
                        {"bursts", w.labels.size()}});
  }
  std::ofstream mf(fs::path(out_dir) / "dataset.json");
  mf << json{{"windows", manifest}, {"format", format_name}}.dump(2) << "\n";

  std::cout << json{{"out", out_dir}, {"windows", windows}, {"injected", actual_injected}}.dump(2)
            << "\n";
  return 0;
}

int run_assess(const std::string& window_path, const std::string& format_name,
               const std::string& config_path, const std::string& graph_path,
               const std::string& path_id, const PipelineConfig& pcfg) {
  TrafficConfig traffic =
      config_path.empty() ? default_traffic_config() : load_traffic_config(config_path);
  EventWindow w = load_window(window_path, parse_format(format_name), traffic.catalog);

  Pipeline pipeline(traffic, pcfg);
  PathAssessment a = pipeline.path_info_assurance(w, path_id);

  json out = json::parse(path_assessment_to_json(a));
  if (!graph_path.empty()) {
    MultipathGraph g = load_graph(graph_path);
    if (!path_id.empty()) {
      g.set_path_assurance(path_id, a.assurance);
      out["path_throughput_after"] = path_throughput(g, {path_id}, 1.0);
    }
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_run(const ExperimentConfig& cfg) {
  MetricsReport rep = run_experiment(cfg);
  json out = json::parse(metrics_to_json(rep));
  out["runtime"] = json::parse(runtime_to_json(rep));
  out["artifacts"] = cfg.out_dir;
  std::cout << out.dump(2) << "\n";
  return 0;
}

int run_plots(const std::string& artifacts_dir) {
  std::vector<std::string> emitted = emit_plots(artifacts_dir);
  std::cout << json{{"emitted", emitted}}.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path security assessment toolkit"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "Generate a seeded window dataset");
  std::string gen_out = "dataset";
  int gen_windows = 20, gen_n = 1024, gen_bursts = 1, gen_burst_len = 64;
  double gen_frac = 0.5, gen_intensity = 8.0;
  std::uint64_t gen_seed = 1234;
  std::string gen_config, gen_format = "json";
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--windows", gen_windows, "Number of windows");
  gen->add_option("--n", gen_n, "Samples per window");
  gen->add_option("--injected-fraction", gen_frac, "Fraction of windows carrying attacks");
  gen->add_option("--seed", gen_seed, "Master seed");
  gen->add_option("--config", gen_config, "Traffic config JSON (catalog + signatures)");
  gen->add_option("--format", gen_format, "Window file format: csv|json");
  gen->add_option("--bursts", gen_bursts, "Bursts per injected window");
  gen->add_option("--burst-len", gen_burst_len, "Burst length in samples");
  gen->add_option("--intensity", gen_intensity, "Burst intensity multiplier");

  // assess
  auto* assess = app.add_subcommand("assess", "Assess a single event window");
  std::string as_window, as_format = "json", as_config, as_graph, as_path;
  PipelineConfig as_pcfg;
  assess->add_option("--window", as_window, "Window file")->required();
  assess->add_option("--format", as_format, "Window file format: csv|json");
  assess->add_option("--config", as_config, "Traffic config JSON");
  assess->add_option("--graph", as_graph, "Multipath graph JSON");
  assess->add_option("--path", as_path, "Path id the window transits");
  assess->add_option("--ratio", as_pcfg.ratio, "Compression ratio M/N (<=0: epsilon rule)");
  assess->add_option("--epsilon", as_pcfg.sampler.epsilon, "Measurement-count coefficient");
  assess->add_option("--cs-seed", as_pcfg.sampler.seed, "Sensing matrix seed");
  assess->add_option("--beta", as_pcfg.beta, "Q-statistics confidence parameter");
  assess->add_option("--power-fraction", as_pcfg.power_fraction, "Principal spectral power");
  assess->add_option("--delta", as_pcfg.match.delta, "Cluster merge threshold (<0: auto)");
  assess->add_option("--reference-seed", as_pcfg.reference_seed, "Baseline reference seed");

  // run
  auto* run = app.add_subcommand("run", "Run a full experiment");
  std::string run_config;
  ExperimentConfig run_cfg;
  std::optional<int> run_windows, run_n;
  std::optional<double> run_ratio, run_beta, run_pf, run_frac;
  std::optional<std::uint64_t> run_seed;
  std::optional<std::string> run_out;
  run->add_option("--config", run_config, "Experiment config JSON");
  run->add_option("--windows", run_windows, "Override window count");
  run->add_option("--n", run_n, "Override samples per window");
  run->add_option("--out", run_out, "Override artifacts directory");
  run->add_option("--seed", run_seed, "Override master seed");
  run->add_option("--ratio", run_ratio, "Override compression ratio");
  run->add_option("--beta", run_beta, "Override beta");
  run->add_option("--power-fraction", run_pf, "Override power fraction");
  run->add_option("--injected-fraction", run_frac, "Override injected fraction");

  // plots
  auto* plots = app.add_subcommand("plots", "Emit plot CSVs from run artifacts");
  std::string plots_dir;
  plots->add_option("--artifacts", plots_dir, "Run artifacts directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    std::cerr << json{{"error", "usage"}, {"message", e.what()}}.dump() << "\n";
    return 2;
  }

  try {
    if (gen->parsed())
      return run_gen(gen_out, gen_windows, gen_n, gen_frac, gen_seed, gen_config, gen_format,
                     gen_bursts, gen_burst_len, gen_intensity);
    if (assess->parsed())
      return run_assess(as_window, as_format, as_config, as_graph, as_path, as_pcfg);
    if (run->parsed()) {
      if (!run_config.empty()) run_cfg = load_experiment_config(run_config);
      if (run_windows) run_cfg.windows = *run_windows;
      if (run_n) run_cfg.N = *run_n;
      if (run_out) run_cfg.out_dir = *run_out;
      if (run_seed) run_cfg.master_seed = *run_seed;
      if (run_ratio) run_cfg.pipeline.ratio = *run_ratio;
      if (run_beta) run_cfg.pipeline.beta = *run_beta;
      if (run_pf) run_cfg.pipeline.power_fraction = *run_pf;
      if (run_frac) run_cfg.injected_fraction = *run_frac;
      return run_run(run_cfg);
    }
    if (plots->parsed()) return run_plots(plots_dir);
  } catch (const Error& e) {
    std::cerr << json{{"error", e.kind_name()}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return 0;
}
