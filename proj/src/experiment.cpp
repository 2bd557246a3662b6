#include "pathsec/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pathsec/errors.hpp"
#include "pathsec/rng.hpp"

namespace pathsec {

namespace fs = std::filesystem;
using nlohmann::json;
using steady = std::chrono::steady_clock;

namespace {

double seconds_since(steady::time_point t0) {
  return std::chrono::duration<double>(steady::now() - t0).count();
}

std::string window_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%04d", i);
  return buf;
}

std::vector<double> to_vec(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Parse, "cannot write " + path.string());
  out << text;
  if (text.empty() || text.back() != '\n') out << "\n";
}

json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (windows < 1) throw Error(ErrorKind::Config, "windows must be >= 1");
  if (N < 2) throw Error(ErrorKind::Config, "N must be >= 2");
  if (injected_fraction < 0.0 || injected_fraction > 1.0)
    throw Error(ErrorKind::Config, "injected_fraction must be in [0, 1]");
  if (injection_mode != "fixed" && injection_mode != "poisson")
    throw Error(ErrorKind::Config, "injection_mode must be 'fixed' or 'poisson'");
  if (bursts_per_window < 0) throw Error(ErrorKind::Config, "bursts_per_window must be >= 0");
  if (poisson_rate < 0.0) throw Error(ErrorKind::Config, "poisson_rate must be >= 0");
  if (burst_len < 1) throw Error(ErrorKind::Config, "burst_len must be >= 1");
  if (intensity <= 0.0) throw Error(ErrorKind::Config, "intensity must be > 0");
  if (pipeline.ratio > 1.0) throw Error(ErrorKind::Config, "ratio must be <= 1");
  if (pipeline.beta <= 0.0 || pipeline.beta >= 1.0)
    throw Error(ErrorKind::Config, "beta must be in (0, 1)");
  if (pipeline.power_fraction <= 0.0 || pipeline.power_fraction > 1.0)
    throw Error(ErrorKind::Config, "power_fraction must be in (0, 1]");
  for (double r : sweep_ratios)
    if (r <= 0.0 || r > 1.0) throw Error(ErrorKind::Config, "sweep ratios must be in (0, 1]");
  if (out_dir.empty()) throw Error(ErrorKind::Config, "out_dir must be set");
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["windows"] = cfg.windows;
  j["N"] = cfg.N;
  j["injected_fraction"] = cfg.injected_fraction;
  j["injection"] = {{"mode", cfg.injection_mode},
                    {"bursts_per_window", cfg.bursts_per_window},
                    {"poisson_rate", cfg.poisson_rate},
                    {"burst_len", cfg.burst_len},
                    {"intensity", cfg.intensity}};
  j["cs"] = {{"ratio", cfg.pipeline.ratio},
             {"epsilon", cfg.pipeline.sampler.epsilon},
             {"const_C", cfg.pipeline.sampler.const_C},
             {"seed", cfg.pipeline.sampler.seed}};
  j["detector"] = {{"beta", cfg.pipeline.beta},
                   {"power_fraction", cfg.pipeline.power_fraction},
                   {"reference_seed", cfg.pipeline.reference_seed},
                   {"printed_q_variant", cfg.pipeline.printed_q_variant}};
  j["match"] = {{"delta", cfg.pipeline.match.delta},
                {"min_freq_fraction", cfg.pipeline.match.min_freq_fraction},
                {"max_clusters", cfg.pipeline.match.max_clusters},
                {"in_window_entropy", cfg.pipeline.match.in_window_entropy}};
  j["scoring"] = {{"i_max", cfg.pipeline.i_max},
                  {"classification_threshold", cfg.pipeline.classification_threshold}};
  j["seeds"] = {{"master", cfg.master_seed}};
  j["traffic_config"] = cfg.traffic_config_path;
  j["out_dir"] = cfg.out_dir;
  j["sweep_ratios"] = cfg.sweep_ratios;
  j["measure_ungated"] = cfg.measure_ungated;
  j["emit_windows"] = cfg.emit_windows;
  return j.dump(2);
}

ExperimentConfig load_experiment_config(const std::string& path) {
  json j = load_json(path);
  ExperimentConfig cfg;
  try {
    cfg.windows = j.value("windows", cfg.windows);
    cfg.N = j.value("N", cfg.N);
    cfg.injected_fraction = j.value("injected_fraction", cfg.injected_fraction);
    if (j.contains("injection")) {
      const json& ji = j["injection"];
      cfg.injection_mode = ji.value("mode", cfg.injection_mode);
      cfg.bursts_per_window = ji.value("bursts_per_window", cfg.bursts_per_window);
      cfg.poisson_rate = ji.value("poisson_rate", cfg.poisson_rate);
      cfg.burst_len = ji.value("burst_len", cfg.burst_len);
      cfg.intensity = ji.value("intensity", cfg.intensity);
    }
    if (j.contains("cs")) {
      const json& jc = j["cs"];
      cfg.pipeline.ratio = jc.value("ratio", cfg.pipeline.ratio);
      cfg.pipeline.sampler.epsilon = jc.value("epsilon", cfg.pipeline.sampler.epsilon);
      cfg.pipeline.sampler.const_C = jc.value("const_C", cfg.pipeline.sampler.const_C);
      cfg.pipeline.sampler.seed = jc.value("seed", cfg.pipeline.sampler.seed);
    }
    if (j.contains("detector")) {
      const json& jd = j["detector"];
      cfg.pipeline.beta = jd.value("beta", cfg.pipeline.beta);
      cfg.pipeline.power_fraction = jd.value("power_fraction", cfg.pipeline.power_fraction);
      cfg.pipeline.reference_seed = jd.value("reference_seed", cfg.pipeline.reference_seed);
      cfg.pipeline.printed_q_variant =
          jd.value("printed_q_variant", cfg.pipeline.printed_q_variant);
    }
    if (j.contains("match")) {
      const json& jm = j["match"];
      cfg.pipeline.match.delta = jm.value("delta", cfg.pipeline.match.delta);
      cfg.pipeline.match.min_freq_fraction =
          jm.value("min_freq_fraction", cfg.pipeline.match.min_freq_fraction);
      cfg.pipeline.match.max_clusters = jm.value("max_clusters", cfg.pipeline.match.max_clusters);
      cfg.pipeline.match.in_window_entropy =
          jm.value("in_window_entropy", cfg.pipeline.match.in_window_entropy);
    }
    if (j.contains("scoring")) {
      const json& js = j["scoring"];
      cfg.pipeline.i_max = js.value("i_max", cfg.pipeline.i_max);
      cfg.pipeline.classification_threshold =
          js.value("classification_threshold", cfg.pipeline.classification_threshold);
    }
    if (j.contains("seeds")) cfg.master_seed = j["seeds"].value("master", cfg.master_seed);
    cfg.traffic_config_path = j.value("traffic_config", cfg.traffic_config_path);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    if (j.contains("sweep_ratios"))
      cfg.sweep_ratios = j["sweep_ratios"].get<std::vector<double>>();
    cfg.measure_ungated = j.value("measure_ungated", cfg.measure_ungated);
    cfg.emit_windows = j.value("emit_windows", cfg.emit_windows);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string metrics_to_json(const MetricsReport& report) {
  json j;
  j["per_suite"] = json::array();
  for (const SuiteMetrics& s : report.per_suite)
    j["per_suite"].push_back({{"suite", s.suite_id},
                              {"instances", s.instances},
                              {"detected", s.detected},
                              {"false_neg", s.false_neg},
                              {"false_pos", s.false_pos}});
  j["detection"] = {{"windows", report.detection.windows},
                    {"injected_windows", report.detection.injected_windows},
                    {"unlabeled_windows", report.detection.unlabeled_windows},
                    {"flagged_windows", report.detection.flagged_windows},
                    {"detected_injected_windows", report.detection.detected_injected_windows},
                    {"false_positive_windows", report.detection.false_positive_windows},
                    {"true_negative_windows", report.detection.true_negative_windows},
                    {"instance_detection_rate", report.detection.instance_detection_rate},
                    {"false_positive_rate", report.detection.false_positive_rate}};
  j["classification"] = {{"forwarded", report.classification.forwarded},
                         {"detected_injected", report.classification.detected_injected},
                         {"classified_high_conf", report.classification.classified_high_conf},
                         {"classification_rate", report.classification.classification_rate},
                         {"avg_threat_accuracy", report.classification.avg_threat_accuracy},
                         {"confidence_threshold", report.classification.confidence_threshold}};
  json sweep = json::array();
  for (const CsSweepPoint& p : report.cs.sweep)
    sweep.push_back({{"ratio", p.ratio}, {"mse", p.mse}});
  j["cs"] = {{"ratio", report.cs.ratio},
             {"mse", report.cs.mse},
             {"M", report.cs.M},
             {"N", report.cs.N},
             {"sweep", sweep}};
  j["window_failures"] = report.window_failures;
  return j.dump(2);
}

std::string runtime_to_json(const MetricsReport& report) {
  json sweep = json::array();
  for (const CsSweepPoint& p : report.cs.sweep)
    sweep.push_back({{"ratio", p.ratio}, {"seconds", p.seconds}});
  json j = {{"gated_seconds", report.runtime.gated_seconds},
            {"ungated_seconds", report.runtime.ungated_seconds},
            {"total_seconds", report.runtime.total_seconds},
            {"sweep", sweep}};
  return j.dump(2);
}

MetricsReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  TrafficConfig traffic = cfg.traffic_config_path.empty()
                              ? default_traffic_config()
                              : load_traffic_config(cfg.traffic_config_path);
  fs::create_directories(cfg.out_dir);
  if (cfg.emit_windows) fs::create_directories(fs::path(cfg.out_dir) / "windows");

  const auto t_run = steady::now();
  Pipeline pipeline(traffic, cfg.pipeline);

  std::map<int, int> threat_levels;
  for (const AttackSignature& s : traffic.signatures) threat_levels[s.suite_id] = s.threat_level;

  // Seeded shuffle fixes exactly which windows receive injections.
  std::vector<int> order(cfg.windows);
  std::iota(order.begin(), order.end(), 0);
  auto shuffle_rng = make_engine(derive_seed(cfg.master_seed, 1));
  std::shuffle(order.begin(), order.end(), shuffle_rng);
  const int n_inj = static_cast<int>(std::llround(cfg.injected_fraction * cfg.windows));
  std::vector<char> want_injected(cfg.windows, 0);
  for (int i = 0; i < n_inj && i < cfg.windows; ++i) want_injected[order[i]] = 1;

  MetricsReport rep;
  rep.classification.confidence_threshold = cfg.pipeline.classification_threshold;
  std::map<int, SuiteMetrics> suites;
  for (const AttackSignature& s : traffic.signatures) {
    suites[s.suite_id] = SuiteMetrics{};
    suites[s.suite_id].suite_id = s.suite_id;
  }

  const int nf = static_cast<int>(traffic.catalog.features.size());
  Eigen::VectorXd baseline_totals = Eigen::VectorXd::Zero(nf);
  Eigen::VectorXd injected_totals = Eigen::VectorXd::Zero(nf);
  bool have_baseline = false, have_injected = false;
  std::map<int, std::pair<Eigen::VectorXd, long>> suite_burst;  // per-suite row sums + rows
  json spe_plot;
  json assess_log = json::array();
  std::optional<EventWindow> sweep_window;

  double gated_s = 0.0, ungated_s = 0.0, threat_acc_sum = 0.0;

  for (int i = 0; i < cfg.windows; ++i) {
    try {
      EventWindow base =
          generate_baseline(traffic.catalog, cfg.N, derive_seed(cfg.master_seed, 1000 + i));
      base.id = window_name(i);
      EventWindow w = base;
      if (want_injected[i]) {
        const std::uint64_t iseed = derive_seed(cfg.master_seed, 2000 + i);
        w = cfg.injection_mode == "fixed"
                ? inject_attacks_exact(base, traffic.catalog, traffic.signatures,
                                       cfg.bursts_per_window, cfg.burst_len, cfg.intensity, iseed)
                : inject_attacks(base, traffic.catalog, traffic.signatures, cfg.poisson_rate,
                                 cfg.burst_len, cfg.intensity, iseed);
      }
      if (!sweep_window) sweep_window = w;
      if (cfg.emit_windows)
        store_window(w, (fs::path(cfg.out_dir) / "windows" / (w.id + ".json")).string(),
                     WindowFormat::Json);

      PathAssessment a = pipeline.path_info_assurance(w);

      // One measurement per window covers both runtime views: the ungated run
      // classifies everything, the gated run only what detection flagged.
      if (cfg.measure_ungated) {
        const auto t0 = steady::now();
        pipeline.classify(w);
        const double dt = seconds_since(t0);
        ungated_s += dt;
        if (a.report.anomalous) gated_s += dt;
      }

      const bool injected = !w.labels.empty();
      const bool flagged = a.report.anomalous;
      ++rep.detection.windows;
      if (injected)
        ++rep.detection.injected_windows;
      else
        ++rep.detection.unlabeled_windows;
      if (flagged) ++rep.detection.flagged_windows;
      if (flagged && injected) ++rep.detection.detected_injected_windows;
      if (flagged && !injected) ++rep.detection.false_positive_windows;
      if (!flagged && !injected) ++rep.detection.true_negative_windows;

      std::set<int> true_suites;
      for (const InjectionRecord& rec : w.labels) {
        true_suites.insert(rec.suite_id);
        SuiteMetrics& sm = suites[rec.suite_id];
        sm.suite_id = rec.suite_id;
        ++sm.instances;
        if (flagged)
          ++sm.detected;
        else
          ++sm.false_neg;
      }

      std::optional<int> pred;
      double pred_prob = 0.0;
      if (flagged && !a.matches.empty() && a.matches.signatures[0]) {
        pred = *a.matches.signatures[0];
        pred_prob = a.matches.probabilities[0];
      }
      if (flagged) ++rep.classification.forwarded;
      if (flagged && pred && !true_suites.count(*pred)) ++suites[*pred].false_pos;
      if (flagged && injected) {
        ++rep.classification.detected_injected;
        if (pred && true_suites.count(*pred) &&
            pred_prob >= cfg.pipeline.classification_threshold)
          ++rep.classification.classified_high_conf;
        double o_true = 0.0;
        for (const InjectionRecord& rec : w.labels) {
          auto it = threat_levels.find(rec.suite_id);
          if (it != threat_levels.end()) o_true += it->second;
        }
        if (o_true > 0.0)
          threat_acc_sum += std::max(0.0, 1.0 - std::abs(a.threat.score - o_true) / o_true);
      }

      // plot accumulators
      if (injected) {
        injected_totals += w.samples.colwise().sum().transpose();
        have_injected = true;
        for (const InjectionRecord& rec : w.labels) {
          auto& [sum, rows] = suite_burst
                                  .try_emplace(rec.suite_id, Eigen::VectorXd::Zero(nf), 0L)
                                  .first->second;
          for (int t = rec.start_row; t <= rec.end_row && t < w.rows(); ++t)
            sum += w.samples.row(t).transpose();
          rows += rec.end_row - rec.start_row + 1;
        }
      } else {
        baseline_totals += w.samples.colwise().sum().transpose();
        have_baseline = true;
      }
      if (flagged && spe_plot.is_null())
        spe_plot = {{"window", w.id},
                    {"spe", to_vec(a.report.spe)},
                    {"threshold", a.report.threshold}};

      assess_log.push_back(
          {{"window", w.id},
           {"injected", injected},
           {"suites", std::vector<int>(true_suites.begin(), true_suites.end())},
           {"anomalous", flagged},
           {"top_suite", pred ? json(*pred) : json(nullptr)},
           {"top_prob", pred_prob},
           {"threat", a.threat.score},
           {"assurance", a.assurance}});
    } catch (const Error&) {
      ++rep.window_failures;
    }
  }

  int total_instances = 0, detected_instances = 0;
  for (auto& [sid, sm] : suites) {
    total_instances += sm.instances;
    detected_instances += sm.detected;
    rep.per_suite.push_back(sm);
  }
  rep.detection.instance_detection_rate =
      total_instances > 0 ? double(detected_instances) / total_instances : 0.0;
  rep.detection.false_positive_rate =
      rep.detection.unlabeled_windows > 0
          ? double(rep.detection.false_positive_windows) / rep.detection.unlabeled_windows
          : 0.0;
  rep.classification.classification_rate =
      rep.classification.detected_injected > 0
          ? double(rep.classification.classified_high_conf) / rep.classification.detected_injected
          : 0.0;
  rep.classification.avg_threat_accuracy =
      rep.classification.detected_injected > 0
          ? threat_acc_sum / rep.classification.detected_injected
          : 0.0;

  // Compression-ratio sweep on a truncated copy of the first window,
  // seed-averaged so the MSE trend is stable.
  json reconstruction_plot;
  if (sweep_window) {
    const int sweep_rows = std::min(sweep_window->rows(), 256);
    Eigen::MatrixXd phi = sweep_window->samples.topRows(sweep_rows);
    EventWindow sw;
    sw.id = sweep_window->id;
    sw.samples = phi;
    int overlay_col = 0;
    phi.colwise().sum().maxCoeff(&overlay_col);
    const double pipeline_ratio = cfg.pipeline.ratio > 0.0 ? cfg.pipeline.ratio : 0.3;
    double best_gap = 1e300;
    for (double ratio : cfg.sweep_ratios) {
      const int M = std::clamp(static_cast<int>(std::floor(ratio * sweep_rows)), 1, sweep_rows);
      CsSweepPoint point;
      point.ratio = ratio;
      const int avg_seeds = 3;
      for (int s = 0; s < avg_seeds; ++s) {
        SensingMatrix U =
            build_sensing_matrix(sweep_rows, M, derive_seed(cfg.pipeline.sampler.seed, s));
        CompressedWindow comp = compress(U, sw);
        const auto t0 = steady::now();
        Eigen::MatrixXd rec = reconstruct(U, comp, std::max(1, M / 4));
        point.seconds += seconds_since(t0);
        point.mse += reconstruction_mse(phi, rec);
        if (s == 0 && std::abs(ratio - pipeline_ratio) < best_gap) {
          reconstruction_plot = {
              {"window", sw.id},
              {"feature", traffic.catalog.features[overlay_col].id},
              {"ratio", ratio},
              {"original", to_vec(phi.col(overlay_col))},
              {"reconstructed", to_vec(rec.col(overlay_col))}};
        }
      }
      point.seconds /= avg_seeds;
      point.mse /= avg_seeds;
      if (std::abs(ratio - pipeline_ratio) < best_gap) {
        best_gap = std::abs(ratio - pipeline_ratio);
        rep.cs.mse = point.mse;
      }
      rep.cs.sweep.push_back(point);
    }
  }
  const SensingMatrix& sensing = pipeline.sensing(cfg.N);
  rep.cs.M = sensing.M;
  rep.cs.N = sensing.N;
  rep.cs.ratio = double(sensing.M) / double(sensing.N);

  rep.runtime.gated_seconds = std::max(gated_s, 1e-9);
  rep.runtime.ungated_seconds = std::max(ungated_s, 1e-9);
  rep.runtime.total_seconds = std::max(seconds_since(t_run), 1e-9);

  // artifacts
  const fs::path out(cfg.out_dir);
  write_text(out / "config_used.json", experiment_config_to_json(cfg));
  write_text(out / "metrics.json", metrics_to_json(rep));
  write_text(out / "runtime.json", runtime_to_json(rep));
  write_text(out / "assessments.json", assess_log.dump(2));

  json plot_source;
  json features = json::array(), indicators = json::array(), rates = json::array();
  for (const FeatureDef& f : traffic.catalog.features) {
    features.push_back(f.id);
    indicators.push_back(f.indicator);
    rates.push_back(f.baseline_rate);
  }
  plot_source["features"] = features;
  plot_source["indicators"] = indicators;
  plot_source["baseline_rates"] = rates;
  plot_source["baseline_totals"] = have_baseline ? json(to_vec(baseline_totals)) : json(nullptr);
  plot_source["injected_totals"] = have_injected ? json(to_vec(injected_totals)) : json(nullptr);
  if (have_injected) {
    json profile = json::array();
    for (const AttackSignature& s : traffic.signatures) {
      auto it = suite_burst.find(s.suite_id);
      if (it == suite_burst.end()) continue;
      json entry = {{"suite", s.suite_id},
                    {"threat_level", s.threat_level},
                    {"features", s.feature_set},
                    {"rows", it->second.second}};
      Eigen::VectorXd mean = it->second.first / double(std::max(it->second.second, 1L));
      entry["burst_mean"] = to_vec(mean);
      profile.push_back(entry);
    }
    plot_source["signature_profile"] = profile;
  } else {
    plot_source["signature_profile"] = nullptr;
  }
  plot_source["reconstruction"] =
      reconstruction_plot.is_null() ? json(nullptr) : reconstruction_plot;
  plot_source["spe"] = spe_plot.is_null() ? json(nullptr) : spe_plot;
  plot_source["runtime"] = {{"gated_seconds", rep.runtime.gated_seconds},
                            {"ungated_seconds", rep.runtime.ungated_seconds}};
  json sweep = json::array();
  for (const CsSweepPoint& p : rep.cs.sweep)
    sweep.push_back({{"ratio", p.ratio}, {"mse", p.mse}, {"seconds", p.seconds}});
  plot_source["sweep"] = sweep;
  write_text(out / "plot_source.json", plot_source.dump(2));

  return rep;
}

namespace {

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ostringstream os;
  for (size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << csv_escape(header[i]);
  os << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_escape(row[i]);
    os << "\n";
  }
  write_text(path, os.str());
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

std::vector<std::string> emit_plots(const std::string& artifacts_dir) {
  const fs::path dir(artifacts_dir);
  std::vector<std::string> missing;
  for (const char* name : {"plot_source.json", "metrics.json", "runtime.json"})
    if (!fs::exists(dir / name)) missing.push_back(name);
  if (!missing.empty()) {
    std::string msg = "missing run artifacts:";
    for (const std::string& m : missing) msg += " " + m;
    throw Error(ErrorKind::MissingArtifact, msg);
  }

  json src = load_json(dir / "plot_source.json");
  const fs::path plots = dir / "plots";
  fs::create_directories(plots);

  std::vector<std::string> emitted;
  json absent = json::array();
  auto features = src.at("features").get<std::vector<std::string>>();
  auto indicators = src.at("indicators").get<std::vector<std::string>>();

  auto totals_csv = [&](const char* key, const char* file, const char* reason) {
    if (src.at(key).is_null()) {
      absent.push_back({{"figure", file}, {"reason", reason}});
      return;
    }
    auto totals = src.at(key).get<std::vector<double>>();
    const double sum = std::accumulate(totals.begin(), totals.end(), 0.0);
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < totals.size(); ++i)
      rows.push_back({features[i], indicators[i], fmt(totals[i]),
                      fmt(sum > 0 ? 100.0 * totals[i] / sum : 0.0)});
    write_csv(plots / file, {"feature", "indicator", "total", "percent"}, rows);
    emitted.push_back((plots / file).string());
  };
  totals_csv("baseline_totals", "fig6_baseline_features.csv", "no baseline windows in run");
  totals_csv("injected_totals", "fig7_injected_features.csv", "no injected windows in run");

  if (src.at("signature_profile").is_null()) {
    absent.push_back(
        {{"figure", "fig8_signature_profile.csv"}, {"reason", "no injected windows in run"}});
  } else {
    auto rates = src.at("baseline_rates").get<std::vector<double>>();
    std::vector<std::vector<std::string>> rows;
    for (const json& entry : src.at("signature_profile")) {
      auto burst_mean = entry.at("burst_mean").get<std::vector<double>>();
      for (const auto& fid : entry.at("features").get<std::vector<std::string>>()) {
        auto it = std::find(features.begin(), features.end(), fid);
        if (it == features.end()) continue;
        const size_t idx = it - features.begin();
        rows.push_back({std::to_string(entry.at("suite").get<int>()), fid, fmt(rates[idx]),
                        fmt(burst_mean[idx])});
      }
    }
    write_csv(plots / "fig8_signature_profile.csv",
              {"suite", "feature", "baseline_rate", "burst_mean"}, rows);
    emitted.push_back((plots / "fig8_signature_profile.csv").string());
  }

  if (src.at("reconstruction").is_null()) {
    absent.push_back({{"figure", "fig9_reconstruction.csv"}, {"reason", "no windows processed"}});
  } else {
    const json& rec = src.at("reconstruction");
    auto original = rec.at("original").get<std::vector<double>>();
    auto reconstructed = rec.at("reconstructed").get<std::vector<double>>();
    std::vector<std::vector<std::string>> rows;
    for (size_t t = 0; t < original.size(); ++t)
      rows.push_back({std::to_string(t), fmt(original[t]), fmt(reconstructed[t])});
    write_csv(plots / "fig9_reconstruction.csv", {"t", "original", "reconstructed"}, rows);
    emitted.push_back((plots / "fig9_reconstruction.csv").string());
  }

  if (src.at("sweep").empty()) {
    absent.push_back({{"figure", "fig10_ratio_mse.csv"}, {"reason", "no sweep data"}});
  } else {
    std::vector<std::vector<std::string>> rows;
    for (const json& p : src.at("sweep"))
      rows.push_back({fmt(p.at("ratio").get<double>()), fmt(p.at("mse").get<double>()),
                      fmt(p.at("seconds").get<double>())});
    write_csv(plots / "fig10_ratio_mse.csv", {"ratio", "mse", "seconds"}, rows);
    emitted.push_back((plots / "fig10_ratio_mse.csv").string());
  }

  if (src.at("spe").is_null()) {
    absent.push_back({{"figure", "fig11_spe.csv"}, {"reason", "no window flagged anomalous"}});
  } else {
    auto spe = src.at("spe").at("spe").get<std::vector<double>>();
    const double threshold = src.at("spe").at("threshold").get<double>();
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < spe.size(); ++i)
      rows.push_back({features[i], fmt(spe[i]), fmt(threshold)});
    write_csv(plots / "fig11_spe.csv", {"feature", "spe", "threshold"}, rows);
    emitted.push_back((plots / "fig11_spe.csv").string());
  }

  {
    const json& rt = src.at("runtime");
    write_csv(plots / "fig12_runtime.csv", {"phase", "gated_seconds", "ungated_seconds"},
              {{"classification", fmt(rt.at("gated_seconds").get<double>()),
                fmt(rt.at("ungated_seconds").get<double>())}});
    emitted.push_back((plots / "fig12_runtime.csv").string());
  }

  json manifest = {{"emitted", emitted}, {"absent", absent}};
  write_text(plots / "plots_manifest.json", manifest.dump(2));
  return emitted;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          cell += '"';
          ++i;
        } else if (c == '"') {
          quoted = false;
        } else {
          cell += c;
        }
      } else if (c == '"' && cell.empty()) {
        quoted = true;
      } else if (c == ',') {
        row.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pathsec
