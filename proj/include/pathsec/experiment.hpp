#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathsec/assurance.hpp"

namespace pathsec {

struct SuiteMetrics {
  int suite_id = 0;
  int instances = 0;   // injected bursts of this suite
  int detected = 0;    // instances inside windows flagged anomalous
  int false_neg = 0;   // instances - detected
  int false_pos = 0;   // flagged windows classified as this suite without carrying it
};

struct DetectionMetrics {
  int windows = 0;
  int injected_windows = 0;
  int unlabeled_windows = 0;
  int flagged_windows = 0;
  int detected_injected_windows = 0;
  int false_positive_windows = 0;  // flagged but unlabeled
  int true_negative_windows = 0;
  double instance_detection_rate = 0.0;
  double false_positive_rate = 0.0;  // over unlabeled windows
};

struct ClassificationMetrics {
  int forwarded = 0;             // windows passed to the classifier (gating)
  int detected_injected = 0;     // forwarded windows that carry injections
  int classified_high_conf = 0;  // correct suite at probability >= threshold
  double classification_rate = 0.0;
  double avg_threat_accuracy = 0.0;
  double confidence_threshold = 0.75;
};

struct RuntimeMetrics {
  double gated_seconds = 0.0;    // classification phase, flagged windows only
  double ungated_seconds = 0.0;  // classification phase over every window
  double total_seconds = 0.0;
};

struct CsSweepPoint {
  double ratio = 0.0;
  double mse = 0.0;
  double seconds = 0.0;
};

struct CsMetrics {
  double ratio = 0.0;  // pipeline compression ratio M/N
  double mse = 0.0;    // seed-averaged reconstruction MSE at that ratio
  int M = 0;
  int N = 0;
  std::vector<CsSweepPoint> sweep;
};

struct MetricsReport {
  std::vector<SuiteMetrics> per_suite;
  DetectionMetrics detection;
  ClassificationMetrics classification;
  RuntimeMetrics runtime;
  CsMetrics cs;
  int window_failures = 0;
};

/// Deterministic serialization: everything except runtimes, so identical
/// seeded configs produce byte-identical output. Runtimes go to their own
/// document.
std::string metrics_to_json(const MetricsReport& report);
std::string runtime_to_json(const MetricsReport& report);

struct ExperimentConfig {
  int windows = 200;
  int N = 1024;
  double injected_fraction = 0.75;
  std::string injection_mode = "fixed";  // "fixed" | "poisson"
  int bursts_per_window = 1;
  double poisson_rate = 2.0;
  int burst_len = 64;
  double intensity = 8.0;
  PipelineConfig pipeline;
  std::uint64_t master_seed = 20240521;
  std::string traffic_config_path;  // empty: built-in catalog + suites
  std::string out_dir = "out";
  std::vector<double> sweep_ratios = {0.1, 0.2, 0.3, 0.5};
  bool measure_ungated = true;
  bool emit_windows = false;  // also write every generated window to out_dir/windows

  void validate() const;
};

ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

/// Generates the seeded dataset, runs the per-window pipeline, scores
/// detections and classifications against ground-truth labels, and writes
/// metrics.json / runtime.json / plot_source.json / assessments.json /
/// config_used.json into cfg.out_dir.
MetricsReport run_experiment(const ExperimentConfig& cfg);

/// Renders plot-ready CSVs (fig6..fig12 analogues) from a completed run's
/// artifacts directory into <dir>/plots, plus a manifest naming what was
/// emitted and what was absent. Missing artifacts raise an error listing the
/// absent stages.
std::vector<std::string> emit_plots(const std::string& artifacts_dir);

/// Minimal CSV reader for the emitted plot files (no quoting or escapes).
std::vector<std::vector<std::string>> read_csv(const std::string& path);

}  // namespace pathsec
