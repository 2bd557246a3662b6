#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace pathsec {

inline constexpr int kNumFeatures = 19;

struct FeatureDef {
  std::string id;         // "f1".."f19"
  std::string indicator;  // protocol/flag label, e.g. "ICMP Redirect"
  double baseline_rate = 0.0;        // mean count per sample tick
  double baseline_dispersion = 0.0;  // per-feature negative-binomial spread (0 = Poisson)
};

struct FeatureCatalog {
  std::vector<FeatureDef> features;
  // Dispersion of the shared multiplicative load factor applied to every
  // feature within a sample tick; induces the cross-feature correlation that
  // concentrates baseline spectral power in a few principal directions.
  double load_dispersion = 0.0;

  int index_of(const std::string& feature_id) const;  // -1 when absent
  void validate() const;                              // throws Error on violation
};

struct AttackSignature {
  int suite_id = 0;                      // 1..3 shipped, extensible
  std::vector<std::string> feature_set;  // S_r, nonempty, subset of catalog ids
  int threat_level = 1;                  // W_r in [1,5]
  std::string description;
};

struct InjectionRecord {
  int suite_id = 0;
  int start_row = 0;  // inclusive
  int end_row = 0;    // inclusive
};

enum class WindowKind { Baseline, Injected };

struct EventWindow {
  std::string id;
  int duration_minutes = 30;
  Eigen::MatrixXd samples;  // N x N_f nonnegative integer counts
  std::vector<InjectionRecord> labels;
  WindowKind kind = WindowKind::Baseline;

  int rows() const { return static_cast<int>(samples.rows()); }
  int cols() const { return static_cast<int>(samples.cols()); }
};

struct WindowStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;       // sample (ddof=1)
  Eigen::MatrixXd correlation;  // Pearson; constant columns get 0 off-diagonal by convention
};

}  // namespace pathsec
