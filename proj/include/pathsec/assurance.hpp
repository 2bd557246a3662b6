#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pathsec/anomaly.hpp"
#include "pathsec/cs.hpp"
#include "pathsec/signature.hpp"
#include "pathsec/traffic.hpp"
#include "pathsec/types.hpp"

namespace pathsec {

struct EdgeFactors {
  double assurance = 1.0;   // I_i
  double cost = 1.0;        // C_i
  double encryption = 1.0;  // E_i
};

struct GraphEdge {
  std::string from;
  std::string to;
  EdgeFactors factors;
};

/// Undirected multipath graph with named simple paths. Edge lookup accepts
/// either endpoint order.
struct MultipathGraph {
  std::vector<std::string> vertices;
  std::vector<GraphEdge> edges;
  std::map<std::string, std::vector<std::string>> paths;

  void validate() const;                    // throws on dangling paths/nonpositive factors
  const GraphEdge* find_edge(const std::string& a, const std::string& b) const;
  GraphEdge* find_edge(const std::string& a, const std::string& b);

  /// Consume a fresh assessment: every edge on the named path takes the new
  /// assurance factor.
  void set_path_assurance(const std::string& path_id, double assurance);
};

MultipathGraph load_graph(const std::string& path);
void store_graph(const MultipathGraph& graph, const std::string& path);
/// Seven-vertex example graph with two disjoint four-edge paths.
MultipathGraph default_graph();

struct ThreatContribution {
  int cluster_id = 0;
  int suite_id = 0;
  int threat_level = 0;   // W_i
  double probability = 0.0;
};

struct PathThreat {
  std::vector<ThreatContribution> contributions;
  double score = 0.0;  // O_f = sum W_i * Prob(S_i)
};

/// Eq-style threat accumulation over matched clusters; clusters without a
/// selected signature contribute nothing.
PathThreat threat_score(const std::vector<MatchResult>& matches,
                        const std::vector<AttackSignature>& signatures);

/// I = 1/O_f, with the O_f = 0 degenerate mapped to i_max.
double assurance_factor(const PathThreat& threat, double i_max = 1.0);

/// T = L * sum over paths, sum over path edges, of I*C*E.
double path_throughput(const MultipathGraph& graph, const std::vector<std::string>& path_ids,
                       double message_length);

struct PipelineConfig {
  double ratio = 0.3;      // M/N; <= 0 switches to epsilon-based sizing
  SamplerConfig sampler;   // epsilon / const_C / cs_seed
  std::uint64_t reference_seed = 777;  // baseline window backing the detector
  double beta = 0.1;
  double power_fraction = 0.9;
  bool printed_q_variant = false;
  MatchConfig match;
  double i_max = 1.0;
  double classification_threshold = 0.75;
};

struct PathAssessment {
  std::string window_id;
  std::string path_id;
  AnomalyReport report;
  MatchTriple matches;
  PathThreat threat;
  double assurance = 1.0;
  std::string compressed_ref;  // id of the stored compressed window
  std::vector<std::string> stage_errors;  // per-stage failures, batch keeps going
};

std::string path_assessment_to_json(const PathAssessment& a);

/// Per-window pipeline: sensing matrix + compression, residual-subspace
/// detection against a seeded baseline reference, gated signature matching on
/// the uncompressed window, threat/assurance scoring. Every processed window
/// leaves exactly one compressed copy in the store.
class Pipeline {
 public:
  Pipeline(TrafficConfig traffic, PipelineConfig config);

  PathAssessment path_info_assurance(const EventWindow& window,
                                     const std::string& path_id = "");

  /// Classification stage alone (used for the ungated timing comparison).
  MatchTriple classify(const EventWindow& window);

  const SensingMatrix& sensing(int N);               // built lazily per window length
  const Spectrum& reference_spectrum(int N);
  const QStatParams& reference_threshold(int N);
  const BaselineProfile& baseline_profile(int N);

  const std::vector<CompressedWindow>& stored() const { return stored_; }
  int match_invocations() const { return match_invocations_; }
  const TrafficConfig& traffic() const { return traffic_; }
  const PipelineConfig& config() const { return config_; }

 private:
  void ensure_reference(int N);
  Eigen::MatrixXd detector_rows(const Eigen::MatrixXd& Y) const;

  TrafficConfig traffic_;
  PipelineConfig config_;
  int ref_n_ = -1;
  SensingMatrix sensing_;
  // Compressed-row positions the detector fits and scores on.  The constant
  // (k = 0) transform row measures the window mean directly; when the seeded
  // subset happens to include it, that one deterministic row sits hundreds of
  // sigmas from the oscillatory rows and would dominate the covariance fit, so
  // detection skips it.  Stored windows keep every row for reconstruction.
  std::vector<int> detect_keep_;
  Spectrum ref_spectrum_;
  QStatParams ref_q_;
  BaselineProfile profile_;
  std::vector<CompressedWindow> stored_;
  int match_invocations_ = 0;
};

}  // namespace pathsec
