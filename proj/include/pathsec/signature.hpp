#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "pathsec/types.hpp"

namespace pathsec {

/// One agglomeration step. Ids follow the usual linkage convention: leaves are
/// 0..n-1, the cluster produced by step s gets id n+s.
struct MergeStep {
  int left = 0;
  int right = 0;
  double distance = 0.0;
  int new_id = 0;
  int size = 0;  // members in the merged cluster
};

struct Dendrogram {
  int n_leaves = 0;
  std::vector<MergeStep> steps;  // distances nondecreasing (complete linkage)
};

struct Cluster {
  int id = 0;                        // leaf index or n+step id
  std::vector<int> members;          // row indices into the window
  std::vector<int> active_features;  // H_i, column indices (filled by valid_clusters)
  double cophenetic = 0.0;           // formation height; 0 for singletons
  double inconsistency = 0.0;        // depth-2 dendrogram inconsistency; 0 for singletons
  int size() const { return static_cast<int>(members.size()); }
};

struct AgglomerateResult {
  Dendrogram dendrogram;
  std::vector<Cluster> cut;  // clusters remaining when merging stopped
  double delta = 0.0;        // threshold actually applied
};

struct MatchResult {
  int cluster_id = 0;
  std::optional<int> suite_id;  // empty when no signature scored above zero
  double probability = 0.0;     // N_i / N_k of the selected signature
  int n_matched = 0;            // N_i
  int n_signature = 0;          // N_k
};

/// Parallel-array match output (clusters, signatures, probabilities) in
/// candidate rank order, plus the per-cluster detail records.
struct MatchTriple {
  std::vector<int> clusters;
  std::vector<std::optional<int>> signatures;
  std::vector<double> probabilities;
  std::vector<MatchResult> details;
  std::vector<std::vector<int>> significant_features;  // per candidate cluster
  bool empty() const { return clusters.empty(); }
};

/// Per-feature mean/stddev and average entropy of a stored baseline window;
/// normalizes cluster inputs and anchors the significance comparison.
struct BaselineProfile {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // sample (ddof=1)
  double entropy = 0.0;    // H(F), bits
  int rows = 0;
};

BaselineProfile build_baseline_profile(const EventWindow& baseline);

/// Complete linkage: max Euclidean distance over cross pairs of member rows.
double linkage_distance(const Cluster& a, const Cluster& b, const Eigen::MatrixXd& points);

/// Agglomerative complete-linkage clustering over sample rows. Merges the
/// current nearest pair until that distance exceeds delta or one cluster
/// remains; with max_clusters > 0 merging continues past delta until the cut
/// has at most that many clusters. Ties resolve to the lowest (left, right)
/// cluster-id pair, so the result is deterministic.
AgglomerateResult agglomerate(const Eigen::MatrixXd& samples, double delta,
                              int max_clusters = 0);

/// 0.5 x the maximum pairwise distance; the default merge threshold when a
/// config leaves delta unset.
double auto_delta(const Eigen::MatrixXd& samples);

/// Filters the cut to clusters whose size exceeds min_freq_fraction of the
/// window and whose active-feature set is nonempty (cluster mean above the
/// baseline mean by at least two standard errors). Survivors come back ranked
/// by cophenetic distance, then inconsistency, both descending.
std::vector<Cluster> valid_clusters(const std::vector<Cluster>& cut,
                                    const Eigen::MatrixXd& samples,
                                    const BaselineProfile& baseline,
                                    double min_freq_fraction = 0.02);

/// Average entropy (bits) of the per-feature count distribution, Prob(f_j) =
/// count_j / total. Throws EntropyUndefined when every count is zero.
double feature_entropy(const Eigen::VectorXd& totals);
double baseline_entropy(const Eigen::MatrixXd& samples);

/// Entropy of the feature distribution restricted to rows where the
/// conditioning feature exceeds its median over the given rows. Throws
/// ConditionalUndefined when no row qualifies.
double conditional_entropy(const Eigen::MatrixXd& samples, int conditioning_feature);

/// Active features of the cluster whose conditional entropy exceeds
/// baseline_H. Features whose conditioning event selects no rows (constant
/// columns) are skipped.
std::vector<int> significant_features(const Cluster& cluster, const Eigen::MatrixXd& samples,
                                      double baseline_H);

struct MatchConfig {
  double delta = -1.0;  // < 0: use auto_delta of the normalized samples
  double min_freq_fraction = 0.02;
  int max_clusters = 0;
  bool in_window_entropy = false;  // compare against the window's own H(F) instead
};

/// Algorithm driver: normalize rows by baseline means, cluster, filter to
/// valid candidates, extract significant features, and score each candidate
/// against every signature by N_i/N_k (ties to the lower suite id).
MatchTriple signature_match_prob(const std::vector<AttackSignature>& signatures,
                                 const Eigen::MatrixXd& samples,
                                 const FeatureCatalog& catalog,
                                 const BaselineProfile& baseline,
                                 const MatchConfig& cfg = {});

std::string match_triple_to_json(const MatchTriple& triple);

}  // namespace pathsec
