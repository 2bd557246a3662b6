#include "pathsec/signature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <nlohmann/json.hpp>

#include "pathsec/errors.hpp"

namespace pathsec {

namespace {

double entropy_bits(const Eigen::VectorXd& totals, double total) {
  double h = 0.0;
  for (int j = 0; j < totals.size(); ++j) {
    const double p = totals(j) / total;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

// Lexicographic pair order used everywhere a merge choice could tie: distance
// first, then the (low, high) cluster-id pair.
struct PairKey {
  double dist;
  int lo;
  int hi;
  bool operator<(const PairKey& o) const {
    if (dist != o.dist) return dist < o.dist;
    if (lo != o.lo) return lo < o.lo;
    return hi < o.hi;
  }
};

PairKey make_key(double dist, int id_a, int id_b) {
  return {dist, std::min(id_a, id_b), std::max(id_a, id_b)};
}

}  // namespace

BaselineProfile build_baseline_profile(const EventWindow& baseline) {
  const int n = baseline.rows();
  if (n < 2)
    throw Error(ErrorKind::InsufficientSamples,
                "baseline profile needs >= 2 rows, got " + std::to_string(n));
  BaselineProfile p;
  p.rows = n;
  p.mean = baseline.samples.colwise().mean();
  Eigen::MatrixXd centered = baseline.samples.rowwise() - p.mean.transpose();
  p.stddev = (centered.array().square().colwise().sum() / double(n - 1)).sqrt();
  p.entropy = baseline_entropy(baseline.samples);
  return p;
}

double linkage_distance(const Cluster& a, const Cluster& b, const Eigen::MatrixXd& points) {
  if (a.members.empty() || b.members.empty())
    throw Error(ErrorKind::InvalidDimension, "linkage distance needs nonempty clusters");
  std::set<int> seen(a.members.begin(), a.members.end());
  for (int m : b.members)
    if (seen.count(m))
      throw Error(ErrorKind::InvalidDimension,
                  "clusters overlap at sample " + std::to_string(m));
  double best = 0.0;
  for (int i : a.members) {
    if (i < 0 || i >= points.rows())
      throw Error(ErrorKind::InvalidDimension, "member index out of range");
    for (int j : b.members) {
      if (j < 0 || j >= points.rows())
        throw Error(ErrorKind::InvalidDimension, "member index out of range");
      best = std::max(best, (points.row(i) - points.row(j)).norm());
    }
  }
  return best;
}

AgglomerateResult agglomerate(const Eigen::MatrixXd& samples, double delta, int max_clusters) {
  const int n = static_cast<int>(samples.rows());
  if (n < 1) throw Error(ErrorKind::InsufficientSamples, "agglomerate needs >= 1 sample");
  if (delta < 0.0 && !std::isinf(delta))
    throw Error(ErrorKind::Config, "delta must be >= 0");

  AgglomerateResult out;
  out.delta = delta;
  out.dendrogram.n_leaves = n;

  // Slot-reuse bookkeeping: a merge writes the new cluster into the left slot
  // and retires the right one. Distances live in a flat n*n buffer.
  std::vector<char> active(n, 1);
  std::vector<int> cid(n), csize(n, 1);
  std::vector<double> height(n, 0.0);
  std::vector<std::vector<int>> members(n);
  for (int i = 0; i < n; ++i) {
    cid[i] = i;
    members[i] = {i};
  }

  std::vector<double> dist(static_cast<size_t>(n) * n, 0.0);
  auto d = [&](int i, int j) -> double& { return dist[static_cast<size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (samples.row(i) - samples.row(j)).norm();

  // Per-slot nearest partner under PairKey order. Complete linkage only grows
  // distances on merge, so a cached entry stays optimal unless its partner
  // was one of the merged slots.
  struct Cand {
    double dist = 0.0;
    int partner = -1;
  };
  std::vector<Cand> cand(n);
  auto recompute = [&](int s) {
    cand[s].partner = -1;
    PairKey best{std::numeric_limits<double>::infinity(), 0, 0};
    for (int t = 0; t < n; ++t) {
      if (t == s || !active[t]) continue;
      PairKey k = make_key(d(s, t), cid[s], cid[t]);
      if (cand[s].partner < 0 || k < best) {
        best = k;
        cand[s].dist = k.dist;
        cand[s].partner = t;
      }
    }
  };
  for (int s = 0; s < n; ++s) recompute(s);

  int active_count = n;
  int next_id = n;
  while (active_count > 1) {
    int sa = -1;
    PairKey best{std::numeric_limits<double>::infinity(), 0, 0};
    for (int s = 0; s < n; ++s) {
      if (!active[s] || cand[s].partner < 0) continue;
      PairKey k = make_key(cand[s].dist, cid[s], cid[cand[s].partner]);
      if (sa < 0 || k < best) {
        best = k;
        sa = s;
      }
    }
    const int sb = cand[sa].partner;
    const bool over_cap = max_clusters > 0 && active_count > max_clusters;
    if (best.dist > delta && !over_cap) break;

    MergeStep step;
    step.left = std::min(cid[sa], cid[sb]);
    step.right = std::max(cid[sa], cid[sb]);
    step.distance = best.dist;
    step.new_id = next_id++;
    step.size = csize[sa] + csize[sb];
    out.dendrogram.steps.push_back(step);

    members[sa].insert(members[sa].end(), members[sb].begin(), members[sb].end());
    csize[sa] = step.size;
    cid[sa] = step.new_id;
    height[sa] = best.dist;
    active[sb] = 0;
    --active_count;

    for (int s = 0; s < n; ++s) {
      if (!active[s] || s == sa) continue;
      d(s, sa) = d(sa, s) = std::max(d(s, sa), d(s, sb));
    }
    recompute(sa);
    for (int s = 0; s < n; ++s)
      if (active[s] && s != sa && (cand[s].partner == sa || cand[s].partner == sb)) recompute(s);
  }

  // Depth-2 inconsistency per merge node: z-score of the node's height within
  // {itself, its direct child merges}.
  const int n_steps = static_cast<int>(out.dendrogram.steps.size());
  std::vector<double> inconsistency(n_steps, 0.0);
  for (int m = 0; m < n_steps; ++m) {
    const MergeStep& s = out.dendrogram.steps[m];
    std::vector<double> hs = {s.distance};
    if (s.left >= n) hs.push_back(out.dendrogram.steps[s.left - n].distance);
    if (s.right >= n) hs.push_back(out.dendrogram.steps[s.right - n].distance);
    if (hs.size() > 1) {
      const double mean = std::accumulate(hs.begin(), hs.end(), 0.0) / hs.size();
      double var = 0.0;
      for (double h : hs) var += (h - mean) * (h - mean);
      const double sd = std::sqrt(var / (hs.size() - 1));
      if (sd > 0.0) inconsistency[m] = (s.distance - mean) / sd;
    }
  }

  for (int s = 0; s < n; ++s) {
    if (!active[s]) continue;
    Cluster c;
    c.id = cid[s];
    c.members = members[s];
    std::sort(c.members.begin(), c.members.end());
    c.cophenetic = height[s];
    if (c.id >= n) c.inconsistency = inconsistency[c.id - n];
    out.cut.push_back(c);
  }
  std::sort(out.cut.begin(), out.cut.end(),
            [](const Cluster& a, const Cluster& b) { return a.id < b.id; });
  return out;
}

double auto_delta(const Eigen::MatrixXd& samples) {
  const int n = static_cast<int>(samples.rows());
  double best = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      best = std::max(best, (samples.row(i) - samples.row(j)).norm());
  return 0.5 * best;
}

std::vector<Cluster> valid_clusters(const std::vector<Cluster>& cut,
                                    const Eigen::MatrixXd& samples,
                                    const BaselineProfile& baseline,
                                    double min_freq_fraction) {
  if (baseline.mean.size() != samples.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "baseline profile has " + std::to_string(baseline.mean.size()) +
                    " features but window has " + std::to_string(samples.cols()));
  const double min_size = min_freq_fraction * double(samples.rows());
  std::vector<Cluster> survivors;
  for (const Cluster& c : cut) {
    if (double(c.size()) <= min_size) continue;
    Cluster kept = c;
    kept.active_features.clear();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(samples.cols());
    for (int m : c.members) mean += samples.row(m).transpose();
    mean /= double(c.size());
    const double inv_sqrt = 1.0 / std::sqrt(double(c.size()));
    for (int j = 0; j < samples.cols(); ++j)
      if (mean(j) > baseline.mean(j) + 2.0 * baseline.stddev(j) * inv_sqrt)
        kept.active_features.push_back(j);
    if (kept.active_features.empty()) continue;
    survivors.push_back(kept);
  }
  std::sort(survivors.begin(), survivors.end(), [](const Cluster& a, const Cluster& b) {
    if (a.cophenetic != b.cophenetic) return a.cophenetic > b.cophenetic;
    if (a.inconsistency != b.inconsistency) return a.inconsistency > b.inconsistency;
    return a.id < b.id;
  });
  return survivors;
}

double feature_entropy(const Eigen::VectorXd& totals) {
  double total = 0.0;
  for (int j = 0; j < totals.size(); ++j) {
    if (totals(j) < 0.0)
      throw Error(ErrorKind::Parse, "negative count for feature index " + std::to_string(j));
    total += totals(j);
  }
  if (total <= 0.0)
    throw Error(ErrorKind::EntropyUndefined, "all feature counts are zero");
  return entropy_bits(totals, total);
}

double baseline_entropy(const Eigen::MatrixXd& samples) {
  if (samples.rows() == 0)
    throw Error(ErrorKind::EntropyUndefined, "window has no rows");
  return feature_entropy(samples.colwise().sum());
}

double conditional_entropy(const Eigen::MatrixXd& samples, int conditioning_feature) {
  if (conditioning_feature < 0 || conditioning_feature >= samples.cols())
    throw Error(ErrorKind::InvalidDimension,
                "conditioning feature " + std::to_string(conditioning_feature) +
                    " outside 0.." + std::to_string(samples.cols() - 1));
  const int n = static_cast<int>(samples.rows());
  if (n == 0) throw Error(ErrorKind::ConditionalUndefined, "window has no rows");

  std::vector<double> col(n);
  for (int i = 0; i < n; ++i) col[i] = samples(i, conditioning_feature);
  std::sort(col.begin(), col.end());
  const double median =
      n % 2 == 1 ? col[n / 2] : 0.5 * (col[n / 2 - 1] + col[n / 2]);

  Eigen::VectorXd totals = Eigen::VectorXd::Zero(samples.cols());
  int selected = 0;
  for (int i = 0; i < n; ++i) {
    if (samples(i, conditioning_feature) > median) {
      totals += samples.row(i).transpose();
      ++selected;
    }
  }
  if (selected == 0)
    throw Error(ErrorKind::ConditionalUndefined,
                "no rows where feature " + std::to_string(conditioning_feature) +
                    " exceeds its median");
  return feature_entropy(totals);
}

std::vector<int> significant_features(const Cluster& cluster, const Eigen::MatrixXd& samples,
                                      double baseline_H) {
  Eigen::MatrixXd rows(cluster.size(), samples.cols());
  for (int i = 0; i < cluster.size(); ++i) {
    const int m = cluster.members[i];
    if (m < 0 || m >= samples.rows())
      throw Error(ErrorKind::InvalidDimension, "member index out of range");
    rows.row(i) = samples.row(m);
  }
  std::vector<int> out;
  for (int f : cluster.active_features) {
    try {
      if (conditional_entropy(rows, f) > baseline_H) out.push_back(f);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ConditionalUndefined) throw;
      // constant column: the conditioning event is empty, feature carries no
      // conditional information
    }
  }
  return out;
}

MatchTriple signature_match_prob(const std::vector<AttackSignature>& signatures,
                                 const Eigen::MatrixXd& samples,
                                 const FeatureCatalog& catalog,
                                 const BaselineProfile& baseline,
                                 const MatchConfig& cfg) {
  if (signatures.empty())
    throw Error(ErrorKind::Config, "signature set must be nonempty");
  if (samples.rows() < 1)
    throw Error(ErrorKind::InsufficientSamples, "window has no rows");
  if (baseline.mean.size() != samples.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "baseline profile has " + std::to_string(baseline.mean.size()) +
                    " features but window has " + std::to_string(samples.cols()));

  // Resolve signature feature names to column indices once, in suite order.
  std::vector<AttackSignature> ordered = signatures;
  std::sort(ordered.begin(), ordered.end(),
            [](const AttackSignature& a, const AttackSignature& b) {
              return a.suite_id < b.suite_id;
            });
  std::vector<std::set<int>> sig_idx(ordered.size());
  for (size_t k = 0; k < ordered.size(); ++k) {
    if (ordered[k].feature_set.empty())
      throw Error(ErrorKind::Config,
                  "signature suite " + std::to_string(ordered[k].suite_id) + " has no features");
    for (const std::string& f : ordered[k].feature_set) {
      const int idx = catalog.index_of(f);
      if (idx < 0)
        throw Error(ErrorKind::UnknownReference,
                    "signature feature '" + f + "' is not in the catalog");
      sig_idx[k].insert(idx);
    }
  }

  // Distances are computed on deviation shape: every feature scaled by its
  // baseline mean so bulk counters do not drown the signature features.
  Eigen::MatrixXd normalized = samples;
  for (int j = 0; j < samples.cols(); ++j)
    normalized.col(j) /= std::max(baseline.mean(j), 1e-9);

  const double delta = cfg.delta < 0.0 ? auto_delta(normalized) : cfg.delta;
  AgglomerateResult agg = agglomerate(normalized, delta, cfg.max_clusters);
  std::vector<Cluster> candidates =
      valid_clusters(agg.cut, samples, baseline, cfg.min_freq_fraction);

  const double H = cfg.in_window_entropy ? baseline_entropy(samples) : baseline.entropy;

  MatchTriple triple;
  for (const Cluster& c : candidates) {
    std::vector<int> sig_features = significant_features(c, samples, H);
    std::set<int> sig_set(sig_features.begin(), sig_features.end());

    MatchResult best;
    best.cluster_id = c.id;
    double max_prob = 0.0;
    for (size_t k = 0; k < ordered.size(); ++k) {
      int n_i = 0;
      for (int f : sig_idx[k])
        if (sig_set.count(f)) ++n_i;
      const int n_k = static_cast<int>(sig_idx[k].size());
      const double prob = double(n_i) / double(n_k);
      if (prob > max_prob) {  // strict: ties keep the lower suite id
        max_prob = prob;
        best.suite_id = ordered[k].suite_id;
        best.probability = prob;
        best.n_matched = n_i;
        best.n_signature = n_k;
      }
    }
    triple.clusters.push_back(c.id);
    triple.signatures.push_back(best.suite_id);
    triple.probabilities.push_back(best.probability);
    triple.details.push_back(best);
    triple.significant_features.push_back(sig_features);
  }
  return triple;
}

std::string match_triple_to_json(const MatchTriple& triple) {
  nlohmann::json j;
  j["clusters"] = triple.clusters;
  j["signatures"] = nlohmann::json::array();
  for (const auto& s : triple.signatures) {
    if (s)
      j["signatures"].push_back(*s);
    else
      j["signatures"].push_back(nullptr);
  }
  j["probabilities"] = triple.probabilities;
  j["significant_features"] = triple.significant_features;
  return j.dump(2);
}

}  // namespace pathsec
