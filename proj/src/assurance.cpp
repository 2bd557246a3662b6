#include "pathsec/assurance.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "pathsec/errors.hpp"

namespace pathsec {

void MultipathGraph::validate() const {
  std::set<std::string> vset(vertices.begin(), vertices.end());
  if (vset.size() != vertices.size())
    throw Error(ErrorKind::Schema, "duplicate vertex in graph");
  for (const GraphEdge& e : edges) {
    if (!vset.count(e.from) || !vset.count(e.to))
      throw Error(ErrorKind::Schema, "edge " + e.from + "-" + e.to + " references unknown vertex");
    if (e.factors.assurance <= 0.0 || e.factors.cost <= 0.0 || e.factors.encryption <= 0.0)
      throw Error(ErrorKind::Schema, "edge " + e.from + "-" + e.to + " has nonpositive factors");
  }
  for (const auto& [name, path] : paths) {
    if (path.size() < 2)
      throw Error(ErrorKind::Schema, "path " + name + " needs at least two vertices");
    std::set<std::string> seen;
    for (const std::string& v : path) {
      if (!vset.count(v))
        throw Error(ErrorKind::Schema, "path " + name + " visits unknown vertex " + v);
      if (!seen.insert(v).second)
        throw Error(ErrorKind::Schema, "path " + name + " revisits vertex " + v);
    }
    for (size_t i = 0; i + 1 < path.size(); ++i)
      if (find_edge(path[i], path[i + 1]) == nullptr)
        throw Error(ErrorKind::Schema,
                    "path " + name + " uses missing edge " + path[i] + "-" + path[i + 1]);
  }
}

const GraphEdge* MultipathGraph::find_edge(const std::string& a, const std::string& b) const {
  for (const GraphEdge& e : edges)
    if ((e.from == a && e.to == b) || (e.from == b && e.to == a)) return &e;
  return nullptr;
}

GraphEdge* MultipathGraph::find_edge(const std::string& a, const std::string& b) {
  return const_cast<GraphEdge*>(static_cast<const MultipathGraph*>(this)->find_edge(a, b));
}

void MultipathGraph::set_path_assurance(const std::string& path_id, double assurance) {
  if (assurance <= 0.0) throw Error(ErrorKind::Config, "assurance must be > 0");
  auto it = paths.find(path_id);
  if (it == paths.end())
    throw Error(ErrorKind::UnknownReference, "unknown path " + path_id);
  const auto& path = it->second;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    GraphEdge* e = find_edge(path[i], path[i + 1]);
    if (e == nullptr)
      throw Error(ErrorKind::UnknownReference,
                  "path " + path_id + " uses missing edge " + path[i] + "-" + path[i + 1]);
    e->factors.assurance = assurance;
  }
}

namespace {

nlohmann::json graph_to_json(const MultipathGraph& g) {
  nlohmann::json j;
  j["vertices"] = g.vertices;
  j["edges"] = nlohmann::json::array();
  for (const GraphEdge& e : g.edges)
    j["edges"].push_back({{"from", e.from},
                          {"to", e.to},
                          {"assurance", e.factors.assurance},
                          {"cost", e.factors.cost},
                          {"encryption", e.factors.encryption}});
  j["paths"] = g.paths;
  return j;
}

}  // namespace

MultipathGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Parse, "cannot open graph file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Parse, "graph file " + path + ": " + e.what());
  }
  MultipathGraph g;
  try {
    g.vertices = j.at("vertices").get<std::vector<std::string>>();
    for (const auto& je : j.at("edges")) {
      GraphEdge e;
      e.from = je.at("from").get<std::string>();
      e.to = je.at("to").get<std::string>();
      e.factors.assurance = je.value("assurance", 1.0);
      e.factors.cost = je.value("cost", 1.0);
      e.factors.encryption = je.value("encryption", 1.0);
      g.edges.push_back(e);
    }
    if (j.contains("paths"))
      g.paths = j.at("paths").get<std::map<std::string, std::vector<std::string>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Schema, "graph file " + path + ": " + e.what());
  }
  g.validate();
  return g;
}

void store_graph(const MultipathGraph& graph, const std::string& path) {
  graph.validate();
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Parse, "cannot write graph file " + path);
  out << graph_to_json(graph).dump(2) << "\n";
}

MultipathGraph default_graph() {
  MultipathGraph g;
  g.vertices = {"v1", "v2", "v3", "v4", "v5", "v6", "v7"};
  for (auto [a, b] : std::vector<std::pair<const char*, const char*>>{
           {"v1", "v6"}, {"v6", "v3"}, {"v3", "v4"}, {"v4", "v2"},
           {"v6", "v5"}, {"v5", "v7"}, {"v7", "v2"}})
    g.edges.push_back({a, b, EdgeFactors{}});
  g.paths["P1"] = {"v1", "v6", "v3", "v4", "v2"};
  g.paths["P2"] = {"v1", "v6", "v5", "v7", "v2"};
  return g;
}

PathThreat threat_score(const std::vector<MatchResult>& matches,
                        const std::vector<AttackSignature>& signatures) {
  PathThreat t;
  for (const MatchResult& m : matches) {
    if (!m.suite_id) continue;
    if (m.probability < 0.0 || m.probability > 1.0)
      throw Error(ErrorKind::Config, "match probability outside [0, 1]");
    const AttackSignature* sig = nullptr;
    for (const AttackSignature& s : signatures)
      if (s.suite_id == *m.suite_id) {
        sig = &s;
        break;
      }
    if (sig == nullptr)
      throw Error(ErrorKind::UnknownReference,
                  "match references unknown suite " + std::to_string(*m.suite_id));
    ThreatContribution c;
    c.cluster_id = m.cluster_id;
    c.suite_id = sig->suite_id;
    c.threat_level = sig->threat_level;
    c.probability = m.probability;
    t.contributions.push_back(c);
    t.score += double(sig->threat_level) * m.probability;
  }
  return t;
}

double assurance_factor(const PathThreat& threat, double i_max) {
  if (threat.score < 0.0) throw Error(ErrorKind::Config, "threat score must be >= 0");
  if (i_max <= 0.0) throw Error(ErrorKind::Config, "i_max must be > 0");
  return threat.score > 0.0 ? 1.0 / threat.score : i_max;
}

double path_throughput(const MultipathGraph& graph, const std::vector<std::string>& path_ids,
                       double message_length) {
  if (message_length <= 0.0)
    throw Error(ErrorKind::Config, "message length must be > 0");
  double sum = 0.0;
  for (const std::string& pid : path_ids) {
    auto it = graph.paths.find(pid);
    if (it == graph.paths.end())
      throw Error(ErrorKind::UnknownReference, "unknown path " + pid);
    const auto& path = it->second;
    for (size_t i = 0; i + 1 < path.size(); ++i) {
      const GraphEdge* e = graph.find_edge(path[i], path[i + 1]);
      if (e == nullptr)
        throw Error(ErrorKind::UnknownReference,
                    "path " + pid + " uses missing edge " + path[i] + "-" + path[i + 1]);
      sum += e->factors.assurance * e->factors.cost * e->factors.encryption;
    }
  }
  return message_length * sum;
}

std::string path_assessment_to_json(const PathAssessment& a) {
  nlohmann::json j;
  j["window_id"] = a.window_id;
  j["path_id"] = a.path_id;
  j["anomaly"] = {{"spe", std::vector<double>(a.report.spe.data(),
                                              a.report.spe.data() + a.report.spe.size())},
                  {"threshold", a.report.threshold},
                  {"threshold_defined", a.report.threshold_defined},
                  {"anomalous", a.report.anomalous},
                  {"flagged_features", a.report.flagged_features}};
  nlohmann::json sigs = nlohmann::json::array();
  for (const auto& s : a.matches.signatures) {
    if (s)
      sigs.push_back(*s);
    else
      sigs.push_back(nullptr);
  }
  j["match"] = {{"clusters", a.matches.clusters},
                {"signatures", sigs},
                {"probabilities", a.matches.probabilities},
                {"significant_features", a.matches.significant_features}};
  nlohmann::json contribs = nlohmann::json::array();
  for (const ThreatContribution& c : a.threat.contributions)
    contribs.push_back({{"cluster", c.cluster_id},
                        {"suite", c.suite_id},
                        {"threat_level", c.threat_level},
                        {"probability", c.probability}});
  j["threat"] = {{"score", a.threat.score}, {"contributions", contribs}};
  j["assurance"] = a.assurance;
  j["compressed_ref"] = a.compressed_ref;
  j["stage_errors"] = a.stage_errors;
  return j.dump(2);
}

Pipeline::Pipeline(TrafficConfig traffic, PipelineConfig config)
    : traffic_(std::move(traffic)), config_(std::move(config)) {
  traffic_.catalog.validate();
  if (traffic_.signatures.empty())
    throw Error(ErrorKind::Config, "pipeline needs at least one signature");
  if (config_.ratio > 1.0)
    throw Error(ErrorKind::Config, "compression ratio must be <= 1");
}

void Pipeline::ensure_reference(int N) {
  if (ref_n_ == N) return;
  int M;
  if (config_.ratio > 0.0) {
    M = std::clamp(static_cast<int>(std::floor(config_.ratio * N)), 1, N);
  } else {
    M = choose_measurement_count(N, static_cast<int>(traffic_.catalog.features.size()),
                                 config_.sampler);
  }
  sensing_ = build_sensing_matrix(N, M, config_.sampler.seed);
  detect_keep_.clear();
  for (std::size_t i = 0; i < sensing_.row_subset.size(); ++i)
    if (sensing_.row_subset[i] != 0) detect_keep_.push_back(static_cast<int>(i));

  EventWindow ref = generate_baseline(traffic_.catalog, N, config_.reference_seed);
  profile_ = build_baseline_profile(ref);
  CompressedWindow comp = compress(sensing_, ref);
  ref_spectrum_ = principal_subspace(detector_rows(comp.Y), config_.power_fraction);
  ref_q_ = q_threshold(ref_spectrum_, config_.beta, config_.printed_q_variant);
  ref_n_ = N;
}

Eigen::MatrixXd Pipeline::detector_rows(const Eigen::MatrixXd& Y) const {
  if (detect_keep_.size() == static_cast<std::size_t>(Y.rows())) return Y;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(detect_keep_.size()), Y.cols());
  for (std::size_t i = 0; i < detect_keep_.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = Y.row(detect_keep_[i]);
  return out;
}

const SensingMatrix& Pipeline::sensing(int N) {
  ensure_reference(N);
  return sensing_;
}

const Spectrum& Pipeline::reference_spectrum(int N) {
  ensure_reference(N);
  return ref_spectrum_;
}

const QStatParams& Pipeline::reference_threshold(int N) {
  ensure_reference(N);
  return ref_q_;
}

const BaselineProfile& Pipeline::baseline_profile(int N) {
  ensure_reference(N);
  return profile_;
}

PathAssessment Pipeline::path_info_assurance(const EventWindow& window,
                                             const std::string& path_id) {
  ensure_reference(window.rows());
  PathAssessment a;
  a.window_id = window.id;
  a.path_id = path_id;
  a.assurance = config_.i_max;

  CompressedWindow comp = compress(sensing_, window);
  stored_.push_back(comp);  // both branches keep the compressed form
  a.compressed_ref = comp.source_window_id;

  try {
    CompressedWindow scored = comp;
    scored.Y = detector_rows(comp.Y);
    a.report = detect(scored, ref_spectrum_, ref_q_);
  } catch (const Error& e) {
    a.stage_errors.push_back(std::string("detect: ") + e.what());
    return a;
  }
  if (!a.report.anomalous) return a;

  ++match_invocations_;
  try {
    a.matches = signature_match_prob(traffic_.signatures, window.samples, traffic_.catalog,
                                     profile_, config_.match);
  } catch (const Error& e) {
    a.stage_errors.push_back(std::string("classify: ") + e.what());
    return a;
  }
  try {
    a.threat = threat_score(a.matches.details, traffic_.signatures);
    a.assurance = assurance_factor(a.threat, config_.i_max);
  } catch (const Error& e) {
    a.stage_errors.push_back(std::string("score: ") + e.what());
  }
  return a;
}

MatchTriple Pipeline::classify(const EventWindow& window) {
  ensure_reference(window.rows());
  return signature_match_prob(traffic_.signatures, window.samples, traffic_.catalog, profile_,
                              config_.match);
}

}  // namespace pathsec
