#include "pathsec/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pathsec/errors.hpp"
#include "pathsec/rng.hpp"

namespace pathsec {

using nlohmann::json;

int FeatureCatalog::index_of(const std::string& feature_id) const {
  for (std::size_t i = 0; i < features.size(); ++i)
    if (features[i].id == feature_id) return static_cast<int>(i);
  return -1;
}

void FeatureCatalog::validate() const {
  if (static_cast<int>(features.size()) != kNumFeatures)
    throw Error(ErrorKind::Schema,
                "catalog must define exactly " + std::to_string(kNumFeatures) +
                    " features, got " + std::to_string(features.size()));
  std::set<std::string> ids;
  for (const auto& f : features) {
    if (!ids.insert(f.id).second)
      throw Error(ErrorKind::Schema, "duplicate feature id " + f.id);
    if (f.baseline_rate < 0.0)
      throw Error(ErrorKind::Schema, "negative baseline_rate for " + f.id);
    if (f.baseline_dispersion < 0.0)
      throw Error(ErrorKind::Schema, "negative baseline_dispersion for " + f.id);
  }
  if (load_dispersion < 0.0)
    throw Error(ErrorKind::Schema, "negative load_dispersion");
}

FeatureCatalog default_catalog() {
  FeatureCatalog c;
  c.load_dispersion = 0.008;
  auto add = [&c](const char* id, const char* indicator, double rate) {
    c.features.push_back({id, indicator, rate, 0.0});
  };
  add("f1",  "ICMP Redirect",          42);
  add("f2",  "TCP http [RST]",         40);
  add("f3",  "TCP http [SYN, ACK]",    38);
  add("f4",  "ICMP Dest Unreachable",  36);
  add("f5",  "TCP https [SYN]",        40);
  add("f6",  "TCP bgp [RST, ACK]",     44);
  add("f7",  "TCP ospf-lite [RST, ACK]", 38);
  add("f8",  "ICMP Time Exceeded",     36);
  add("f9",  "TCP https [RST, ACK]",   42);
  add("f10", "TCP bgp [SYN]",          38);
  add("f11", "TCP ssh [RST, ACK]",     40);
  add("f12", "TCP telnet [RST, ACK]",  10);
  add("f13", "UDP dns [Query]",        720);
  add("f14", "TCP http [ACK]",         600);
  add("f15", "UDP ntp [Response]",     12);
  add("f16", "ICMP Echo Reply",        8);
  add("f17", "TCP dns [ACK]",          11);
  add("f18", "UDP snmp [Response]",    9);
  add("f19", "TCP smtp [RST, ACK]",    10);
  return c;
}

std::vector<AttackSignature> default_signatures() {
  return {
      {1, {"f1", "f2", "f3", "f4", "f9", "f11"}, 3, "route poisoning / web reset suite"},
      {2, {"f1", "f5", "f6", "f7", "f8", "f9"}, 5, "routing infrastructure reset suite"},
      {3, {"f1", "f5", "f8", "f9", "f10"}, 4, "session hijack probe suite"},
  };
}

EventWindow generate_baseline(const FeatureCatalog& catalog, int N, std::uint64_t seed) {
  catalog.validate();
  if (N < 1) throw Error(ErrorKind::InvalidDimension, "window needs N >= 1 rows, got " + std::to_string(N));

  const int nf = static_cast<int>(catalog.features.size());
  EventWindow w;
  w.id = "baseline-" + std::to_string(seed);
  w.kind = WindowKind::Baseline;
  w.samples.resize(N, nf);

  auto rng = make_engine(seed);
  const double dl = catalog.load_dispersion;
  std::gamma_distribution<double> load_gamma(dl > 0.0 ? 1.0 / dl : 1.0, dl);

  for (int t = 0; t < N; ++t) {
    const double load = dl > 0.0 ? load_gamma(rng) : 1.0;
    for (int j = 0; j < nf; ++j) {
      const auto& f = catalog.features[j];
      double lambda = f.baseline_rate * load;
      if (f.baseline_dispersion > 0.0) {
        std::gamma_distribution<double> g(1.0 / f.baseline_dispersion, f.baseline_dispersion);
        lambda *= g(rng);
      }
      if (lambda <= 0.0) {
        w.samples(t, j) = 0.0;
      } else {
        std::poisson_distribution<long> pois(lambda);
        w.samples(t, j) = static_cast<double>(pois(rng));
      }
    }
  }
  return w;
}

namespace {

void check_injection_params(const EventWindow& window,
                            const std::vector<AttackSignature>& signatures,
                            int burst_len, double intensity) {
  if (window.kind != WindowKind::Baseline)
    throw Error(ErrorKind::InvalidKind, "injection requires a baseline window");
  if (intensity <= 0.0)
    throw Error(ErrorKind::Config, "intensity must be > 0");
  if (burst_len < 1)
    throw Error(ErrorKind::Config, "burst_len must be >= 1");
  if (signatures.empty())
    throw Error(ErrorKind::Config, "need at least one signature to inject");
}

EventWindow inject_events(const EventWindow& window, const FeatureCatalog& catalog,
                          const std::vector<AttackSignature>& signatures, int events,
                          int burst_len, double intensity, std::mt19937_64& rng) {
  EventWindow out = window;
  if (events > 0) out.id = window.id + "-injected";
  const int N = window.rows();
  const int blen = std::min(burst_len, N);
  for (int e = 0; e < events; ++e) {
    std::uniform_int_distribution<std::size_t> pick(0, signatures.size() - 1);
    const AttackSignature& sig = signatures[pick(rng)];
    std::uniform_int_distribution<int> start_dist(0, N - blen);
    const int start = start_dist(rng);

    for (const auto& fid : sig.feature_set) {
      const int j = catalog.index_of(fid);
      if (j < 0)
        throw Error(ErrorKind::UnknownReference,
                    "signature suite " + std::to_string(sig.suite_id) +
                        " references unknown feature " + fid);
      const double extra_rate = (intensity - 1.0) * catalog.features[j].baseline_rate;
      if (extra_rate <= 0.0) continue;
      std::poisson_distribution<long> burst(extra_rate);
      for (int t = start; t < start + blen; ++t)
        out.samples(t, j) += static_cast<double>(burst(rng));
    }
    out.labels.push_back({sig.suite_id, start, start + blen - 1});
  }
  if (events > 0) out.kind = WindowKind::Injected;
  return out;
}

}  // namespace

EventWindow inject_attacks(const EventWindow& window,
                           const FeatureCatalog& catalog,
                           const std::vector<AttackSignature>& signatures,
                           double poisson_rate, int burst_len, double intensity,
                           std::uint64_t seed) {
  check_injection_params(window, signatures, burst_len, intensity);
  if (poisson_rate < 0.0)
    throw Error(ErrorKind::Config, "poisson_rate must be >= 0");

  auto rng = make_engine(seed);
  int events = 0;
  if (poisson_rate > 0.0) {
    std::poisson_distribution<int> pois(poisson_rate);
    events = pois(rng);
  }
  return inject_events(window, catalog, signatures, events, burst_len, intensity, rng);
}

EventWindow inject_attacks_exact(const EventWindow& window,
                                 const FeatureCatalog& catalog,
                                 const std::vector<AttackSignature>& signatures,
                                 int n_bursts, int burst_len, double intensity,
                                 std::uint64_t seed) {
  check_injection_params(window, signatures, burst_len, intensity);
  if (n_bursts < 0)
    throw Error(ErrorKind::Config, "n_bursts must be >= 0");

  auto rng = make_engine(seed);
  return inject_events(window, catalog, signatures, n_bursts, burst_len, intensity, rng);
}

WindowStats window_stats(const EventWindow& window) {
  const int n = window.rows();
  if (n < 2)
    throw Error(ErrorKind::InsufficientSamples,
                "window_stats needs N >= 2 rows, got " + std::to_string(n));
  const int nf = window.cols();

  WindowStats s;
  s.mean = window.samples.colwise().mean();
  Eigen::MatrixXd centered = window.samples.rowwise() - s.mean.transpose();
  Eigen::VectorXd var = centered.array().square().colwise().sum() / double(n - 1);
  s.stddev = var.array().sqrt();

  s.correlation = Eigen::MatrixXd::Zero(nf, nf);
  for (int i = 0; i < nf; ++i) {
    for (int j = i; j < nf; ++j) {
      if (s.stddev(i) <= 0.0 || s.stddev(j) <= 0.0) {
        // constant columns: correlation 0 by convention, diagonal 1 only for
        // features with nonzero variance
        s.correlation(i, j) = s.correlation(j, i) = 0.0;
        continue;
      }
      const double cov = (centered.col(i).array() * centered.col(j).array()).sum() / double(n - 1);
      const double r = cov / (s.stddev(i) * s.stddev(j));
      s.correlation(i, j) = s.correlation(j, i) = std::clamp(r, -1.0, 1.0);
    }
  }
  return s;
}

namespace {

json labels_to_json(const std::vector<InjectionRecord>& labels) {
  json arr = json::array();
  for (const auto& l : labels)
    arr.push_back({{"suite", l.suite_id}, {"start", l.start_row}, {"end", l.end_row}});
  return arr;
}

std::vector<InjectionRecord> labels_from_json(const json& arr, int N) {
  std::vector<InjectionRecord> out;
  for (const auto& e : arr) {
    InjectionRecord r;
    r.suite_id = e.at("suite").get<int>();
    r.start_row = e.at("start").get<int>();
    r.end_row = e.at("end").get<int>();
    if (r.start_row < 0 || r.end_row < r.start_row || r.end_row >= N)
      throw Error(ErrorKind::Schema,
                  "label row range [" + std::to_string(r.start_row) + "," +
                      std::to_string(r.end_row) + "] outside window of " +
                      std::to_string(N) + " rows");
    out.push_back(r);
  }
  return out;
}

double parse_count(const std::string& cell, int row, int col) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ", column " +
                                      std::to_string(col) + ": not a number: '" + cell + "'");
  }
  if (pos != cell.size())
    throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ", column " +
                                      std::to_string(col) + ": trailing characters in '" + cell + "'");
  if (v < 0.0)
    throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ", column " +
                                      std::to_string(col) + ": negative count " + cell);
  if (v != std::floor(v))
    throw Error(ErrorKind::Parse, "row " + std::to_string(row) + ", column " +
                                      std::to_string(col) + ": non-integer count " + cell);
  return v;
}

std::string window_stem(const std::string& path) {
  const auto slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  const auto dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

void store_csv(const EventWindow& w, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::MissingArtifact, "cannot open " + path + " for writing");
  out << "t";
  for (int j = 0; j < w.cols(); ++j) out << ",f" << (j + 1);
  out << "\n";
  for (int t = 0; t < w.rows(); ++t) {
    out << t;
    for (int j = 0; j < w.cols(); ++j)
      out << "," << static_cast<long long>(w.samples(t, j));
    out << "\n";
  }
  std::ofstream side(path + ".labels.json");
  side << json{{"labels", labels_to_json(w.labels)}}.dump(2) << "\n";
}

EventWindow load_csv(const std::string& path, const FeatureCatalog& catalog) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingArtifact, "cannot open " + path);
  const int nf = static_cast<int>(catalog.features.size());

  std::string line;
  if (!std::getline(in, line))
    throw Error(ErrorKind::Parse, "row 0: empty file " + path);
  std::vector<std::vector<double>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    int col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col > 0) vals.push_back(parse_count(cell, lineno, col));
      ++col;
    }
    if (static_cast<int>(vals.size()) != nf)
      throw Error(ErrorKind::Schema, "row " + std::to_string(lineno) + ": expected " +
                                         std::to_string(nf) + " feature columns, got " +
                                         std::to_string(vals.size()));
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error(ErrorKind::Parse, "row 1: no sample rows in " + path);

  EventWindow w;
  w.id = window_stem(path);
  w.samples.resize(static_cast<int>(rows.size()), nf);
  for (std::size_t t = 0; t < rows.size(); ++t)
    for (int j = 0; j < nf; ++j) w.samples(static_cast<int>(t), j) = rows[t][j];

  std::ifstream side(path + ".labels.json");
  if (side) {
    json doc;
    try {
      side >> doc;
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Parse, std::string("labels sidecar: ") + e.what());
    }
    if (doc.contains("labels")) w.labels = labels_from_json(doc["labels"], w.rows());
  }
  w.kind = w.labels.empty() ? WindowKind::Baseline : WindowKind::Injected;
  return w;
}

void store_json(const EventWindow& w, const std::string& path) {
  json doc;
  doc["id"] = w.id;
  doc["kind"] = w.kind == WindowKind::Baseline ? "baseline" : "injected";
  doc["N"] = w.rows();
  json feats = json::array();
  for (int j = 0; j < w.cols(); ++j) feats.push_back("f" + std::to_string(j + 1));
  doc["features"] = feats;
  json rows = json::array();
  for (int t = 0; t < w.rows(); ++t) {
    json row = json::array();
    for (int j = 0; j < w.cols(); ++j) row.push_back(static_cast<long long>(w.samples(t, j)));
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  doc["labels"] = labels_to_json(w.labels);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::MissingArtifact, "cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
}

EventWindow load_json(const std::string& path, const FeatureCatalog& catalog) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingArtifact, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string(e.what()));
  }
  const int nf = static_cast<int>(catalog.features.size());

  EventWindow w;
  w.id = doc.value("id", window_stem(path));
  const std::string kind = doc.value("kind", "baseline");
  if (kind != "baseline" && kind != "injected")
    throw Error(ErrorKind::Schema, "unknown window kind '" + kind + "'");
  if (!doc.contains("rows") || !doc["rows"].is_array())
    throw Error(ErrorKind::Schema, "window JSON missing rows array");
  const auto& rows = doc["rows"];
  if (rows.empty()) throw Error(ErrorKind::Schema, "window JSON has zero rows");
  w.samples.resize(static_cast<int>(rows.size()), nf);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (static_cast<int>(rows[t].size()) != nf)
      throw Error(ErrorKind::Schema, "row " + std::to_string(t) + ": expected " +
                                         std::to_string(nf) + " columns, got " +
                                         std::to_string(rows[t].size()));
    for (int j = 0; j < nf; ++j) {
      const double v = rows[t][j].get<double>();
      if (v < 0.0)
        throw Error(ErrorKind::Parse, "row " + std::to_string(t) + ", column " +
                                          std::to_string(j + 1) + ": negative count");
      w.samples(static_cast<int>(t), j) = v;
    }
  }
  // missing labels array loads as empty (documented default)
  if (doc.contains("labels")) w.labels = labels_from_json(doc["labels"], w.rows());
  w.kind = kind == "injected" || !w.labels.empty() ? WindowKind::Injected : WindowKind::Baseline;
  return w;
}

}  // namespace

void store_window(const EventWindow& window, const std::string& path, WindowFormat format) {
  if (format == WindowFormat::Csv)
    store_csv(window, path);
  else
    store_json(window, path);
}

EventWindow load_window(const std::string& path, WindowFormat format,
                        const FeatureCatalog& catalog) {
  return format == WindowFormat::Csv ? load_csv(path, catalog) : load_json(path, catalog);
}

TrafficConfig default_traffic_config() {
  return {default_catalog(), default_signatures()};
}

TrafficConfig load_traffic_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::MissingArtifact, "cannot open " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string(e.what()));
  }

  TrafficConfig cfg;
  if (!doc.contains("catalog"))
    throw Error(ErrorKind::Schema, "traffic config missing 'catalog'");
  const auto& cat = doc["catalog"];
  cfg.catalog.load_dispersion = cat.value("load_dispersion", 0.0);
  for (const auto& f : cat.at("features")) {
    FeatureDef def;
    def.id = f.at("id").get<std::string>();
    def.indicator = f.value("indicator", "");
    def.baseline_rate = f.at("baseline_rate").get<double>();
    def.baseline_dispersion = f.value("baseline_dispersion", 0.0);
    cfg.catalog.features.push_back(std::move(def));
  }
  cfg.catalog.validate();

  if (!doc.contains("signatures"))
    throw Error(ErrorKind::Schema, "traffic config missing 'signatures'");
  for (const auto& s : doc["signatures"]) {
    AttackSignature sig;
    sig.suite_id = s.at("suite_id").get<int>();
    sig.threat_level = s.at("threat_level").get<int>();
    sig.description = s.value("description", "");
    for (const auto& fid : s.at("feature_set")) {
      const std::string id = fid.get<std::string>();
      if (cfg.catalog.index_of(id) < 0)
        throw Error(ErrorKind::Schema, "signature suite " + std::to_string(sig.suite_id) +
                                           " references unknown feature " + id);
      sig.feature_set.push_back(id);
    }
    if (sig.feature_set.empty())
      throw Error(ErrorKind::Schema, "signature suite " + std::to_string(sig.suite_id) +
                                         " has empty feature_set");
    if (sig.threat_level < 1 || sig.threat_level > 5)
      throw Error(ErrorKind::Schema, "threat_level must be in [1,5]");
    cfg.signatures.push_back(std::move(sig));
  }
  return cfg;
}

void store_traffic_config(const TrafficConfig& cfg, const std::string& path) {
  json doc;
  json feats = json::array();
  for (const auto& f : cfg.catalog.features)
    feats.push_back({{"id", f.id},
                     {"indicator", f.indicator},
                     {"baseline_rate", f.baseline_rate},
                     {"baseline_dispersion", f.baseline_dispersion}});
  doc["catalog"] = {{"features", std::move(feats)},
                    {"load_dispersion", cfg.catalog.load_dispersion}};
  json sigs = json::array();
  for (const auto& s : cfg.signatures)
    sigs.push_back({{"suite_id", s.suite_id},
                    {"feature_set", s.feature_set},
                    {"threat_level", s.threat_level},
                    {"description", s.description}});
  doc["signatures"] = std::move(sigs);
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::MissingArtifact, "cannot open " + path + " for writing");
  out << doc.dump(2) << "\n";
}

}  // namespace pathsec
