#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pathsec/anomaly.hpp"
#include "pathsec/assurance.hpp"
#include "pathsec/cs.hpp"
#include "pathsec/errors.hpp"
#include "pathsec/experiment.hpp"
#include "pathsec/signature.hpp"
#include "pathsec/traffic.hpp"

namespace py = pybind11;
using namespace pathsec;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Path security assessment: compressed-sensing traffic sampling, "
            "residual-subspace anomaly detection, signature matching, path assurance";

  py::register_exception<Error>(m, "PathsecError");

  // traffic
  m.def(
      "feature_names",
      [] {
        std::vector<std::string> names;
        for (const FeatureDef& f : default_catalog().features) names.push_back(f.id);
        return names;
      },
      "Feature ids of the built-in catalog");
  m.def(
      "generate_window",
      [](int n, std::uint64_t seed, int bursts, int burst_len, double intensity,
         std::uint64_t inject_seed) {
        TrafficConfig t = default_traffic_config();
        EventWindow w = generate_baseline(t.catalog, n, seed);
        if (bursts > 0)
          w = inject_attacks_exact(w, t.catalog, t.signatures, bursts, burst_len, intensity,
                                   inject_seed);
        std::vector<std::tuple<int, int, int>> labels;
        for (const InjectionRecord& l : w.labels)
          labels.emplace_back(l.suite_id, l.start_row, l.end_row);
        return py::make_tuple(w.samples, labels);
      },
      py::arg("n"), py::arg("seed"), py::arg("bursts") = 0, py::arg("burst_len") = 64,
      py::arg("intensity") = 8.0, py::arg("inject_seed") = 0,
      "Seeded window: (samples, [(suite, start, end), ...])");

  // compressed sensing
  py::class_<SensingMatrix>(m, "SensingMatrix")
      .def_readonly("U", &SensingMatrix::U)
      .def_readonly("row_subset", &SensingMatrix::row_subset)
      .def_readonly("mu", &SensingMatrix::mu)
      .def_readonly("M", &SensingMatrix::M)
      .def_readonly("N", &SensingMatrix::N)
      .def("id", &SensingMatrix::id);
  m.def("build_sensing_matrix", &build_sensing_matrix, py::arg("n"), py::arg("m"),
        py::arg("seed"));
  m.def(
      "choose_measurement_count",
      [](int n, int active_features, double epsilon) {
        SamplerConfig cfg;
        cfg.epsilon = epsilon;
        return choose_measurement_count(n, active_features, cfg);
      },
      py::arg("n"), py::arg("active_features"), py::arg("epsilon") = 0.25);
  m.def("coherence", &coherence, py::arg("u"));
  m.def("min_measurements", &min_measurements, py::arg("mu"), py::arg("q"), py::arg("n"),
        py::arg("const_c") = 1.0);
  m.def(
      "compress",
      [](const SensingMatrix& u, const Eigen::MatrixXd& x) {
        EventWindow w;
        w.id = "py";
        w.samples = x;
        return compress(u, w).Y;
      },
      py::arg("u"), py::arg("x"));
  m.def(
      "reconstruct",
      [](const SensingMatrix& u, const Eigen::MatrixXd& y, int sparsity) {
        CompressedWindow c;
        c.Y = y;
        c.source_window_id = "py";
        return reconstruct(u, c, sparsity);
      },
      py::arg("u"), py::arg("y"), py::arg("sparsity"));
  m.def("reconstruction_mse", &reconstruction_mse, py::arg("phi"), py::arg("phi_hat"));
  m.def(
      "ric_estimate",
      [](const SensingMatrix& u, int k, int trials, std::uint64_t seed) {
        return ric_estimate(u, k, trials, seed).delta_k;
      },
      py::arg("u"), py::arg("k"), py::arg("trials") = 200, py::arg("seed") = 0);

  // anomaly detection
  m.def(
      "principal_subspace",
      [](const Eigen::MatrixXd& y, double power_fraction) {
        Spectrum s = principal_subspace(y, power_fraction);
        return py::make_tuple(s.eigenvalues, s.E, s.k);
      },
      py::arg("y"), py::arg("power_fraction") = 0.9,
      "Returns (eigenvalues descending, principal directions, k)");
  m.def(
      "q_threshold",
      [](const Eigen::VectorXd& eigenvalues, int k, double beta, bool printed_variant) {
        Spectrum s;
        s.eigenvalues = eigenvalues;
        s.k = k;
        return q_threshold(s, beta, printed_variant).q_beta;
      },
      py::arg("eigenvalues"), py::arg("k"), py::arg("beta") = 0.1,
      py::arg("printed_variant") = false);
  m.def(
      "detect",
      [](const Eigen::MatrixXd& y, double power_fraction, double beta) {
        CompressedWindow c;
        c.Y = y;
        c.source_window_id = "py";
        AnomalyReport r = detect(c, power_fraction, beta);
        py::dict d;
        d["spe"] = r.spe;
        d["threshold"] = r.threshold;
        d["threshold_defined"] = r.threshold_defined;
        d["anomalous"] = r.anomalous;
        d["flagged_features"] = r.flagged_features;
        return d;
      },
      py::arg("y"), py::arg("power_fraction") = 0.9, py::arg("beta") = 0.1);

  // signature matching and assurance
  m.def(
      "signature_match",
      [](const Eigen::MatrixXd& samples, const Eigen::MatrixXd& baseline, double delta) {
        TrafficConfig t = default_traffic_config();
        EventWindow b;
        b.id = "baseline";
        b.samples = baseline;
        BaselineProfile profile = build_baseline_profile(b);
        MatchConfig cfg;
        cfg.delta = delta;
        MatchTriple triple = signature_match_prob(t.signatures, samples, t.catalog, profile, cfg);
        py::dict d;
        d["clusters"] = triple.clusters;
        py::list suites;
        for (const auto& s : triple.signatures)
          suites.append(s ? py::cast(*s) : py::none());
        d["signatures"] = suites;
        d["probabilities"] = triple.probabilities;
        d["significant_features"] = triple.significant_features;
        return d;
      },
      py::arg("samples"), py::arg("baseline"), py::arg("delta") = -1.0);
  m.def(
      "threat_score",
      [](const std::vector<std::pair<int, double>>& matches) {
        std::vector<MatchResult> ms;
        int cid = 0;
        for (const auto& [suite, prob] : matches) {
          MatchResult r;
          r.cluster_id = cid++;
          r.suite_id = suite;
          r.probability = prob;
          ms.push_back(r);
        }
        return threat_score(ms, default_signatures()).score;
      },
      py::arg("matches"), "O_f from [(suite_id, probability), ...] with the built-in suites");
  m.def(
      "assurance_factor",
      [](double score, double i_max) {
        PathThreat t;
        t.score = score;
        return assurance_factor(t, i_max);
      },
      py::arg("score"), py::arg("i_max") = 1.0);
  m.def(
      "default_graph_throughput",
      [](const std::vector<std::string>& paths, double message_length) {
        return path_throughput(default_graph(), paths, message_length);
      },
      py::arg("paths"), py::arg("message_length") = 1.0);
  m.def(
      "assess_window",
      [](const Eigen::MatrixXd& samples, double ratio, std::uint64_t cs_seed, double beta,
         double power_fraction, std::uint64_t reference_seed) {
        TrafficConfig t = default_traffic_config();
        PipelineConfig pc;
        pc.ratio = ratio;
        pc.sampler.seed = cs_seed;
        pc.beta = beta;
        pc.power_fraction = power_fraction;
        pc.reference_seed = reference_seed;
        Pipeline pipeline(t, pc);
        EventWindow w;
        w.id = "py";
        w.samples = samples;
        return path_assessment_to_json(pipeline.path_info_assurance(w));
      },
      py::arg("samples"), py::arg("ratio") = 0.3, py::arg("cs_seed") = 42,
      py::arg("beta") = 0.1, py::arg("power_fraction") = 0.9, py::arg("reference_seed") = 777,
      "Full per-window pipeline; returns the assessment as a JSON string");
}
