#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <random>
#include <set>

#include "pathsec/errors.hpp"
#include "pathsec/rng.hpp"
#include "pathsec/traffic.hpp"

using namespace pathsec;

namespace {

// bare catalog with exactly the given rates; only usable where the full
// 19-feature contract is not enforced (csv column sizing)
FeatureCatalog tiny_catalog(std::vector<double> rates, double load_dispersion = 0.0) {
  FeatureCatalog cat;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    FeatureDef d;
    d.id = "f" + std::to_string(i + 1);
    d.indicator = "synthetic";
    d.baseline_rate = rates[i];
    cat.features.push_back(d);
  }
  cat.load_dispersion = load_dispersion;
  return cat;
}

// full 19-feature catalog: requested rates first, zero-rate padding after
FeatureCatalog padded_catalog(std::vector<double> rates, double load_dispersion = 0.0) {
  rates.resize(kNumFeatures, 0.0);
  return tiny_catalog(std::move(rates), load_dispersion);
}

std::string temp_path(const std::string& name) {
  return std::string("test_traffic_tmp_") + name;
}

}  // namespace

TEST_CASE("default catalog has 19 named indicator features") {
  const auto cat = default_catalog();
  REQUIRE(cat.features.size() == 19);
  cat.validate();
  for (int i = 0; i < 19; ++i) {
    CHECK(cat.features[i].id == "f" + std::to_string(i + 1));
    CHECK(cat.features[i].baseline_rate > 0.0);
    CHECK_FALSE(cat.features[i].indicator.empty());
  }
  CHECK(cat.load_dispersion > 0.0);
  // benign bulk counters dominate baseline volume
  CHECK(cat.features[12].baseline_rate > 100.0);
  CHECK(cat.features[13].baseline_rate > 100.0);
}

TEST_CASE("default signatures carry suite ids, feature sets and threat levels") {
  const auto cat = default_catalog();
  const auto sigs = default_signatures();
  REQUIRE(sigs.size() == 3);
  CHECK(sigs[0].suite_id == 1);
  CHECK(sigs[1].suite_id == 2);
  CHECK(sigs[2].suite_id == 3);
  CHECK(sigs[0].threat_level == 3);
  CHECK(sigs[1].threat_level == 5);
  CHECK(sigs[2].threat_level == 4);
  CHECK(sigs[0].feature_set.size() == 6);
  CHECK(sigs[1].feature_set.size() == 6);
  CHECK(sigs[2].feature_set.size() == 5);
  for (const auto& s : sigs) {
    std::set<std::string> uniq(s.feature_set.begin(), s.feature_set.end());
    CHECK(uniq.size() == s.feature_set.size());
    for (const auto& f : s.feature_set) CHECK(cat.index_of(f) >= 0);
  }
  // f1 and f9 appear in every suite; the suites remain pairwise distinct
  for (const auto& s : sigs) {
    std::set<std::string> set(s.feature_set.begin(), s.feature_set.end());
    CHECK(set.count("f1") == 1);
    CHECK(set.count("f9") == 1);
  }
}

TEST_CASE("baseline generation") {
  SUBCASE("zero rates give the all-zero window") {
    const auto cat = padded_catalog({});
    const auto w = generate_baseline(cat, 16, 5);
    CHECK(w.samples.rows() == 16);
    CHECK(w.samples.cols() == kNumFeatures);
    CHECK(w.samples.cwiseAbs().maxCoeff() == 0.0);
    CHECK(w.kind == WindowKind::Baseline);
    CHECK(w.labels.empty());
  }

  SUBCASE("same seed reproduces the window exactly") {
    const auto cat = default_catalog();
    const auto a = generate_baseline(cat, 64, 7);
    const auto b = generate_baseline(cat, 64, 7);
    CHECK(a.samples == b.samples);
    const auto c = generate_baseline(cat, 64, 8);
    CHECK(a.samples != c.samples);
  }

  SUBCASE("counts are nonnegative integers") {
    const auto w = generate_baseline(default_catalog(), 128, 11);
    for (int i = 0; i < w.rows(); ++i)
      for (int j = 0; j < w.cols(); ++j) {
        CHECK(w.samples(i, j) >= 0.0);
        CHECK(w.samples(i, j) == std::floor(w.samples(i, j)));
      }
  }

  SUBCASE("pure poisson column mean lands within three standard errors") {
    const auto cat = padded_catalog({50.0});
    const int n = 4000;
    const auto w = generate_baseline(cat, n, 21);
    const double mean = w.samples.col(0).mean();
    const double se = std::sqrt(50.0 / n);
    CHECK(std::abs(mean - 50.0) < 3.0 * se);
  }

  SUBCASE("nonpositive length is rejected") {
    CHECK_THROWS_AS(generate_baseline(default_catalog(), 0, 1), Error);
    try {
      generate_baseline(default_catalog(), -4, 1);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidDimension);
    }
  }
}

TEST_CASE("attack injection") {
  const auto cat = default_catalog();
  const auto sigs = default_signatures();

  SUBCASE("zero poisson rate leaves the window untouched") {
    const auto base = generate_baseline(cat, 256, 3);
    const auto out = inject_attacks(base, cat, sigs, 0.0, 64, 8.0, 99);
    CHECK(out.samples == base.samples);
    CHECK(out.kind == WindowKind::Baseline);
    CHECK(out.labels.empty());
    CHECK(out.id == base.id);
  }

  SUBCASE("event count replays the seeded poisson draw") {
    const auto base = generate_baseline(cat, 512, 4);
    const std::uint64_t seed = 424242;
    const auto out = inject_attacks(base, cat, sigs, 4.0, 32, 6.0, seed);
    auto eng = make_engine(seed);
    std::poisson_distribution<int> dist(4.0);
    CHECK(static_cast<int>(out.labels.size()) == dist(eng));
  }

  SUBCASE("a forced burst elevates exactly its suite's features") {
    const auto base = generate_baseline(cat, 1024, 17);
    // restrict the signature list to suite 2 so the uniform suite pick is forced
    const std::vector<AttackSignature> only2 = {sigs[1]};
    const auto out = inject_attacks_exact(base, cat, only2, 1, 64, 8.0, 31);
    REQUIRE(out.labels.size() == 1);
    CHECK(out.kind == WindowKind::Injected);
    CHECK(out.id == base.id + "-injected");
    const auto& l = out.labels[0];
    CHECK(l.suite_id == 2);
    CHECK(l.start_row >= 0);
    CHECK(l.end_row == l.start_row + 63);
    CHECK(l.end_row < 1024);

    std::set<int> sig_cols;
    for (const auto& f : sigs[1].feature_set) sig_cols.insert(cat.index_of(f));
    double added_on_signature = 0.0;
    for (int i = 0; i < out.rows(); ++i)
      for (int j = 0; j < out.cols(); ++j) {
        const double delta = out.samples(i, j) - base.samples(i, j);
        if (sig_cols.count(j) && i >= l.start_row && i <= l.end_row) {
          CHECK(delta >= 0.0);
          added_on_signature += delta;
        } else {
          CHECK(delta == 0.0);  // untouched outside the burst footprint
        }
      }
    CHECK(added_on_signature > 0.0);
  }

  SUBCASE("labels always describe in-range bursts of the requested length") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto base = generate_baseline(cat, 300, seed);
      const auto out = inject_attacks_exact(base, cat, sigs, 3, 32, 5.0, seed * 7);
      REQUIRE(out.labels.size() == 3);
      for (const auto& l : out.labels) {
        CHECK(l.start_row >= 0);
        CHECK(l.end_row < 300);
        CHECK(l.end_row - l.start_row + 1 == 32);
        CHECK(l.suite_id >= 1);
        CHECK(l.suite_id <= 3);
      }
    }
  }

  SUBCASE("injecting into an already injected window is rejected") {
    const auto base = generate_baseline(cat, 256, 2);
    const auto once = inject_attacks_exact(base, cat, sigs, 1, 32, 4.0, 5);
    try {
      inject_attacks_exact(once, cat, sigs, 1, 32, 4.0, 6);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidKind);
    }
  }

  SUBCASE("invalid parameters are rejected") {
    const auto base = generate_baseline(cat, 128, 2);
    CHECK_THROWS_AS(inject_attacks(base, cat, sigs, 2.0, 0, 8.0, 1), Error);
    CHECK_THROWS_AS(inject_attacks(base, cat, sigs, 2.0, 64, 0.0, 1), Error);
    CHECK_THROWS_AS(inject_attacks(base, cat, {}, 2.0, 64, 8.0, 1), Error);
    CHECK_THROWS_AS(inject_attacks_exact(base, cat, sigs, -1, 64, 8.0, 1), Error);
  }
}

TEST_CASE("window statistics") {
  SUBCASE("hand-checked mean, stddev and pearson correlation") {
    EventWindow w;
    w.id = "hand";
    w.samples.resize(4, 2);
    w.samples << 1, 2,
                 2, 1,
                 3, 5,
                 4, 4;
    const auto s = window_stats(w);
    CHECK(s.mean(0) == doctest::Approx(2.5));
    CHECK(s.mean(1) == doctest::Approx(3.0));
    CHECK(s.stddev(0) == doctest::Approx(1.2909944487358056));
    CHECK(s.stddev(1) == doctest::Approx(1.8257418583505538));
    CHECK(s.correlation(0, 0) == doctest::Approx(1.0));
    CHECK(s.correlation(1, 1) == doctest::Approx(1.0));
    CHECK(s.correlation(0, 1) == doctest::Approx(0.7071067811865476));
    CHECK(s.correlation(1, 0) == s.correlation(0, 1));
  }

  SUBCASE("constant columns get correlation zero by convention") {
    EventWindow w;
    w.samples.resize(3, 2);
    w.samples << 5, 1,
                 5, 2,
                 5, 3;
    const auto s = window_stats(w);
    CHECK(s.stddev(0) == doctest::Approx(0.0));
    CHECK(s.correlation(0, 1) == 0.0);
    CHECK(s.correlation(0, 0) == 0.0);
    CHECK(s.correlation(1, 1) == doctest::Approx(1.0));
  }

  SUBCASE("identical columns correlate at one") {
    EventWindow w;
    w.samples.resize(4, 2);
    w.samples << 1, 1,
                 3, 3,
                 2, 2,
                 7, 7;
    const auto s = window_stats(w);
    CHECK(s.correlation(0, 1) == doctest::Approx(1.0));
  }
}

TEST_CASE("window persistence") {
  const auto cat = default_catalog();
  const auto sigs = default_signatures();
  const auto base = generate_baseline(cat, 64, 13);
  const auto injected = inject_attacks_exact(base, cat, sigs, 2, 16, 6.0, 77);

  SUBCASE("csv round trip preserves samples, labels and kind") {
    const std::string path = temp_path("roundtrip.csv");
    store_window(injected, path, WindowFormat::Csv);
    const auto back = load_window(path, WindowFormat::Csv, cat);
    CHECK(back.samples == injected.samples);
    REQUIRE(back.labels.size() == injected.labels.size());
    for (std::size_t i = 0; i < back.labels.size(); ++i) {
      CHECK(back.labels[i].suite_id == injected.labels[i].suite_id);
      CHECK(back.labels[i].start_row == injected.labels[i].start_row);
      CHECK(back.labels[i].end_row == injected.labels[i].end_row);
    }
    CHECK(back.kind == WindowKind::Injected);
    // the csv carries no id column: the stem of the filename becomes the id
    CHECK(back.id == "test_traffic_tmp_roundtrip");
    std::remove(path.c_str());
    std::remove((path + ".labels.json").c_str());
  }

  SUBCASE("json round trip preserves the id too") {
    const std::string path = temp_path("roundtrip.json");
    store_window(injected, path, WindowFormat::Json);
    const auto back = load_window(path, WindowFormat::Json, cat);
    CHECK(back.id == injected.id);
    CHECK(back.kind == WindowKind::Injected);
    CHECK(back.samples == injected.samples);
    CHECK(back.labels.size() == injected.labels.size());
    std::remove(path.c_str());
  }

  SUBCASE("csv without a label sidecar loads as baseline") {
    const std::string path = temp_path("plain.csv");
    store_window(base, path, WindowFormat::Csv);
    std::remove((path + ".labels.json").c_str());
    const auto back = load_window(path, WindowFormat::Csv, cat);
    CHECK(back.kind == WindowKind::Baseline);
    CHECK(back.labels.empty());
    CHECK(back.samples == base.samples);
    std::remove(path.c_str());
  }

  SUBCASE("negative counts are reported with row and column") {
    const std::string path = temp_path("negative.csv");
    {
      std::ofstream out(path);
      out << "t,f1,f2\n";
      out << "0,3,4\n";
      out << "1,2,-5\n";
    }
    const auto small = tiny_catalog({1.0, 1.0});
    try {
      load_window(path, WindowFormat::Csv, small);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Parse);
      const std::string msg = e.what();
      CHECK(msg.find("row 2") != std::string::npos);  // data rows are 1-indexed
      CHECK(msg.find("column 2") != std::string::npos);
    }
    std::remove(path.c_str());
  }

  SUBCASE("rows with the wrong arity are a schema error") {
    const std::string path = temp_path("arity.csv");
    {
      std::ofstream out(path);
      out << "t,f1,f2\n";
      out << "0,3\n";
    }
    const auto small = tiny_catalog({1.0, 1.0});
    CHECK_THROWS_AS(load_window(path, WindowFormat::Csv, small), Error);
    std::remove(path.c_str());
  }

  SUBCASE("traffic config round trip") {
    const std::string path = temp_path("config.json");
    const auto cfg = default_traffic_config();
    store_traffic_config(cfg, path);
    const auto back = load_traffic_config(path);
    REQUIRE(back.catalog.features.size() == cfg.catalog.features.size());
    for (std::size_t i = 0; i < cfg.catalog.features.size(); ++i) {
      CHECK(back.catalog.features[i].id == cfg.catalog.features[i].id);
      CHECK(back.catalog.features[i].baseline_rate ==
            doctest::Approx(cfg.catalog.features[i].baseline_rate));
    }
    CHECK(back.catalog.load_dispersion == doctest::Approx(cfg.catalog.load_dispersion));
    REQUIRE(back.signatures.size() == cfg.signatures.size());
    for (std::size_t i = 0; i < cfg.signatures.size(); ++i) {
      CHECK(back.signatures[i].suite_id == cfg.signatures[i].suite_id);
      CHECK(back.signatures[i].threat_level == cfg.signatures[i].threat_level);
      CHECK(back.signatures[i].feature_set == cfg.signatures[i].feature_set);
    }
    std::remove(path.c_str());
  }
}
