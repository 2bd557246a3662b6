#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "pathsec/cs.hpp"
#include "pathsec/errors.hpp"
#include "pathsec/rng.hpp"

using namespace pathsec;

namespace {

EventWindow window_from(const Eigen::MatrixXd& m) {
  EventWindow w;
  w.id = "synthetic";
  w.samples = m;
  return w;
}

SensingMatrix literal_sensing(const Eigen::MatrixXd& u) {
  SensingMatrix s;
  s.U = u;
  s.M = static_cast<int>(u.rows());
  s.N = static_cast<int>(u.cols());
  s.mu = coherence(u);
  for (int i = 0; i < s.M; ++i) s.row_subset.push_back(i);
  return s;
}

}  // namespace

TEST_CASE("measurement count rule") {
  SamplerConfig cfg;

  SUBCASE("hand-checked values") {
    cfg.epsilon = 1.0;
    CHECK(choose_measurement_count(1024, 1, cfg) == 222);  // ceil(32 * ln 1024)
    cfg.epsilon = 0.5;
    CHECK(choose_measurement_count(10000, 1, cfg) == 461);  // ceil(0.5 * 100 * ln 10000)
    cfg.epsilon = 0.25;
    CHECK(choose_measurement_count(1024, 4, cfg) == 222);  // epsilon' = 1 again
  }

  SUBCASE("result clamps into [1, N]") {
    cfg.epsilon = 100.0;
    CHECK(choose_measurement_count(64, 19, cfg) == 64);
    cfg.epsilon = 1e-9;
    CHECK(choose_measurement_count(64, 1, cfg) == 1);
  }

  SUBCASE("monotone in the active feature count") {
    cfg.epsilon = 0.05;
    int prev = 0;
    for (int active = 1; active <= 19; ++active) {
      const int m = choose_measurement_count(2048, active, cfg);
      CHECK(m >= prev);
      prev = m;
    }
  }

  SUBCASE("degenerate lengths are rejected") {
    CHECK_THROWS_AS(choose_measurement_count(1, 4, cfg), Error);
    CHECK_THROWS_AS(choose_measurement_count(0, 4, cfg), Error);
    CHECK_THROWS_AS(choose_measurement_count(64, -1, cfg), Error);
    // no active features still clamps up to a single measurement
    CHECK(choose_measurement_count(64, 0, cfg) == 1);
  }
}

TEST_CASE("sensing matrix construction") {
  SUBCASE("full measurement is an orthonormal transform") {
    const auto s = build_sensing_matrix(16, 16, 9);
    const Eigen::MatrixXd gram = s.U.transpose() * s.U;
    CHECK((gram - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("columns have unit norm after row selection") {
    const auto s = build_sensing_matrix(64, 16, 3);
    for (int j = 0; j < 64; ++j)
      CHECK(s.U.col(j).norm() == doctest::Approx(1.0).epsilon(1e-9));
  }

  SUBCASE("row subset is sorted, unique and in range") {
    const auto s = build_sensing_matrix(128, 40, 5);
    REQUIRE(s.row_subset.size() == 40);
    std::set<int> seen;
    int prev = -1;
    for (int r : s.row_subset) {
      CHECK(r > prev);
      CHECK(r >= 0);
      CHECK(r < 128);
      prev = r;
      seen.insert(r);
    }
    CHECK(seen.size() == 40);
  }

  SUBCASE("same seed reproduces the same matrix") {
    const auto a = build_sensing_matrix(64, 16, 42);
    const auto b = build_sensing_matrix(64, 16, 42);
    CHECK(a.U == b.U);
    CHECK(a.row_subset == b.row_subset);
    const auto c = build_sensing_matrix(64, 16, 43);
    CHECK(a.row_subset != c.row_subset);
  }

  SUBCASE("coherence stays below one for strict subsampling") {
    const auto s = build_sensing_matrix(64, 16, 7);
    CHECK(s.mu > 0.0);
    CHECK(s.mu < 1.0);
    CHECK(s.mu == doctest::Approx(coherence(s.U)));
  }

  SUBCASE("invalid shapes are rejected") {
    CHECK_THROWS_AS(build_sensing_matrix(8, 9, 0), Error);
    CHECK_THROWS_AS(build_sensing_matrix(8, 0, 0), Error);
    CHECK_THROWS_AS(build_sensing_matrix(0, 0, 0), Error);
  }
}

TEST_CASE("coherence and the advisory measurement bound") {
  SUBCASE("identity has coherence one") {
    CHECK(coherence(Eigen::MatrixXd::Identity(4, 4)) == doctest::Approx(1.0));
  }

  SUBCASE("a flat sign matrix has coherence equal to its amplitude") {
    Eigen::MatrixXd u(2, 2);
    u << 0.5, -0.5,
         -0.5, 0.5;
    CHECK(coherence(u) == doctest::Approx(0.5));
  }

  SUBCASE("zero matrix has coherence zero") {
    CHECK(coherence(Eigen::MatrixXd::Zero(3, 5)) == doctest::Approx(0.0));
  }

  SUBCASE("advisory bound hand values") {
    CHECK(min_measurements(0.5, 4.0, 1024, 1.0) == doctest::Approx(6.931471805599453));
    CHECK(min_measurements(0.5, 0.0, 1024, 1.0) == doctest::Approx(0.0));
    CHECK(min_measurements(0.25, 4.0, 1024, 2.0) ==
          doctest::Approx(2.0 * 0.0625 * 4.0 * std::log(1024.0)));
  }
}

TEST_CASE("compression") {
  SUBCASE("zero window compresses to zero") {
    const auto s = build_sensing_matrix(32, 8, 1);
    const auto y = compress(s, window_from(Eigen::MatrixXd::Zero(32, 19)));
    CHECK(y.Y.rows() == 8);
    CHECK(y.Y.cols() == 19);
    CHECK(y.Y.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(y.sensing_matrix_id == s.id());
  }

  SUBCASE("hand-checked matrix product") {
    Eigen::MatrixXd u(2, 3);
    u << 1, 0, 2,
         0, 1, -1;
    Eigen::MatrixXd x(3, 2);
    x << 1, 4,
         2, 5,
         3, 6;
    const auto y = compress(literal_sensing(u), window_from(x));
    Eigen::MatrixXd expect(2, 2);
    expect << 7, 16,
              -1, -1;
    CHECK((y.Y - expect).cwiseAbs().maxCoeff() < 1e-12);
  }

  SUBCASE("row count mismatch names both shapes") {
    const auto s = build_sensing_matrix(32, 8, 1);
    try {
      compress(s, window_from(Eigen::MatrixXd::Zero(16, 19)));
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::DimensionMismatch);
      const std::string msg = e.what();
      CHECK(msg.find("32") != std::string::npos);
      CHECK(msg.find("16") != std::string::npos);
    }
  }

  SUBCASE("compression is linear") {
    const auto s = build_sensing_matrix(64, 24, 12);
    auto eng = make_engine(55);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd a(64, 5), b(64, 5);
    for (int i = 0; i < 64; ++i)
      for (int j = 0; j < 5; ++j) {
        a(i, j) = gauss(eng);
        b(i, j) = gauss(eng);
      }
    const auto ya = compress(s, window_from(a)).Y;
    const auto yb = compress(s, window_from(b)).Y;
    const auto yab = compress(s, window_from(2.0 * a + 3.0 * b)).Y;
    const Eigen::MatrixXd lhs = 2.0 * ya + 3.0 * yb;
    CHECK((yab - lhs).cwiseAbs().maxCoeff() / std::max(1.0, lhs.cwiseAbs().maxCoeff()) < 1e-6);
  }
}

TEST_CASE("reconstruction") {
  SUBCASE("sparsity zero returns the zero matrix") {
    const auto s = build_sensing_matrix(32, 16, 2);
    const auto y = compress(s, window_from(Eigen::MatrixXd::Ones(32, 3)));
    const auto rec = reconstruct(s, y, 0);
    CHECK(rec.rows() == 32);
    CHECK(rec.cols() == 3);
    CHECK(rec.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }

  SUBCASE("zero measurements reconstruct to zero") {
    const auto s = build_sensing_matrix(32, 16, 2);
    CompressedWindow y;
    y.Y = Eigen::MatrixXd::Zero(16, 4);
    y.sensing_matrix_id = s.id();
    const auto rec = reconstruct(s, y, 8);
    CHECK(rec.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
  }

  SUBCASE("full measurement reconstructs any window") {
    const auto s = build_sensing_matrix(32, 32, 6);
    auto eng = make_engine(8);
    std::poisson_distribution<int> pois(9.0);
    Eigen::MatrixXd x(32, 4);
    for (int i = 0; i < 32; ++i)
      for (int j = 0; j < 4; ++j) x(i, j) = pois(eng);
    const auto y = compress(s, window_from(x));
    const auto rec = reconstruct(s, y, 32);
    CHECK((rec - x).cwiseAbs().maxCoeff() < 1e-6);
  }

  SUBCASE("sparse signals are recovered exactly in low-coherence regimes") {
    // configurations where mu < 1/(2k - 1), the classic exact-recovery premise
    struct Pin { int n; int m; };
    for (const Pin pin : {Pin{256, 128}, Pin{512, 256}}) {
      const auto s = build_sensing_matrix(pin.n, pin.m, 2024);
      REQUIRE(s.mu < 1.0 / 3.0);  // supports k <= 2
      Eigen::MatrixXd x = Eigen::MatrixXd::Zero(pin.n, 2);
      x(17, 0) = 5.0;
      x(100, 0) = -2.0;
      x(3, 1) = 11.0;
      const auto y = compress(s, window_from(x));
      const auto rec = reconstruct(s, y, 2);
      CHECK((rec - x).cwiseAbs().maxCoeff() < 1e-6);
    }
  }

  SUBCASE("dimension mismatch is rejected") {
    const auto s = build_sensing_matrix(32, 16, 2);
    CompressedWindow y;
    y.Y = Eigen::MatrixXd::Zero(15, 4);
    CHECK_THROWS_AS(reconstruct(s, y, 4), Error);
    CHECK_THROWS_AS(reconstruct(s, compress(s, window_from(Eigen::MatrixXd::Zero(32, 2))), -1),
                    Error);
  }
}

TEST_CASE("reconstruction error metric") {
  SUBCASE("identical matrices score zero") {
    Eigen::MatrixXd m = Eigen::MatrixXd::Random(5, 3);
    CHECK(reconstruction_mse(m, m) == doctest::Approx(0.0));
  }

  SUBCASE("uniform offset of one scores one") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(4, 4);
    Eigen::MatrixXd b = Eigen::MatrixXd::Ones(4, 4);
    CHECK(reconstruction_mse(a, b) == doctest::Approx(1.0));
  }

  SUBCASE("hand-checked mixed differences") {
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 1, 2, 3, 4;
    b << 2, 2, 3, 0;
    CHECK(reconstruction_mse(a, b) == doctest::Approx(4.25));
  }

  SUBCASE("shape mismatch is rejected") {
    CHECK_THROWS_AS(reconstruction_mse(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 2)),
                    Error);
  }
}

TEST_CASE("restricted isometry estimate") {
  SUBCASE("an orthonormal transform is a near-perfect isometry") {
    const auto s = build_sensing_matrix(64, 64, 4);
    const auto est = ric_estimate(s, 3, 200, 11);
    CHECK(est.delta_k < 1e-9);
    CHECK(est.trials == 200);
    CHECK(est.k == 3);
  }

  SUBCASE("estimate is a running maximum over the trial stream") {
    const auto s = build_sensing_matrix(128, 38, 4);
    const auto few = ric_estimate(s, 4, 100, 21);
    const auto many = ric_estimate(s, 4, 500, 21);
    CHECK(many.delta_k >= few.delta_k);
    CHECK(few.delta_k > 0.0);
    CHECK(many.delta_k < 1.0);
  }

  SUBCASE("invalid parameters are rejected") {
    const auto s = build_sensing_matrix(32, 16, 1);
    CHECK_THROWS_AS(ric_estimate(s, 0, 100, 1), Error);
    CHECK_THROWS_AS(ric_estimate(s, 4, 0, 1), Error);
    CHECK_THROWS_AS(ric_estimate(s, 33, 100, 1), Error);
  }
}
