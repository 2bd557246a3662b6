#include "pathsec/cs.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "pathsec/errors.hpp"
#include "pathsec/rng.hpp"

namespace pathsec {

int choose_measurement_count(int N, int active_features, const SamplerConfig& cfg) {
  if (N < 2)
    throw Error(ErrorKind::InvalidDimension,
                "measurement count needs N >= 2, got " + std::to_string(N));
  if (active_features < 0)
    throw Error(ErrorKind::Config, "active_features must be >= 0");
  if (cfg.epsilon <= 0.0) throw Error(ErrorKind::Config, "epsilon must be > 0");

  const double eps_prime = cfg.epsilon * static_cast<double>(active_features);
  const double raw = std::ceil(eps_prime * std::sqrt(double(N)) * std::log(double(N)));
  const double clamped = std::clamp(raw, 1.0, double(N));
  return static_cast<int>(clamped);
}

SensingMatrix build_sensing_matrix(int N, int M, std::uint64_t seed) {
  if (N < 1 || M < 1 || M > N)
    throw Error(ErrorKind::InvalidDimension,
                "sensing matrix needs 1 <= M <= N, got M=" + std::to_string(M) +
                    " N=" + std::to_string(N));

  // Seeded sample of M distinct row indices, uniform without replacement.
  std::vector<int> idx(N);
  for (int i = 0; i < N; ++i) idx[i] = i;
  auto rng = make_engine(seed);
  for (int i = 0; i < M; ++i) {
    std::uniform_int_distribution<int> pick(i, N - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::vector<int> rows(idx.begin(), idx.begin() + M);
  std::sort(rows.begin(), rows.end());

  // Orthonormal DCT-II rows: T[r][n] = s_r cos(pi (2n+1) r / (2N)).
  SensingMatrix S;
  S.M = M;
  S.N = N;
  S.seed = seed;
  S.row_subset = rows;
  S.U.resize(M, N);
  const double pi = std::numbers::pi;
  for (int r = 0; r < M; ++r) {
    const int fr = rows[r];
    const double scale = fr == 0 ? std::sqrt(1.0 / N) : std::sqrt(2.0 / N);
    for (int n = 0; n < N; ++n)
      S.U(r, n) = scale * std::cos(pi * (2.0 * n + 1.0) * fr / (2.0 * N));
  }

  for (int n = 0; n < N; ++n) {
    const double norm = S.U.col(n).norm();
    if (norm <= 1e-12)
      throw Error(ErrorKind::InvalidDimension,
                  "degenerate sensing column " + std::to_string(n) + " (zero norm)");
    S.U.col(n) /= norm;
  }
  S.mu = coherence(S.U);
  return S;
}

double coherence(const Eigen::MatrixXd& U) {
  if (U.size() == 0)
    throw Error(ErrorKind::InvalidDimension, "coherence of an empty matrix");
  return U.cwiseAbs().maxCoeff();
}

double min_measurements(double mu, double Q, int N, double const_C) {
  if (N < 2)
    throw Error(ErrorKind::InvalidDimension,
                "measurement bound needs N >= 2, got " + std::to_string(N));
  if (mu < 0.0 || Q < 0.0 || const_C < 0.0)
    throw Error(ErrorKind::Config, "measurement bound inputs must be >= 0");
  return const_C * mu * mu * Q * std::log(double(N));
}

CompressedWindow compress(const SensingMatrix& U, const EventWindow& window) {
  if (U.N != window.rows())
    throw Error(ErrorKind::DimensionMismatch,
                "sensing matrix is " + std::to_string(U.M) + "x" + std::to_string(U.N) +
                    " but window is " + std::to_string(window.rows()) + "x" +
                    std::to_string(window.cols()));
  CompressedWindow out;
  out.Y = U.U * window.samples;
  out.source_window_id = window.id;
  out.sensing_matrix_id = U.id();
  return out;
}

namespace {

// One column of orthogonal matching pursuit. Residual norm is non-increasing
// by construction (each step least-squares-fits an enlarged support).
Eigen::VectorXd omp_column(const Eigen::MatrixXd& U, const Eigen::VectorXd& y, int sparsity) {
  const int N = static_cast<int>(U.cols());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(N);
  if (sparsity <= 0) return x;

  const double ynorm = y.norm();
  const double tol = 1e-8 * std::max(1.0, ynorm);
  if (ynorm <= tol) return x;

  Eigen::VectorXd residual = y;
  std::vector<int> support;
  std::vector<char> in_support(N, 0);
  Eigen::MatrixXd A;  // columns of U restricted to the support
  Eigen::VectorXd coef;

  const int max_iters = std::min<int>(sparsity, static_cast<int>(U.rows()));
  for (int it = 0; it < max_iters; ++it) {
    if (residual.norm() <= tol) break;
    Eigen::VectorXd corr = U.transpose() * residual;
    int best = -1;
    double best_abs = -1.0;
    for (int j = 0; j < N; ++j) {
      if (in_support[j]) continue;
      const double a = std::abs(corr(j));
      if (a > best_abs) {
        best_abs = a;
        best = j;
      }
    }
    if (best < 0 || best_abs <= 0.0) break;
    in_support[best] = 1;
    support.push_back(best);

    A.conservativeResize(U.rows(), static_cast<int>(support.size()));
    A.col(static_cast<int>(support.size()) - 1) = U.col(best);
    coef = A.colPivHouseholderQr().solve(y);
    residual = y - A * coef;
  }
  for (std::size_t i = 0; i < support.size(); ++i) x(support[i]) = coef(static_cast<int>(i));
  return x;
}

}  // namespace

Eigen::MatrixXd reconstruct(const SensingMatrix& U, const CompressedWindow& Y, int sparsity) {
  if (sparsity < 0 || sparsity > U.N)
    throw Error(ErrorKind::InvalidDimension,
                "sparsity must be in [0, N]; got " + std::to_string(sparsity));
  if (Y.Y.rows() != U.M)
    throw Error(ErrorKind::DimensionMismatch,
                "compressed window has " + std::to_string(Y.Y.rows()) + " rows, sensing matrix has " +
                    std::to_string(U.M));
  const int nf = static_cast<int>(Y.Y.cols());
  Eigen::MatrixXd phi_hat = Eigen::MatrixXd::Zero(U.N, nf);
  for (int j = 0; j < nf; ++j) phi_hat.col(j) = omp_column(U.U, Y.Y.col(j), sparsity);
  return phi_hat;
}

double reconstruction_mse(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& phi_hat) {
  if (phi.rows() != phi_hat.rows() || phi.cols() != phi_hat.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "MSE of " + std::to_string(phi.rows()) + "x" + std::to_string(phi.cols()) +
                    " vs " + std::to_string(phi_hat.rows()) + "x" + std::to_string(phi_hat.cols()));
  if (phi.size() == 0) throw Error(ErrorKind::InvalidDimension, "MSE of empty matrices");
  return (phi - phi_hat).array().square().mean();
}

RicEstimate ric_estimate(const SensingMatrix& U, int k, int trials, std::uint64_t seed) {
  if (k < 1 || k > U.N)
    throw Error(ErrorKind::InvalidDimension, "ric_estimate needs 1 <= k <= N");
  if (trials < 1)
    throw Error(ErrorKind::Config, "ric_estimate needs trials >= 1");

  auto rng = make_engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  RicEstimate est;
  est.k = k;
  est.trials = trials;
  double delta = 0.0;
  std::vector<int> idx(U.N);
  for (int i = 0; i < U.N; ++i) idx[i] = i;

  for (int t = 0; t < trials; ++t) {
    // k-sparse unit vector on a uniformly chosen support
    for (int i = 0; i < k; ++i) {
      std::uniform_int_distribution<int> pick(i, U.N - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(U.N);
    double norm2 = 0.0;
    for (int i = 0; i < k; ++i) {
      const double v = gauss(rng);
      x(idx[i]) = v;
      norm2 += v * v;
    }
    if (norm2 <= 0.0) continue;
    x /= std::sqrt(norm2);
    const double y2 = (U.U * x).squaredNorm();
    delta = std::max(delta, std::abs(y2 - 1.0));
  }
  est.delta_k = delta;
  return est;
}

}  // namespace pathsec
