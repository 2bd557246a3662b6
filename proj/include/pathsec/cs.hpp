#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "pathsec/types.hpp"

namespace pathsec {

struct SamplerConfig {
  double epsilon = 0.25;  // per-active-feature sampling coefficient
  double const_C = 1.0;   // advisory measurement-bound constant
  std::uint64_t seed = 0;
  // log base is natural (fixed): both the measurement-count rule and the
  // advisory bound use ln N.
};

struct SensingMatrix {
  Eigen::MatrixXd U;            // M x N, columns unit-norm
  std::vector<int> row_subset;  // selected transform-row indices, ascending
  double mu = 0.0;              // coherence: max |entry|
  int M = 0;
  int N = 0;
  std::uint64_t seed = 0;

  std::string id() const {
    return "dct:" + std::to_string(N) + ":" + std::to_string(M) + ":" + std::to_string(seed);
  }
};

struct CompressedWindow {
  Eigen::MatrixXd Y;  // M x N_f
  std::string source_window_id;
  std::string sensing_matrix_id;
};

struct RicEstimate {
  double delta_k = 0.0;
  int trials = 0;
  int k = 0;
};

/// M = clamp(ceil(epsilon' * sqrt(N) * ln N), 1, N) with
/// epsilon' = cfg.epsilon * active_features.
int choose_measurement_count(int N, int active_features, const SamplerConfig& cfg);

/// M distinct seeded rows of the orthonormal DCT-II transform, columns then
/// normalized to unit Euclidean norm.
SensingMatrix build_sensing_matrix(int N, int M, std::uint64_t seed);

/// Coherence of an arbitrary matrix: max absolute entry.
double coherence(const Eigen::MatrixXd& U);

/// Advisory lower bound const_C * mu^2 * Q * ln N on the measurement count.
double min_measurements(double mu, double Q, int N, double const_C);

CompressedWindow compress(const SensingMatrix& U, const EventWindow& window);

/// Per-column orthogonal matching pursuit: residual tolerance 1e-8 (relative),
/// at most `sparsity` atoms per column. sparsity 0 returns the zero matrix.
Eigen::MatrixXd reconstruct(const SensingMatrix& U, const CompressedWindow& Y, int sparsity);

double reconstruction_mse(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& phi_hat);

/// Monte-Carlo lower bound on the restricted isometric constant: running max
/// of |‖Ux‖² − 1| over seeded k-sparse unit vectors.
RicEstimate ric_estimate(const SensingMatrix& U, int k, int trials, std::uint64_t seed);

}  // namespace pathsec
