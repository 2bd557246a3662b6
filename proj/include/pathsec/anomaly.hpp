#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "pathsec/cs.hpp"

namespace pathsec {

struct Spectrum {
  Eigen::VectorXd eigenvalues;  // descending, clamped at 0
  Eigen::MatrixXd E;            // d x k principal directions
  int k = 0;
  double power_fraction = 0.0;
  bool degenerate = false;  // all-constant input: k = 0, empty E
};

struct QStatParams {
  double theta1 = 0.0, theta2 = 0.0, theta3 = 0.0;
  double h0 = 0.0;
  double c_beta = 0.0;
  double q_beta = 0.0;
};

struct AnomalyReport {
  Eigen::VectorXd spe;  // per-feature mean squared residual across rows
  double threshold = 0.0;
  bool threshold_defined = false;
  bool anomalous = false;
  std::string window_id;
  std::vector<int> flagged_features;  // indices with spe > threshold
};

/// Mean-center the columns of Y, eigendecompose the feature covariance, keep
/// the smallest k whose eigenvalue sum reaches power_fraction of the total.
Spectrum principal_subspace(const Eigen::MatrixXd& Y, double power_fraction);

/// z = (I - E E^T) x; k = 0 gives the identity projector.
Eigen::VectorXd residual_projection(const Eigen::MatrixXd& E, const Eigen::VectorXd& x);

/// Residual-spectrum threshold. The canonical closed form is the default; the
/// variant flag switches to the alternative printed h0/bracket (documented in
/// the README) for comparison runs.
QStatParams q_threshold(const Spectrum& spectrum, double beta, bool printed_variant = false);

/// In-window detection: spectrum and threshold derived from Y itself.
AnomalyReport detect(const CompressedWindow& Y, double power_fraction, double beta);

/// Reference-thresholded detection: project Y's centered rows onto the
/// residual subspace of a baseline reference spectrum and compare against the
/// reference threshold. This is the pipeline's mode: the threshold encodes
/// clean traffic, so attack energy cannot inflate it.
AnomalyReport detect(const CompressedWindow& Y, const Spectrum& reference,
                     const QStatParams& reference_q);

/// 4 sqrt(2 lambda1) (sqrt(n_v / M) + sqrt(2 ln(1/conf) / M))
double eigenvalue_drift_bound(double lambda1, double n_v, double M, double conf);

/// Bracketed false-alarm quantity sqrt(n_v / M) + sqrt(2 ln(1/conf) / M).
double false_alarm_bound(double n_v, double M, double conf);

}  // namespace pathsec
