#include "pathsec/anomaly.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "pathsec/errors.hpp"

namespace pathsec {

Spectrum principal_subspace(const Eigen::MatrixXd& Y, double power_fraction) {
  if (power_fraction <= 0.0 || power_fraction > 1.0)
    throw Error(ErrorKind::Config, "power_fraction must be in (0, 1]");
  if (!Y.allFinite())
    throw Error(ErrorKind::Parse, "spectrum input contains non-finite entries");
  const int rows = static_cast<int>(Y.rows());
  const int d = static_cast<int>(Y.cols());
  if (rows < 2)
    throw Error(ErrorKind::InsufficientSamples,
                "covariance needs >= 2 rows, got " + std::to_string(rows));

  Eigen::MatrixXd centered = Y.rowwise() - Y.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / double(rows - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success)
    throw Error(ErrorKind::InsufficientSamples, "eigendecomposition failed");

  Spectrum s;
  s.power_fraction = power_fraction;
  s.eigenvalues.resize(d);
  Eigen::MatrixXd vecs(d, d);
  for (int i = 0; i < d; ++i) {  // eigh returns ascending; flip to descending
    s.eigenvalues(i) = std::max(0.0, es.eigenvalues()(d - 1 - i));
    vecs.col(i) = es.eigenvectors().col(d - 1 - i);
  }

  const double total = s.eigenvalues.sum();
  if (total <= 0.0) {
    s.k = 0;
    s.E.resize(d, 0);
    s.degenerate = true;
    return s;
  }
  double cum = 0.0;
  int k = d;
  for (int i = 0; i < d; ++i) {
    cum += s.eigenvalues(i);
    if (cum >= power_fraction * total) {
      k = i + 1;
      break;
    }
  }
  s.k = k;
  s.E = vecs.leftCols(k);
  return s;
}

Eigen::VectorXd residual_projection(const Eigen::MatrixXd& E, const Eigen::VectorXd& x) {
  if (E.cols() == 0) return x;
  if (E.rows() != x.size())
    throw Error(ErrorKind::DimensionMismatch,
                "projector is " + std::to_string(E.rows()) + "-dimensional but x has " +
                    std::to_string(x.size()) + " entries");
  return x - E * (E.transpose() * x);
}

QStatParams q_threshold(const Spectrum& spectrum, double beta, bool printed_variant) {
  if (beta <= 0.0 || beta >= 1.0)
    throw Error(ErrorKind::Config, "beta must be in (0, 1)");
  const int d = static_cast<int>(spectrum.eigenvalues.size());
  if (spectrum.k >= d)
    throw Error(ErrorKind::ThresholdUndefined,
                "no residual eigenvalues beyond k=" + std::to_string(spectrum.k));

  QStatParams q;
  for (int j = spectrum.k; j < d; ++j) {
    const double l = spectrum.eigenvalues(j);
    q.theta1 += l;
    q.theta2 += l * l;
    q.theta3 += l * l * l;
  }
  if (q.theta1 <= 0.0 || q.theta2 <= 0.0)
    throw Error(ErrorKind::ThresholdUndefined, "residual spectrum is zero");

  boost::math::normal_distribution<double> normal01;
  q.c_beta = boost::math::quantile(normal01, 1.0 - beta);

  if (printed_variant) {
    q.h0 = 1.0 - 2.0 * q.theta1 * q.theta3 / (q.theta1 * q.theta1);
    const double bracket = q.c_beta * std::sqrt(2.0 * q.theta2 * q.h0 * q.h0) / q.theta1 +
                           q.theta2 * q.h0 * (q.h0 - 1.0) / (q.theta1 * q.theta1);
    q.q_beta = q.theta1 * std::pow(std::abs(bracket), 1.0 / q.h0);
    return q;
  }

  q.h0 = 1.0 - 2.0 * q.theta1 * q.theta3 / (3.0 * q.theta2 * q.theta2);
  const double bracket = q.c_beta * std::sqrt(2.0 * q.theta2 * q.h0 * q.h0) / q.theta1 + 1.0 +
                         q.theta2 * q.h0 * (q.h0 - 1.0) / (q.theta1 * q.theta1);
  q.q_beta = q.theta1 * std::pow(bracket, 1.0 / q.h0);
  return q;
}

namespace {

// Per-feature squared prediction error: mean over rows of the squared residual
// coordinate, so the SPE vector sums to the mean per-row ‖z‖² (the scale the
// threshold is calibrated on).
Eigen::VectorXd spe_per_feature(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& E) {
  Eigen::MatrixXd centered = Y.rowwise() - Y.colwise().mean();
  Eigen::MatrixXd Z = E.cols() == 0 ? centered : (centered - (centered * E) * E.transpose()).eval();
  return Z.array().square().colwise().sum() / double(Y.rows());
}

AnomalyReport report_from(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& E,
                          const QStatParams* q, const std::string& window_id) {
  AnomalyReport r;
  r.window_id = window_id;
  r.spe = spe_per_feature(Y, E);
  if (q == nullptr) {
    // threshold-undefined path: report SPE, never flag (all-zero windows land here)
    r.threshold = 0.0;
    r.threshold_defined = false;
    r.anomalous = false;
    return r;
  }
  r.threshold = q->q_beta;
  r.threshold_defined = true;
  for (int j = 0; j < r.spe.size(); ++j)
    if (r.spe(j) > r.threshold) r.flagged_features.push_back(j);
  r.anomalous = !r.flagged_features.empty();
  return r;
}

}  // namespace

AnomalyReport detect(const CompressedWindow& Y, double power_fraction, double beta) {
  Spectrum s = principal_subspace(Y.Y, power_fraction);
  if (s.degenerate) return report_from(Y.Y, s.E, nullptr, Y.source_window_id);
  try {
    QStatParams q = q_threshold(s, beta);
    return report_from(Y.Y, s.E, &q, Y.source_window_id);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ThresholdUndefined) throw;
    return report_from(Y.Y, s.E, nullptr, Y.source_window_id);
  }
}

AnomalyReport detect(const CompressedWindow& Y, const Spectrum& reference,
                     const QStatParams& reference_q) {
  if (reference.E.rows() > 0 && reference.E.rows() != Y.Y.cols())
    throw Error(ErrorKind::DimensionMismatch,
                "reference spectrum is " + std::to_string(reference.E.rows()) +
                    "-dimensional but window has " + std::to_string(Y.Y.cols()) + " features");
  return report_from(Y.Y, reference.E, &reference_q, Y.source_window_id);
}

double eigenvalue_drift_bound(double lambda1, double n_v, double M, double conf) {
  if (lambda1 < 0.0) throw Error(ErrorKind::Config, "lambda1 must be >= 0");
  if (M < 1.0) throw Error(ErrorKind::Config, "M must be >= 1");
  if (conf <= 0.0 || conf >= 1.0) throw Error(ErrorKind::Config, "conf must be in (0, 1)");
  return 4.0 * std::sqrt(2.0 * lambda1) *
         (std::sqrt(n_v / M) + std::sqrt(2.0 * std::log(1.0 / conf) / M));
}

double false_alarm_bound(double n_v, double M, double conf) {
  if (M < 1.0) throw Error(ErrorKind::Config, "M must be >= 1");
  if (conf <= 0.0 || conf >= 1.0) throw Error(ErrorKind::Config, "conf must be in (0, 1)");
  return std::sqrt(n_v / M) + std::sqrt(2.0 * std::log(1.0 / conf) / M);
}

}  // namespace pathsec
