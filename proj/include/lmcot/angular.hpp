#pragma once

// Vector normalization and the angle / cotangent kernels shared by every
// angular margin loss.

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace lmcot {

using Rng = std::mt19937_64;

enum class LogBase { natural, ten };

/// Which of the two cot evaluations to use inside the cot-family losses.
enum class CotPath {
  angle,     ///< from theta via tan (requires arccos upstream)
  identity,  ///< from cos theta via sin = sqrt(1 - cos^2) and angle addition
};

/// Every hyperparameter of the loss family in one place.
struct LossConfig {
  double s = 2.0;
  double m = 0.05;
  double m1 = 1.0;
  double m2 = 0.0;
  double m3 = 0.0;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double sigma3 = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  double eps = 1e-7;
  LogBase log_base = LogBase::natural;
  CotPath cot_path = CotPath::angle;

  /// Throws InputError on eps <= 0, s < 0 or negative sigmas.
  void validate() const;
  /// Additionally rejects alpha + beta <= 0 or negative mixing weights.
  void validate_dual() const;
};

/// Per-sample class angles with true labels; the common input to every
/// angular loss. theta is N x n, labels has N entries in [0, n).
struct AngularBatch {
  Eigen::MatrixXd theta;
  std::vector<int> labels;

  Eigen::Index size() const { return theta.rows(); }
  Eigen::Index classes() const { return theta.cols(); }

  /// Throws InputError unless every angle is in [0, pi) and labels index columns.
  void validate() const;
};

/// Unit vector in the direction of v. Throws ZeroVectorError if ||v|| < eps.
Eigen::VectorXd l2_normalize(const Eigen::VectorXd& v, double eps = 1e-7);

/// Row-wise l2_normalize.
Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& rows, double eps = 1e-7);

/// theta_ji = arccos(clamp(x_i . w_j, -1 + eps, 1 - eps)) with both rows
/// normalized first. Returns an N x n matrix.
Eigen::MatrixXd angles_from_features(const Eigen::MatrixXd& features,
                                     const Eigen::MatrixXd& class_weights,
                                     double eps = 1e-7);

struct CotPair {
  double cot_theta;
  double cot_theta_m;
};

/// cot theta and cot(theta + m) from the angle. |tan theta| is floored at eps
/// (sign kept); cot(theta + m) is not floored. Throws SingularityError when
/// theta + m lies within eps of a multiple of pi.
CotPair cot_via_theta(double theta, double m, double eps = 1e-7);

/// The same pair from cos theta alone: sin theta = max(sqrt(1 - cos^2), eps),
/// then angle addition for cos(theta + m) and sin(theta + m). Throws
/// SingularityError when |sin(theta + m)| < eps.
CotPair cot_via_identity(double cos_theta, double m, double eps = 1e-7);

/// Dispatches on path; the identity route takes cos(theta).
CotPair cot_pair(CotPath path, double theta, double m, double eps);

/// A cot evaluation with its derivative d/dtheta.
struct CotValue {
  double value;
  double slope;
};

/// Floored cot theta as used for non-target classes. Never throws; inside the
/// floor the value is constant (angle path) or cos theta / eps (identity path).
CotValue cot_other(CotPath path, double theta, double eps);

/// cot(theta + m) as used for the target class. Throws SingularityError near
/// the poles.
CotValue cot_shifted(CotPath path, double theta, double m, double eps);

/// One draw from N(mean, sigma^2). Always consumes exactly one standard
/// normal from rng, so the stream position does not depend on sigma;
/// sigma == 0 returns mean exactly.
double elastic_sample(double mean, double sigma, Rng& rng);

}  // namespace lmcot
