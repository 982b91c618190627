#include "lmcot/angular.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lmcot/errors.hpp"

namespace lmcot {

void LossConfig::validate() const {
  if (!(eps > 0.0)) throw InputError("eps must be > 0");
  if (!(s >= 0.0)) throw InputError("scale s must be >= 0");
  if (!(sigma1 >= 0.0 && sigma2 >= 0.0 && sigma3 >= 0.0))
    throw InputError("elastic standard deviations must be >= 0");
}

void LossConfig::validate_dual() const {
  validate();
  if (alpha < 0.0 || beta < 0.0 || !(alpha + beta > 0.0))
    throw InputError("dual loss needs alpha, beta >= 0 with alpha + beta > 0");
}

void AngularBatch::validate() const {
  if (theta.rows() == 0 || theta.cols() == 0) throw InputError("empty angular batch");
  if (static_cast<Eigen::Index>(labels.size()) != theta.rows())
    throw InputError("label count does not match batch size");
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= theta.cols())
      throw InputError("label " + std::to_string(y) + " out of range");
    for (Eigen::Index j = 0; j < theta.cols(); ++j) {
      const double t = theta(i, j);
      if (!std::isfinite(t) || t < 0.0 || t >= std::numbers::pi)
        throw InputError("angle outside [0, pi)");
    }
  }
}

Eigen::VectorXd l2_normalize(const Eigen::VectorXd& v, double eps) {
  if (v.size() == 0) throw InputError("cannot normalize an empty vector");
  if (!v.allFinite()) throw InputError("non-finite vector");
  const double norm = v.norm();
  if (norm < eps) throw ZeroVectorError("vector norm below eps");
  return v / norm;
}

Eigen::MatrixXd normalize_rows(const Eigen::MatrixXd& rows, double eps) {
  Eigen::MatrixXd out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    out.row(i) = l2_normalize(rows.row(i).transpose(), eps).transpose();
  return out;
}

Eigen::MatrixXd angles_from_features(const Eigen::MatrixXd& features,
                                     const Eigen::MatrixXd& class_weights, double eps) {
  if (features.cols() != class_weights.cols())
    throw InputError("feature and weight dimensions differ");
  if (!features.allFinite() || !class_weights.allFinite())
    throw InputError("non-finite features or weights");
  const Eigen::MatrixXd cosines =
      normalize_rows(features, eps) * normalize_rows(class_weights, eps).transpose();
  return cosines.unaryExpr(
      [eps](double c) { return std::acos(std::clamp(c, -1.0 + eps, 1.0 - eps)); });
}

namespace {

double floored_cot(double theta, double eps) {
  double tan_theta = std::tan(theta);
  if (std::abs(tan_theta) < eps) tan_theta = std::copysign(eps, tan_theta);
  return 1.0 / tan_theta;
}

double shifted_cot(double theta, double m, double eps) {
  const double shifted = theta + m;
  if (std::abs(std::sin(shifted)) < eps)
    throw SingularityError("cot(theta + m) singular at theta + m = " + std::to_string(shifted));
  return 1.0 / std::tan(shifted);
}

double identity_sin(double cos_theta, double eps) {
  return std::max(std::sqrt(1.0 - cos_theta * cos_theta), eps);
}

double identity_shifted_cot(double cos_theta, double sin_theta, double m, double eps) {
  const double cos_m = std::cos(m);
  const double sin_m = std::sin(m);
  const double cos_theta_m = cos_theta * cos_m - sin_theta * sin_m;
  const double sin_theta_m = sin_theta * cos_m + cos_theta * sin_m;
  if (std::abs(sin_theta_m) < eps) throw SingularityError("sin(theta + m) below eps");
  return cos_theta_m / sin_theta_m;
}

}  // namespace

CotPair cot_via_theta(double theta, double m, double eps) {
  const double cot_theta_m = shifted_cot(theta, m, eps);
  return {floored_cot(theta, eps), cot_theta_m};
}

CotPair cot_via_identity(double cos_theta, double m, double eps) {
  if (!(cos_theta >= -1.0 && cos_theta <= 1.0)) throw InputError("cos theta outside [-1, 1]");
  const double sin_theta = identity_sin(cos_theta, eps);
  return {cos_theta / sin_theta, identity_shifted_cot(cos_theta, sin_theta, m, eps)};
}

CotPair cot_pair(CotPath path, double theta, double m, double eps) {
  if (path == CotPath::identity) return cot_via_identity(std::cos(theta), m, eps);
  return cot_via_theta(theta, m, eps);
}

CotValue cot_other(CotPath path, double theta, double eps) {
  if (path == CotPath::angle) {
    if (std::abs(std::tan(theta)) < eps) return {floored_cot(theta, eps), 0.0};
    const double c = floored_cot(theta, eps);
    return {c, -(1.0 + c * c)};
  }
  const double cos_theta = std::cos(theta);
  if (std::sqrt(1.0 - cos_theta * cos_theta) < eps)
    return {cos_theta / eps, -std::sin(theta) / eps};
  const double c = cos_theta / identity_sin(cos_theta, eps);
  return {c, -(1.0 + c * c)};
}

CotValue cot_shifted(CotPath path, double theta, double m, double eps) {
  double c = 0.0;
  if (path == CotPath::angle) {
    c = shifted_cot(theta, m, eps);
  } else {
    const double cos_theta = std::cos(theta);
    c = identity_shifted_cot(cos_theta, identity_sin(cos_theta, eps), m, eps);
  }
  return {c, -(1.0 + c * c)};
}

double elastic_sample(double mean, double sigma, Rng& rng) {
  std::normal_distribution<double> standard(0.0, 1.0);
  const double z = standard(rng);
  if (sigma == 0.0) return mean;
  return mean + sigma * z;
}

}  // namespace lmcot
