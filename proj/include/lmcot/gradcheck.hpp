#pragma once

// Central finite-difference verification of the analytic loss gradients.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace lmcot {

struct GradcheckReport {
  std::string loss;
  int trials = 0;
  double h = 0.0;
  double max_rel_error = 0.0;
  int worst_trial = -1;
  /// Human-readable description of the worst configuration.
  std::string worst_config;
};

/// ||a - n|| / max(||a||, ||n||), 0 when both vanish and infinite when
/// either holds a non-finite entry.
double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric);

/// Runs `trials` random configurations chosen away from the cot poles and
/// compares each analytic gradient with central differences of step h.
/// `loss` is any angular loss name, "softmax", "double" or "margin-ce".
/// Throws InputError for unknown names or trials < 1.
GradcheckReport gradcheck(std::string_view loss, int trials, double h = 1e-5,
                          std::uint64_t seed = 0);

/// Every name accepted by gradcheck.
std::vector<std::string> gradcheck_targets();

}  // namespace lmcot
