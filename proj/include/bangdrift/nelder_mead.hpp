#pragma once

#include <Eigen/Dense>

#include <functional>

namespace bangdrift {

struct NelderMeadOptions {
  int max_evaluations = 2000;
  double initial_step = 0.1;
  // Stop when the simplex's function spread and diameter both fall below these.
  double f_tolerance = 1e-15;
  double x_tolerance = 1e-12;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
};

// Minimizes f over the box [lower, upper]; trial points are clamped into the box.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const NelderMeadOptions& options = {});

}  // namespace bangdrift
