#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

namespace morseflow::ode {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct IntegrationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Rhs = std::function<VectorXd(double, const VectorXd&)>;

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double h_initial = 0.0;   // 0: pick from the interval
  double h_min_factor = 1e-14;
  long max_steps = 2'000'000;
};

/// Adaptive Dormand-Prince 5(4). Integrates y' = f(t, y) from t0 to t1
/// (either direction) and returns y(t1). The observer, when set, sees every
/// accepted step.
VectorXd integrate(const Rhs& f, double t0, VectorXd y0, double t1,
                   const OdeOptions& opts = {},
                   const std::function<void(double, const VectorXd&)>& observer = {});

/// Matrix-valued convenience wrapper (column-major flattening).
MatrixXd integrate_matrix(const std::function<MatrixXd(double, const MatrixXd&)>& f,
                          double t0, const MatrixXd& Y0, double t1,
                          const OdeOptions& opts = {});

}  // namespace morseflow::ode
