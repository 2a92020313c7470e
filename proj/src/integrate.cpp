#include "morseflow/integrate.hpp"

#include <cmath>

namespace morseflow::ode {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                 a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

VectorXd integrate(const Rhs& f, double t0, VectorXd y, double t1,
                   const OdeOptions& opts,
                   const std::function<void(double, const VectorXd&)>& observer) {
  const double span = t1 - t0;
  if (span == 0.0) {
    if (observer) observer(t0, y);
    return y;
  }
  const double dir = span > 0 ? 1.0 : -1.0;
  double t = t0;
  double h = opts.h_initial != 0.0 ? std::abs(opts.h_initial)
                                   : std::min(1.0, std::abs(span) / 10.0);
  const double h_min = opts.h_min_factor * std::max(1.0, std::abs(span));

  if (observer) observer(t, y);
  VectorXd k1 = f(t, y);

  for (long step = 0; step < opts.max_steps; ++step) {
    if ((t - t1) * dir >= 0) return y;
    h = std::min(h, std::abs(t1 - t));
    const double hd = dir * h;

    VectorXd k2 = f(t + c2 * hd, y + hd * (a21 * k1));
    VectorXd k3 = f(t + c3 * hd, y + hd * (a31 * k1 + a32 * k2));
    VectorXd k4 = f(t + c4 * hd, y + hd * (a41 * k1 + a42 * k2 + a43 * k3));
    VectorXd k5 =
        f(t + c5 * hd, y + hd * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    VectorXd k6 = f(t + hd,
                    y + hd * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    VectorXd ynew = y + hd * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    VectorXd k7 = f(t + hd, ynew);
    VectorXd err_vec =
        hd * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (int i = 0; i < y.size(); ++i) {
      double sc = opts.abs_tol +
                  opts.rel_tol * std::max(std::abs(y(i)), std::abs(ynew(i)));
      double q = err_vec(i) / sc;
      err += q * q;
    }
    err = std::sqrt(err / std::max<int>(1, static_cast<int>(y.size())));

    if (err <= 1.0) {
      t += hd;
      y = std::move(ynew);
      k1 = std::move(k7);  // FSAL
      if (observer) observer(t, y);
      if ((t - t1) * dir >= 0) return y;
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-16), -0.2);
    h *= std::clamp(fac, 0.2, 5.0);
    if (h < h_min)
      throw IntegrationFailure("integrate: step size underflow at t = " +
                               std::to_string(t));
  }
  throw IntegrationFailure("integrate: max step count exceeded");
}

MatrixXd integrate_matrix(const std::function<MatrixXd(double, const MatrixXd&)>& f,
                          double t0, const MatrixXd& Y0, double t1,
                          const OdeOptions& opts) {
  const auto rows = Y0.rows(), cols = Y0.cols();
  Rhs rhs = [&](double t, const VectorXd& v) -> VectorXd {
    MatrixXd Y = Eigen::Map<const MatrixXd>(v.data(), rows, cols);
    MatrixXd D = f(t, Y);
    return Eigen::Map<const VectorXd>(D.data(), rows * cols);
  };
  VectorXd v0 = Eigen::Map<const VectorXd>(Y0.data(), rows * cols);
  VectorXd v1 = integrate(rhs, t0, v0, t1, opts);
  return Eigen::Map<const MatrixXd>(v1.data(), rows, cols);
}

}  // namespace morseflow::ode
