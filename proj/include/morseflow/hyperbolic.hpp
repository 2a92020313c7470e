#pragma once

#include <Eigen/Dense>

#include "morseflow/grassmann.hpp"

namespace morseflow::hyperbolic {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using grassmann::Subspace;

struct NotHyperbolic : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct LambdaTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TooFar : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Spectral gap threshold: an eigenvalue with |Re| below this is treated as
/// sitting on the imaginary axis.
inline constexpr double kHyperbolicTol = 1e-9;

/// A hyperbolic operator together with its invariant splitting
/// R^n = V^+ (+) V^- by sign of the real part of the spectrum.
struct HyperbolicOperator {
  MatrixXd matrix;
  double gap = 0.0;  // min |Re eigenvalue|
  Subspace V_plus;
  Subspace V_minus;
};

/// Invariant splitting of a hyperbolic matrix, via the matrix sign
/// function (Newton iteration with determinant scaling).
/// Throws NotHyperbolic if some |Re eigenvalue| < tol.
HyperbolicOperator split(const MatrixXd& L, double tol = kHyperbolicTol);

/// An inner product <xi, eta> = xi^T G eta adapted to a hyperbolic L:
/// V^+ and V^- are G-orthogonal, <L xi, xi> >= lambda |xi|^2 on V^+ and
/// <= -lambda |xi|^2 on V^-.
struct AdaptedInnerProduct {
  MatrixXd gram;
  double lambda = 0.0;
};

/// Build an adapted product for lambda < gap(L) by integrating
/// int_0^k e^{tM'} ^T e^{tM'} dt on each spectral block (composite Simpson,
/// panel-doubling until the Gram matrix settles below 1e-10).
/// Throws LambdaTooLarge if lambda >= gap.
AdaptedInnerProduct adapted_product(const MatrixXd& L, double lambda);

/// Default adapted product with lambda = 0.9 * gap.
AdaptedInnerProduct adapted_product(const MatrixXd& L);

/// Symmetric invertible A with e^A V = W, following the graph construction:
/// W = graph(L), S = [[theta, eta L^*], [eta L, 1/theta]] on V (+) V^perp
/// with theta = 1/(2(1+||L||)), eta = theta, A = log S.
/// Requires dist(V, W) < 1 and dim V = dim W; throws TooFar otherwise.
MatrixXd hyperbolic_rotation(const Subspace& V, const Subspace& W);

/// Matrix exponential (scaling and squaring with Pade approximation).
MatrixXd expm(const MatrixXd& A);

}  // namespace morseflow::hyperbolic
