#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "morseflow/grassmann.hpp"
#include "morseflow/hyperbolic.hpp"
#include "morseflow/integrate.hpp"

namespace morseflow::odeop {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using grassmann::Subspace;

struct NoConvergence : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// C-infinity smoothstep: 0 for u <= 0, 1 for u >= 1, all derivatives flat
/// at the junctions.
double smoothstep(double u);

/// A time-dependent family A(t) of n x n matrices equal to hyperbolic
/// constants outside [t0, t1]; inside, a tiling of segments that are either
/// constant or smoothstep blends between two matrices.
class OperatorPath {
 public:
  struct Segment {
    double a, b;
    enum Kind { Constant, Blend } kind;
    MatrixXd M0, M1;  // Constant uses M0 only
  };

  /// Constant path A(t) = L (L hyperbolic).
  static OperatorPath constant(const MatrixXd& L);

  /// Path from segments tiling [t0, t1]; tails are A_minus / A_plus
  /// (both hyperbolic, validated).
  static OperatorPath from_segments(const MatrixXd& A_minus,
                                    const MatrixXd& A_plus, double t0,
                                    double t1, std::vector<Segment> segments);

  /// Single smooth blend from A_minus to A_plus across [t0, t1].
  static OperatorPath blend(const MatrixXd& A_minus, const MatrixXd& A_plus,
                            double t0 = 0.0, double t1 = 1.0);

  int dim() const { return static_cast<int>(A_minus_.rows()); }
  double t0() const { return t0_; }
  double t1() const { return t1_; }
  const MatrixXd& A_minus() const { return A_minus_; }
  const MatrixXd& A_plus() const { return A_plus_; }
  const hyperbolic::HyperbolicOperator& split_minus() const { return split_minus_; }
  const hyperbolic::HyperbolicOperator& split_plus() const { return split_plus_; }

  MatrixXd at(double t) const;

  /// The time-shifted path t -> A(t + s).
  OperatorPath shifted(double s) const;

  /// The reversed dual path B(t) = -A(-t), for which X_B(t) = X_A(-t).
  OperatorPath reversed() const;

 private:
  MatrixXd A_minus_, A_plus_;
  double t0_ = 0.0, t1_ = 0.0;
  std::vector<Segment> segments_;
  hyperbolic::HyperbolicOperator split_minus_, split_plus_;
};

/// X_A(t): solution of X' = A(t) X, X(0) = I. Constant stretches (tails and
/// constant segments) are advanced by exact matrix exponentials, blends by
/// the adaptive integrator.
MatrixXd fundamental_solution(const OperatorPath& path, double t,
                              const ode::OdeOptions& opts = {});

/// Propagate a frame B (n x k) from time `from` to time `to` along
/// X' = A(t) X, re-orthonormalizing by QR every chunk.
MatrixXd propagate_frame(const OperatorPath& path, MatrixXd B, double from,
                         double to, const ode::OdeOptions& opts = {});

struct StableUnstableData {
  Subspace Ws;             // initial conditions decaying forward
  Subspace Wu;             // initial conditions decaying backward
  int fredholm_index = 0;  // pair_data(Ws, Wu).index
  double T_used = 0.0;     // largest horizon at which the residual is measured
  double residual = 0.0;   // max principal angle of X(T_used) Ws against V^-(A_plus)
};

/// Linear stable/unstable spaces by backward/forward propagation of the
/// limit splittings, with automatic horizon doubling (start at
/// max(|t0|,t1) + 10/gap, stop when Ws moves < 10% between doublings or the
/// move drops below tol). Throws NoConvergence if the residual stalls.
StableUnstableData stable_unstable(const OperatorPath& path,
                                   double horizon = 0.0, double tol = 1e-8);

/// Orthogonal projector onto X_A(t) V0 via the Riccati flow
/// P' = (I-P) A P + P A^T (I-P).
MatrixXd riccati_flow(const OperatorPath& path, const Subspace& V0, double t,
                      const ode::OdeOptions& opts = {});

/// Finite-dimensional analog of the index-k construction: a path with
/// A(t) = P+ - P- for t <= 0 whose positive limit has k extra negative
/// directions, so that dim(Ws cap Wu) = k, Ws + Wu = R^n and
/// ind(Ws, Wu) = k. Ambient dimension is 2 * n_half, 0 <= k <= n_half.
OperatorPath construct_costra(int n_half, int k);

/// Dimensions (1, k+1) of the two connected components of the unstable/
/// stable intersection in the product-with-a-circle example, the second
/// computed as dim(Ws cap Wu) + 1 on the construct_costra path.
std::pair<int, int> section4_intersection_dims(int n_half, int k);

}  // namespace morseflow::odeop
