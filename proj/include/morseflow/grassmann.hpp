#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

namespace morseflow::grassmann {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NotTransversal : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Relative threshold below which singular values count as zero.
inline constexpr double kRankTol = 1e-8;

/// A linear subspace of R^n carried by an orthonormal basis (n x k,
/// k possibly 0). Immutable after construction.
class Subspace {
 public:
  Subspace() = default;

  /// Zero subspace of R^n.
  static Subspace zero(int n) { return Subspace(MatrixXd::Zero(n, 0)); }

  /// All of R^n.
  static Subspace full(int n) { return Subspace(MatrixXd::Identity(n, n)); }

  /// Coordinate subspace spanned by the given axes (0-based).
  static Subspace coordinate(int n, const std::vector<int>& axes);

  /// Span of the columns of A, orthonormalized; numerical rank decided at
  /// tau_rel relative to the largest singular value.
  static Subspace span_of(const MatrixXd& A, double tau_rel = kRankTol);

  /// Wrap an already orthonormal basis (validated to 1e-10).
  static Subspace from_orthonormal(const MatrixXd& B);

  int ambient_dim() const { return static_cast<int>(basis_.rows()); }
  int dim() const { return static_cast<int>(basis_.cols()); }
  const MatrixXd& basis() const { return basis_; }

  /// Orthogonal projector B B^T.
  MatrixXd projector() const { return basis_ * basis_.transpose(); }

  Subspace orthogonal_complement() const;

  /// Deterministic representative basis of the subspace: eigenbasis of the
  /// projector with each column's largest-magnitude entry made positive
  /// (ties broken by lowest index). Depends only on the span.
  MatrixXd canonical_basis() const;

 private:
  explicit Subspace(MatrixXd B) : basis_(std::move(B)) {}
  MatrixXd basis_;
};

/// dist(V, W) = ||P_V - P_W|| (operator norm), the Grassmannian metric.
double subspace_distance(const Subspace& V, const Subspace& W);

/// Largest principal angle between V and W (radians). Subspaces of unequal
/// dimension get the angle pi/2 for the unmatched directions.
double max_principal_angle(const Subspace& V, const Subspace& W);

MatrixXd projector(const Subspace& V);

struct FredholmPairData {
  Subspace intersection;  // V cap W
  Subspace cosum;         // (V + W)^perp, standing in for H/(V+W)
  int index = 0;          // dim intersection - dim cosum
};

/// Intersection, cosum and index of the pair (V, W). Every pair is Fredholm
/// in finite dimension; rank decisions share one SVD so that
/// dim(V cap W) - dim cosum = dim V + dim W - n holds exactly.
FredholmPairData pair_data(const Subspace& V, const Subspace& W,
                           double tau_rel = kRankTol);

/// dim(V, W) = dim V cap W^perp - dim V^perp cap W, computed from principal
/// angles. In finite dimension every subspace is a compact perturbation of
/// every other, so the predicate itself is vacuous and the integer carries
/// the content.
int relative_dimension(const Subspace& V, const Subspace& W,
                       double tau_rel = kRankTol);

/// Prop. indice identity ind(W,Z) = ind(V,Z) + dim(W,V); must always hold.
bool index_additivity_check(const Subspace& V, const Subspace& W,
                            const Subspace& Z);

/// Orientation of a subspace X: a sign relative to canonical_basis(X).
struct SubspaceOrientation {
  Subspace subject;
  MatrixXd sign_basis;  // the canonical reference basis
  int sign = +1;

  static SubspaceOrientation standard(const Subspace& X);
  SubspaceOrientation negated() const;
  /// Sign of an explicit ordered basis of X relative to this orientation.
  int sign_of(const MatrixXd& frame) const;
};

/// Orientation of a Fredholm pair (V, W): orientation of the product
/// (V cap W) x ((V+W)^perp)*, stored as a sign relative to the canonical
/// bases of both factors.
struct PairOrientation {
  Subspace V, W;
  FredholmPairData data;
  MatrixXd sign_basis_int;    // canonical basis of V cap W
  MatrixXd sign_basis_cosum;  // canonical basis of (V+W)^perp
  int sign = +1;

  static PairOrientation standard(const Subspace& V, const Subspace& W);
  PairOrientation negated() const;
};

/// Exterior product of subspace orientations: orientation of X (+) Y from
/// the concatenated bases. Requires X cap Y = (0).
SubspaceOrientation orient_wedge(const SubspaceOrientation& oX,
                                 const SubspaceOrientation& oY);

/// The product o_X /\ o_(V,W): orientation of the pair (X (+) V, W).
/// Requires X cap V = (0). Flipping either input flips the output, and the
/// product is associative against orient_wedge.
PairOrientation orient_product(const SubspaceOrientation& oX,
                               const PairOrientation& oP);

/// Decode of the finite-dimensional model Det(V,W) = Det(V) (x) Det(W) (x)
/// Det(H)*: the pair-orientation sign (relative to reference's canonical
/// bases) carried by explicit frames of V and W. Invariant under frame
/// changes of positive joint determinant.
int pair_sign_from_frames(const Subspace& V, const Subspace& W,
                          const MatrixXd& frameV, const MatrixXd& frameW,
                          const PairOrientation& reference);

namespace detail {
/// Sign of det of the square coordinate matrix R^T * A (both n x k with the
/// same span). Throws if the determinant is numerically zero.
int sign_det_in_basis(const MatrixXd& R, const MatrixXd& A);
}  // namespace detail

/// Column concatenation that tolerates zero-width blocks.
inline MatrixXd hcat(const MatrixXd& A, const MatrixXd& B) {
  MatrixXd C(A.rows(), A.cols() + B.cols());
  if (A.cols()) C.leftCols(A.cols()) = A;
  if (B.cols()) C.rightCols(B.cols()) = B;
  return C;
}

}  // namespace morseflow::grassmann
