#include "morseflow/grassmann.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>

namespace morseflow::grassmann {

namespace {

// Largest-magnitude entry of each column made positive, ties to lowest index.
void fix_column_signs(MatrixXd& B) {
  for (int j = 0; j < B.cols(); ++j) {
    int imax = 0;
    double best = -1.0;
    for (int i = 0; i < B.rows(); ++i) {
      double a = std::abs(B(i, j));
      if (a > best + 1e-14) {
        best = a;
        imax = i;
      }
    }
    if (B(imax, j) < 0) B.col(j) = -B.col(j);
  }
}

MatrixXd orthonormal_range(const MatrixXd& A, double tau_rel) {
  if (A.cols() == 0) return MatrixXd::Zero(A.rows(), 0);
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tau_rel * smax) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace

Subspace Subspace::coordinate(int n, const std::vector<int>& axes) {
  MatrixXd B = MatrixXd::Zero(n, static_cast<int>(axes.size()));
  int j = 0;
  for (int a : axes) {
    if (a < 0 || a >= n) throw std::out_of_range("coordinate axis out of range");
    B(a, j++) = 1.0;
  }
  return from_orthonormal(B);
}

Subspace Subspace::span_of(const MatrixXd& A, double tau_rel) {
  return Subspace(orthonormal_range(A, tau_rel));
}

Subspace Subspace::from_orthonormal(const MatrixXd& B) {
  if (B.cols() > 0) {
    MatrixXd G = B.transpose() * B;
    if ((G - MatrixXd::Identity(B.cols(), B.cols())).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("basis columns are not orthonormal");
  }
  return Subspace(B);
}

Subspace Subspace::orthogonal_complement() const {
  const int n = ambient_dim();
  // I - P has singular values exactly 1 (n-k of them) and 0; an absolute
  // 0.5 cut avoids promoting roundoff when the complement is trivial.
  MatrixXd P = MatrixXd::Identity(n, n) - projector();
  Eigen::JacobiSVD<MatrixXd> svd(P, Eigen::ComputeThinU);
  int r = 0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > 0.5) ++r;
  return Subspace(svd.matrixU().leftCols(r));
}

MatrixXd Subspace::canonical_basis() const {
  const int n = ambient_dim();
  const int k = dim();
  if (k == 0) return MatrixXd::Zero(n, 0);
  // Greedy Gram-Schmidt over the projector columns. The pivot is the
  // lowest-index column within a 1e-6 relative window of the largest
  // residual norm, so the result is a stable function of the span even at
  // exact ties (coordinate subspaces, the full space), where plain
  // column-pivoted QR flips order on roundoff noise.
  MatrixXd R = projector();
  MatrixXd B(n, k);
  for (int j = 0; j < k; ++j) {
    int pivot = -1;
    double maxn = 0.0;
    for (int c = 0; c < n; ++c) maxn = std::max(maxn, R.col(c).norm());
    for (int c = 0; c < n; ++c) {
      if (R.col(c).norm() >= (1.0 - 1e-6) * maxn) {
        pivot = c;
        break;
      }
    }
    VectorXd q = R.col(pivot) / R.col(pivot).norm();
    B.col(j) = q;
    R -= q * (q.transpose() * R);
  }
  fix_column_signs(B);
  return B;
}

double subspace_distance(const Subspace& V, const Subspace& W) {
  if (V.ambient_dim() != W.ambient_dim())
    throw DimensionMismatch("subspace_distance: ambient dimensions differ");
  MatrixXd D = V.projector() - W.projector();
  Eigen::JacobiSVD<MatrixXd> svd(D);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

double max_principal_angle(const Subspace& V, const Subspace& W) {
  if (V.ambient_dim() != W.ambient_dim())
    throw DimensionMismatch("max_principal_angle: ambient dimensions differ");
  if (V.dim() != W.dim()) return M_PI / 2;
  if (V.dim() == 0) return 0.0;
  MatrixXd C = V.basis().transpose() * W.basis();
  Eigen::JacobiSVD<MatrixXd> svd(C);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  return std::acos(std::clamp(smin, -1.0, 1.0));
}

MatrixXd projector(const Subspace& V) { return V.projector(); }

FredholmPairData pair_data(const Subspace& V, const Subspace& W,
                           double tau_rel) {
  if (V.ambient_dim() != W.ambient_dim())
    throw DimensionMismatch("pair_data: ambient dimensions differ");
  const int n = V.ambient_dim();
  const int kv = V.dim(), kw = W.dim();

  // One SVD of [B_V | -B_W] decides both ranks, so the rank-nullity identity
  // dim(int) - dim(cosum) = kv + kw - n is exact by construction.
  MatrixXd M(n, kv + kw);
  if (kv) M.leftCols(kv) = V.basis();
  if (kw) M.rightCols(kw) = -W.basis();

  FredholmPairData out;
  if (kv + kw == 0) {
    out.intersection = Subspace::zero(n);
    out.cosum = Subspace::full(n);
    out.index = -n;
    return out;
  }

  Eigen::JacobiSVD<MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  double smax = s(0);
  int r = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s(i) > tau_rel * smax) ++r;

  // Null vectors (a; b) satisfy B_V a = B_W b, an element of V cap W.
  // Orthonormalize with QR so the dimension count is preserved verbatim.
  const int ni = kv + kw - r;
  MatrixXd inter(n, ni);
  for (int j = 0; j < ni; ++j) {
    VectorXd ab = svd.matrixV().col(r + j);
    inter.col(j) = V.basis() * ab.head(kv);
  }
  if (ni > 0) {
    Eigen::HouseholderQR<MatrixXd> qr(inter);
    MatrixXd Q =
        qr.householderQ() * MatrixXd::Identity(n, ni);
    out.intersection = Subspace::from_orthonormal(Q);
  } else {
    out.intersection = Subspace::zero(n);
  }
  out.cosum = Subspace::from_orthonormal(svd.matrixU().rightCols(n - r));
  out.index = ni - (n - r);
  return out;
}

int relative_dimension(const Subspace& V, const Subspace& W, double tau_rel) {
  if (V.ambient_dim() != W.ambient_dim())
    throw DimensionMismatch("relative_dimension: ambient dimensions differ");
  // dim V cap W^perp = dim V - rank(P_W|_V) and symmetrically; the shared
  // rank is that of B_W^T B_V.
  const int kv = V.dim(), kw = W.dim();
  int rho = 0;
  if (kv > 0 && kw > 0) {
    MatrixXd C = W.basis().transpose() * V.basis();
    Eigen::JacobiSVD<MatrixXd> svd(C);
    const auto& s = svd.singularValues();
    for (int i = 0; i < s.size(); ++i)
      if (s(i) > tau_rel) ++rho;
  }
  return (kv - rho) - (kw - rho);
}

bool index_additivity_check(const Subspace& V, const Subspace& W,
                            const Subspace& Z) {
  int lhs = pair_data(W, Z).index;
  int rhs = pair_data(V, Z).index + relative_dimension(W, V);
  return lhs == rhs;
}

SubspaceOrientation SubspaceOrientation::standard(const Subspace& X) {
  SubspaceOrientation o;
  o.subject = X;
  o.sign_basis = X.canonical_basis();
  o.sign = +1;
  return o;
}

SubspaceOrientation SubspaceOrientation::negated() const {
  SubspaceOrientation o = *this;
  o.sign = -o.sign;
  return o;
}

int SubspaceOrientation::sign_of(const MatrixXd& frame) const {
  return sign * detail::sign_det_in_basis(sign_basis, frame);
}

PairOrientation PairOrientation::standard(const Subspace& V,
                                          const Subspace& W) {
  PairOrientation o;
  o.V = V;
  o.W = W;
  o.data = pair_data(V, W);
  o.sign_basis_int = o.data.intersection.canonical_basis();
  o.sign_basis_cosum = o.data.cosum.canonical_basis();
  o.sign = +1;
  return o;
}

PairOrientation PairOrientation::negated() const {
  PairOrientation o = *this;
  o.sign = -o.sign;
  return o;
}

namespace detail {

int sign_det_in_basis(const MatrixXd& R, const MatrixXd& A) {
  if (R.cols() != A.cols())
    throw DimensionMismatch("sign_det_in_basis: frame sizes differ");
  if (R.cols() == 0) return +1;
  MatrixXd C = R.transpose() * A;
  double d = C.determinant();
  if (std::abs(d) < 1e-12)
    throw NotTransversal("sign_det_in_basis: frame does not span the subspace");
  return d > 0 ? +1 : -1;
}

}  // namespace detail

SubspaceOrientation orient_wedge(const SubspaceOrientation& oX,
                                 const SubspaceOrientation& oY) {
  const Subspace& X = oX.subject;
  const Subspace& Y = oY.subject;
  if (pair_data(X, Y).intersection.dim() != 0)
    throw NotTransversal("orient_wedge: X cap Y != (0)");
  MatrixXd cat = hcat(oX.sign_basis, oY.sign_basis);
  Subspace S = Subspace::span_of(cat);
  SubspaceOrientation out = SubspaceOrientation::standard(S);
  // Orthonormalize the concatenation without changing its orientation class
  // (QR with positive diagonal), then compare with the canonical basis.
  Eigen::HouseholderQR<MatrixXd> qr(cat);
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(cat.rows(), cat.cols());
  MatrixXd Rdiag = qr.matrixQR().topRows(cat.cols());
  for (int j = 0; j < cat.cols(); ++j)
    if (Rdiag(j, j) < 0) Q.col(j) = -Q.col(j);
  out.sign = oX.sign * oY.sign * detail::sign_det_in_basis(out.sign_basis, Q);
  return out;
}

// In finite dimension Det(V,W) = Det(V cap W) (x) Det((V+W)^perp)* is
// canonically Det(V) (x) Det(W) (x) Det(H)*: split V = C (+) V', W = C (+) W'
// with C = V cap W, so that [C, V', W', D] frames H; the two C factors and
// the V', W' factors cancel in pairs. The decode maps a sign attached to
// frames of V and W to the pair-orientation sign; the orientation product
// becomes frame concatenation on the first factor, which makes the sign
// laws and associativity structural.
int pair_sign_from_frames(const Subspace& V, const Subspace& W,
                          const MatrixXd& frameV, const MatrixXd& frameW,
                          const PairOrientation& reference) {
  const Subspace& C = reference.data.intersection;
  Subspace Cperp = C.orthogonal_complement();
  Subspace Vp = pair_data(V, Cperp).intersection;
  Subspace Wp = pair_data(W, Cperp).intersection;
  const MatrixXd& c = reference.sign_basis_int;
  MatrixXd vp = Vp.canonical_basis();
  MatrixXd wp = Wp.canonical_basis();

  int sV = detail::sign_det_in_basis(hcat(c, vp), frameV);
  int sW = detail::sign_det_in_basis(hcat(c, wp), frameW);
  MatrixXd full = hcat(hcat(hcat(c, vp), wp), reference.sign_basis_cosum);
  if (full.rows() != full.cols())
    throw NotTransversal("pair orientation: degenerate configuration");
  double d = full.determinant();
  if (std::abs(d) < 1e-12)
    throw NotTransversal("pair orientation: frames do not span the space");
  return sV * sW * (d > 0 ? +1 : -1);
}

PairOrientation orient_product(const SubspaceOrientation& oX,
                               const PairOrientation& oP) {
  const Subspace& X = oX.subject;
  const Subspace& V = oP.V;
  const Subspace& W = oP.W;
  const int n = X.ambient_dim();
  if (V.ambient_dim() != n)
    throw DimensionMismatch("orient_product: ambient dimensions differ");
  if (pair_data(X, V).intersection.dim() != 0)
    throw NotTransversal("orient_product: X cap V != (0)");

  // Encode oP in the Det(V) (x) Det(W) model: reference frames of V and W
  // with the sign that decodes back to oP.sign.
  MatrixXd c = oP.sign_basis_int;
  Subspace Cperp = oP.data.intersection.orthogonal_complement();
  MatrixXd vp = pair_data(V, Cperp).intersection.canonical_basis();
  MatrixXd wp = pair_data(W, Cperp).intersection.canonical_basis();
  MatrixXd frameV = hcat(c, vp);
  MatrixXd frameW = hcat(c, wp);
  int s_decode = pair_sign_from_frames(V, W, frameV, frameW, oP);
  int model_sign = oP.sign * s_decode;  // so that decode gives back oP.sign

  // Product: concatenate the X frame onto the V factor.
  Subspace XV = Subspace::span_of(hcat(X.basis(), V.basis()));
  PairOrientation out = PairOrientation::standard(XV, W);
  MatrixXd frameXV = hcat(oX.sign_basis, frameV);
  out.sign = oX.sign * model_sign *
             pair_sign_from_frames(XV, W, frameXV, frameW, out);
  return out;
}

}  // namespace morseflow::grassmann
