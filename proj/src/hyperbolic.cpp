#include "morseflow/hyperbolic.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>
#include <cmath>

namespace morseflow::hyperbolic {

MatrixXd expm(const MatrixXd& A) { return A.exp(); }

HyperbolicOperator split(const MatrixXd& L, double tol) {
  const int n = static_cast<int>(L.rows());
  Eigen::EigenSolver<MatrixXd> es(L);
  double gap = std::numeric_limits<double>::infinity();
  int n_plus = 0;
  for (int i = 0; i < n; ++i) {
    double re = es.eigenvalues()(i).real();
    gap = std::min(gap, std::abs(re));
    if (re > 0) ++n_plus;
  }
  if (!(gap >= tol))
    throw NotHyperbolic("split: eigenvalue within " + std::to_string(tol) +
                        " of the imaginary axis");

  // Matrix sign function: Z <- (Z + Z^-1)/2 with determinant scaling.
  MatrixXd Z = L;
  for (int iter = 0; iter < 100; ++iter) {
    double c = std::pow(std::abs(Z.determinant()), -1.0 / n);
    if (std::isfinite(c) && c > 0) Z *= c;
    MatrixXd Znew = 0.5 * (Z + Z.inverse());
    double delta = (Znew - Z).norm();
    Z = Znew;
    if (delta < 1e-13 * std::max(1.0, Z.norm())) break;
  }

  MatrixXd Pp = 0.5 * (MatrixXd::Identity(n, n) + Z);
  MatrixXd Pm = 0.5 * (MatrixXd::Identity(n, n) - Z);

  HyperbolicOperator out;
  out.matrix = L;
  out.gap = gap;
  // Ranges of the spectral projectors; dimensions are pinned by the
  // eigenvalue count, not by a singular value cut.
  auto range_of = [n](const MatrixXd& P, int k) {
    Eigen::JacobiSVD<MatrixXd> svd(P, Eigen::ComputeThinU);
    (void)n;
    return Subspace::from_orthonormal(svd.matrixU().leftCols(k));
  };
  out.V_plus = range_of(Pp, n_plus);
  out.V_minus = range_of(Pm, n - n_plus);
  return out;
}

namespace {

// Gram matrix of int_0^k (e^{tM})^T e^{tM} dt by composite Simpson with
// panel doubling; the paper's construction needs ||e^{kM}|| <= 1.
MatrixXd lyapunov_gram(const MatrixXd& M) {
  const int m = static_cast<int>(M.rows());
  if (m == 0) return MatrixXd::Zero(0, 0);

  int k = 1;
  while (expm(double(k) * M).operatorNorm() > 1.0 && k < 64) ++k;

  auto simpson = [&](int panels_per_unit) {
    int panels = panels_per_unit * k;
    double h = double(k) / panels;
    MatrixXd acc = MatrixXd::Zero(m, m);
    MatrixXd Eh = expm(h / 2.0 * M);  // half-step propagator
    MatrixXd Et = MatrixXd::Identity(m, m);
    for (int p = 0; p < panels; ++p) {
      MatrixXd Emid = Et * Eh;
      MatrixXd Eright = Emid * Eh;
      acc += (h / 6.0) * (Et.transpose() * Et + 4.0 * Emid.transpose() * Emid +
                          Eright.transpose() * Eright);
      Et = Eright;
    }
    return acc;
  };

  MatrixXd G = simpson(64);
  for (int p = 128; p <= 1024; p *= 2) {
    MatrixXd G2 = simpson(p);
    double change = (G2 - G).cwiseAbs().maxCoeff();
    G = G2;
    if (change < 1e-10) break;
  }
  return G;
}

}  // namespace

AdaptedInnerProduct adapted_product(const MatrixXd& L, double lambda) {
  HyperbolicOperator H = split(L);
  if (!(lambda < H.gap))
    throw LambdaTooLarge("adapted_product: lambda >= spectral gap");
  const int n = static_cast<int>(L.rows());

  const MatrixXd Bu = H.V_plus.canonical_basis();
  const MatrixXd Bs = H.V_minus.canonical_basis();
  const int du = static_cast<int>(Bu.cols());
  const int ds = static_cast<int>(Bs.cols());

  // Block representations on the invariant subspaces.
  MatrixXd Mu = Bu.transpose() * L * Bu;
  MatrixXd Ms = Bs.transpose() * L * Bs;

  // Stable block: L|_{V^-} + lambda has spectrum in Re < 0; the integral
  // inner product makes it dissipative. Unstable block: same for
  // -L|_{V^+} + lambda.
  MatrixXd Gs = lyapunov_gram(Ms + lambda * MatrixXd::Identity(ds, ds));
  MatrixXd Gu = lyapunov_gram(-Mu + lambda * MatrixXd::Identity(du, du));

  MatrixXd C(n, n);
  if (du) C.leftCols(du) = Bu;
  if (ds) C.rightCols(ds) = Bs;
  MatrixXd Ci = C.inverse();
  MatrixXd blocks = MatrixXd::Zero(n, n);
  if (du) blocks.topLeftCorner(du, du) = Gu;
  if (ds) blocks.bottomRightCorner(ds, ds) = Gs;

  AdaptedInnerProduct out;
  out.gram = Ci.transpose() * blocks * Ci;
  out.gram = 0.5 * (out.gram + out.gram.transpose());
  out.lambda = lambda;
  return out;
}

AdaptedInnerProduct adapted_product(const MatrixXd& L) {
  return adapted_product(L, 0.9 * split(L).gap);
}

MatrixXd hyperbolic_rotation(const Subspace& V, const Subspace& W) {
  const int n = V.ambient_dim();
  if (W.ambient_dim() != n)
    throw grassmann::DimensionMismatch("hyperbolic_rotation: ambient differs");
  if (V.dim() != W.dim())
    throw TooFar("hyperbolic_rotation: dim V != dim W (distance >= 1)");
  if (grassmann::subspace_distance(V, W) >= 1.0)
    throw TooFar("hyperbolic_rotation: dist(V, W) >= 1");

  const int k = V.dim();
  const MatrixXd Bv = V.canonical_basis();
  const Subspace Vperp = V.orthogonal_complement();
  const MatrixXd Bp = Vperp.canonical_basis();

  // W = graph of L : V -> V^perp,  L = P_{V^perp} (P_V|_W)^{-1}.
  MatrixXd Mv = Bv.transpose() * W.basis();   // k x k
  MatrixXd Mp = Bp.transpose() * W.basis();   // (n-k) x k
  Eigen::FullPivLU<MatrixXd> lu(Mv);
  if (!lu.isInvertible())
    throw TooFar("hyperbolic_rotation: P_V|_W singular");
  MatrixXd Lmat = Mp * lu.inverse();          // (n-k) x k

  double Lnorm = Lmat.size() ? Lmat.operatorNorm() : 0.0;
  double theta = 1.0 / (2.0 * (1.0 + Lnorm));
  double eta = theta;

  MatrixXd S_blk(n, n);
  S_blk.topLeftCorner(k, k) = theta * MatrixXd::Identity(k, k);
  S_blk.topRightCorner(k, n - k) = eta * Lmat.transpose();
  S_blk.bottomLeftCorner(n - k, k) = eta * Lmat;
  S_blk.bottomRightCorner(n - k, n - k) =
      (1.0 / theta) * MatrixXd::Identity(n - k, n - k);

  MatrixXd C(n, n);
  if (k) C.leftCols(k) = Bv;
  if (n - k) C.rightCols(n - k) = Bp;
  MatrixXd S = C * S_blk * C.transpose();
  S = 0.5 * (S + S.transpose());

  // S is symmetric positive definite, so log via the eigendecomposition.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(S);
  VectorXd logs = es.eigenvalues().array().log();
  return es.eigenvectors() * logs.asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace morseflow::hyperbolic
