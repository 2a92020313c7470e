#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "morseflow/hyperbolic.hpp"

using namespace morseflow;
using namespace morseflow::hyperbolic;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using grassmann::Subspace;
using grassmann::subspace_distance;

namespace {

MatrixXd random_matrix(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = g(rng);
  return A;
}

// Hyperbolic matrix with prescribed signature via a random similarity.
MatrixXd random_hyperbolic(int n, int n_plus, std::mt19937_64& rng,
                           double min_gap = 0.5) {
  std::uniform_real_distribution<double> mag(min_gap, 2.0);
  VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = (i < n_plus ? 1.0 : -1.0) * mag(rng);
  MatrixXd Q = random_matrix(n, rng);
  Eigen::HouseholderQR<MatrixXd> qr(Q);
  MatrixXd O = qr.householderQ();
  return O * d.asDiagonal() * O.transpose();
}

}  // namespace

TEST_CASE("split of diag(1,-1) and of the coordinate model operator") {
  MatrixXd L = MatrixXd::Zero(2, 2);
  L(0, 0) = 1;
  L(1, 1) = -1;
  auto H = split(L);
  CHECK(subspace_distance(H.V_plus, Subspace::coordinate(2, {0})) < 1e-12);
  CHECK(subspace_distance(H.V_minus, Subspace::coordinate(2, {1})) < 1e-12);
  CHECK(H.gap == doctest::Approx(1.0));

  // P^+ - P^- on R^6 with the coordinate splitting.
  MatrixXd D = MatrixXd::Identity(6, 6);
  D(3, 3) = D(4, 4) = D(5, 5) = -1;
  auto H6 = split(D);
  CHECK(subspace_distance(H6.V_plus, Subspace::coordinate(6, {0, 1, 2})) < 1e-12);
  CHECK(subspace_distance(H6.V_minus, Subspace::coordinate(6, {3, 4, 5})) < 1e-12);
}

TEST_CASE("split rejects rotations") {
  MatrixXd J(2, 2);
  J << 0, 1, -1, 0;
  CHECK_THROWS_AS(split(J), NotHyperbolic);
}

TEST_CASE("split invariance and the sign symmetry") {
  std::mt19937_64 rng(2);
  for (int it = 0; it < 30; ++it) {
    int n = 2 + static_cast<int>(rng() % 6);
    int np = static_cast<int>(rng() % (n + 1));
    MatrixXd L = random_hyperbolic(n, np, rng);
    // a non-normal variant
    MatrixXd T = MatrixXd::Identity(n, n) + 0.3 * random_matrix(n, rng, 0.3);
    L = T * L * T.inverse();
    auto H = split(L);
    CHECK(H.V_plus.dim() == np);
    MatrixXd I = MatrixXd::Identity(n, n);
    MatrixXd Pp = H.V_plus.projector();
    MatrixXd Pm = H.V_minus.projector();
    CHECK(((I - Pp) * L * Pp).norm() < 1e-8);
    CHECK(((I - Pm) * L * Pm).norm() < 1e-8);

    auto Hm = split(MatrixXd(-L));
    CHECK(subspace_distance(H.V_plus, Hm.V_minus) < 1e-8);
  }
}

TEST_CASE("splitting data under low-rank perturbation stays consistent") {
  std::mt19937_64 rng(3);
  for (int it = 0; it < 20; ++it) {
    int n = 5;
    MatrixXd L = random_hyperbolic(n, 2, rng, 1.0);
    VectorXd u = VectorXd::Zero(n), v = VectorXd::Zero(n);
    std::normal_distribution<double> g;
    for (int i = 0; i < n; ++i) {
      u(i) = g(rng);
      v(i) = g(rng);
    }
    MatrixXd K = 0.1 * u * v.transpose();
    MatrixXd L2 = L + K;
    try {
      auto Ha = split(L);
      auto Hb = split(L2);
      int rd = grassmann::relative_dimension(Hb.V_plus, Ha.V_plus);
      CHECK(rd == Hb.V_plus.dim() - Ha.V_plus.dim());
    } catch (const NotHyperbolic&) {
      // perturbation crossed the axis; outside the hypothesis
    }
  }
}

TEST_CASE("splitting map is Lipschitz in the perturbation") {
  std::mt19937_64 rng(4);
  int n = 6;
  MatrixXd L = random_hyperbolic(n, 3, rng, 1.0);
  MatrixXd E = random_matrix(n, rng);
  E /= E.operatorNorm();
  auto H0 = split(L);
  std::vector<double> eps = {1e-3, 1e-4, 1e-5};
  std::vector<double> dist;
  for (double e : eps) {
    auto He = split(MatrixXd(L + e * E));
    dist.push_back(subspace_distance(He.V_plus, H0.V_plus));
  }
  // log-log slope close to 1 (first-order response)
  double s1 = std::log(dist[0] / dist[1]) / std::log(eps[0] / eps[1]);
  double s2 = std::log(dist[1] / dist[2]) / std::log(eps[1] / eps[2]);
  CHECK(s1 == doctest::Approx(1.0).epsilon(0.15));
  CHECK(s2 == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("adapted product for an already adapted operator") {
  MatrixXd L = MatrixXd::Zero(2, 2);
  L(0, 0) = 2;
  L(1, 1) = -2;
  auto ip = adapted_product(L, 1.0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(ip.gram);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
  // margin >= 1 on the axes: <L e1, e1>_G = 2 |e1|_G^2, lambda = 1
  VectorXd e1 = VectorXd::Unit(2, 0), e2 = VectorXd::Unit(2, 1);
  double lhs1 = e1.dot(ip.gram * (L * e1));
  double lhs2 = e2.dot(ip.gram * (L * e2));
  CHECK(lhs1 >= (1.0 + 1.0) * e1.dot(ip.gram * e1) - 1e-9);
  CHECK(lhs2 <= -(1.0 + 1.0) * e2.dot(ip.gram * e2) + 1e-9);
}

TEST_CASE("adapted product on a shear block, verified on random vectors") {
  MatrixXd L(2, 2);
  L << 1, 5, 0, 1;  // V^+ = R^2, gap 1
  auto ip = adapted_product(L, 0.5);
  CHECK((ip.gram - MatrixXd::Identity(2, 2)).norm() > 1e-3);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g;
  for (int it = 0; it < 100; ++it) {
    VectorXd xi(2);
    xi << g(rng), g(rng);
    double num = xi.dot(ip.gram * (L * xi));
    double den = xi.dot(ip.gram * xi);
    CHECK(num >= 0.5 * den - 1e-9);
  }
}

TEST_CASE("negating the operator swaps the adapted blocks") {
  std::mt19937_64 rng(7);
  MatrixXd L = random_hyperbolic(4, 2, rng, 1.0);
  double lambda = 0.4;
  auto ip = adapted_product(MatrixXd(-L), lambda);
  auto H = split(MatrixXd(-L));
  std::normal_distribution<double> g;
  for (int it = 0; it < 50; ++it) {
    VectorXd c = VectorXd::NullaryExpr(H.V_plus.dim(), [&](int) { return g(rng); });
    VectorXd xi = H.V_plus.basis() * c;
    double num = xi.dot(ip.gram * (-L * xi));
    double den = xi.dot(ip.gram * xi);
    CHECK(num >= lambda * den - 1e-9);
  }
}

TEST_CASE("lambda at or above the gap is rejected") {
  MatrixXd L = MatrixXd::Identity(3, 3);
  L(2, 2) = -1;
  CHECK_THROWS_AS(adapted_product(L, 1.0), LambdaTooLarge);
  CHECK_THROWS_AS(adapted_product(L, 2.0), LambdaTooLarge);
}

TEST_CASE("hyperbolic rotation: fixed subspace") {
  auto V = Subspace::coordinate(4, {0, 1});
  MatrixXd A = hyperbolic_rotation(V, V);
  MatrixXd E = expm(A);
  CHECK(subspace_distance(Subspace::span_of(E * V.basis()), V) < 1e-10);
  // L = 0, so theta = 1/2 and the spectrum of S is {1/2, 2}.
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(expm(A));
  for (int i = 0; i < 4; ++i) {
    double s = es.eigenvalues()(i);
    CHECK((std::abs(s - 0.5) < 1e-10 || std::abs(s - 2.0) < 1e-10));
  }
}

TEST_CASE("hyperbolic rotation moves a line by a small angle") {
  auto V = Subspace::coordinate(2, {0});
  MatrixXd w(2, 1);
  w << std::cos(0.2), std::sin(0.2);
  auto W = Subspace::from_orthonormal(w);
  MatrixXd A = hyperbolic_rotation(V, W);
  CHECK((A - A.transpose()).norm() < 1e-12);
  CHECK(subspace_distance(Subspace::span_of(expm(A) * V.basis()), W) < 1e-8);
}

TEST_CASE("hyperbolic rotation rejects orthogonal lines") {
  auto V = Subspace::coordinate(2, {0});
  auto W = Subspace::coordinate(2, {1});
  CHECK_THROWS_AS(hyperbolic_rotation(V, W), TooFar);
}

TEST_CASE("rotation spectrum lies in the two bands of the construction") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int it = 0; it < 25; ++it) {
    int n = 3 + static_cast<int>(rng() % 4);
    int k = 1 + static_cast<int>(rng() % (n - 1));
    MatrixXd B(n, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) B(i, j) = g(rng);
    auto V = Subspace::span_of(B);
    // W: a perturbation of V, guaranteed within distance 1
    MatrixXd B2 = V.basis() + 0.3 * MatrixXd::NullaryExpr(n, k, [&](int, int) {
                    return g(rng);
                  });
    auto W = Subspace::span_of(B2);
    if (W.dim() != k || subspace_distance(V, W) >= 1.0) continue;
    MatrixXd A = hyperbolic_rotation(V, W);
    CHECK(subspace_distance(Subspace::span_of(expm(A) * V.basis()), W) < 1e-8);
    // Recompute theta of the construction from the graph operator norm.
    MatrixXd Bv = V.canonical_basis();
    MatrixXd Bp = V.orthogonal_complement().canonical_basis();
    MatrixXd Mv = Bv.transpose() * W.basis();
    MatrixXd Mp = Bp.transpose() * W.basis();
    MatrixXd Lg = Mp * Mv.inverse();
    double theta = 1.0 / (2.0 * (1.0 + (Lg.size() ? Lg.operatorNorm() : 0.0)));
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(expm(A));
    for (int i = 0; i < n; ++i) {
      double s = es.eigenvalues()(i);
      bool lower = s > 0.0 && s <= theta + 1e-9;
      bool upper = (s >= 1.0 / theta - 1e-9) && (s < 1.0 / theta + theta + 1e-9);
      CHECK((lower || upper));
    }
  }
}
