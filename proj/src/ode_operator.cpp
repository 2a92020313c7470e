#include "morseflow/ode_operator.hpp"

#include <algorithm>
#include <cmath>

namespace morseflow::odeop {

using grassmann::max_principal_angle;
using grassmann::pair_data;
using grassmann::subspace_distance;
using hyperbolic::expm;

double smoothstep(double u) {
  auto sigma = [](double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; };
  if (u <= 0) return 0.0;
  if (u >= 1) return 1.0;
  double a = sigma(u), b = sigma(1.0 - u);
  return a / (a + b);
}

OperatorPath OperatorPath::constant(const MatrixXd& L) {
  OperatorPath p;
  p.A_minus_ = L;
  p.A_plus_ = L;
  p.t0_ = 0.0;
  p.t1_ = 0.0;
  p.split_minus_ = hyperbolic::split(L);
  p.split_plus_ = p.split_minus_;
  return p;
}

OperatorPath OperatorPath::from_segments(const MatrixXd& A_minus,
                                         const MatrixXd& A_plus, double t0,
                                         double t1,
                                         std::vector<Segment> segments) {
  OperatorPath p;
  p.A_minus_ = A_minus;
  p.A_plus_ = A_plus;
  p.t0_ = t0;
  p.t1_ = t1;
  p.segments_ = std::move(segments);
  double cursor = t0;
  for (const auto& s : p.segments_) {
    if (std::abs(s.a - cursor) > 1e-12 || s.b < s.a)
      throw std::invalid_argument("OperatorPath: segments do not tile [t0, t1]");
    cursor = s.b;
  }
  if (!p.segments_.empty() && std::abs(cursor - t1) > 1e-12)
    throw std::invalid_argument("OperatorPath: segments do not reach t1");
  p.split_minus_ = hyperbolic::split(A_minus);
  p.split_plus_ = hyperbolic::split(A_plus);
  return p;
}

OperatorPath OperatorPath::blend(const MatrixXd& A_minus, const MatrixXd& A_plus,
                                 double t0, double t1) {
  Segment s{t0, t1, Segment::Blend, A_minus, A_plus};
  return from_segments(A_minus, A_plus, t0, t1, {s});
}

MatrixXd OperatorPath::at(double t) const {
  if (t <= t0_ || segments_.empty()) return A_minus_;
  if (t >= t1_) return A_plus_;
  for (const auto& s : segments_) {
    if (t <= s.b) {
      if (s.kind == Segment::Constant) return s.M0;
      double u = (t - s.a) / (s.b - s.a);
      double w = smoothstep(u);
      return (1.0 - w) * s.M0 + w * s.M1;
    }
  }
  return A_plus_;
}

OperatorPath OperatorPath::shifted(double s) const {
  OperatorPath p = *this;
  p.t0_ -= s;
  p.t1_ -= s;
  for (auto& seg : p.segments_) {
    seg.a -= s;
    seg.b -= s;
  }
  return p;
}

OperatorPath OperatorPath::reversed() const {
  OperatorPath p;
  p.A_minus_ = -A_plus_;
  p.A_plus_ = -A_minus_;
  p.t0_ = -t1_;
  p.t1_ = -t0_;
  for (auto it = segments_.rbegin(); it != segments_.rend(); ++it) {
    Segment s;
    s.a = -it->b;
    s.b = -it->a;
    s.kind = it->kind;
    // time reversal swaps the blend endpoints
    s.M0 = -(it->kind == Segment::Blend ? it->M1 : it->M0);
    s.M1 = -it->M0;
    p.segments_.push_back(s);
  }
  p.split_minus_ = hyperbolic::split(p.A_minus_);
  p.split_plus_ = hyperbolic::split(p.A_plus_);
  return p;
}

namespace {

// Breakpoints of piecewise structure between from and to (inclusive ends).
std::vector<double> stretch_points(const OperatorPath& path, double from,
                                   double to) {
  std::vector<double> pts{from, to};
  double lo = std::min(from, to), hi = std::max(from, to);
  auto push = [&](double t) {
    if (t > lo + 1e-14 && t < hi - 1e-14) pts.push_back(t);
  };
  push(path.t0());
  push(path.t1());
  // segment boundaries
  if (path.t1() > path.t0()) {
    for (double t = path.t0(); t <= path.t1(); ) {
      push(t);
      // advance over each segment boundary via at() structure: boundaries
      // are given by the segments themselves.
      break;
    }
  }
  std::sort(pts.begin(), pts.end());
  if (from > to) std::reverse(pts.begin(), pts.end());
  pts.front() = from;
  pts.back() = to;
  return pts;
}

bool stretch_is_constant(const OperatorPath& path, double a, double b,
                         MatrixXd& M) {
  double lo = std::min(a, b), hi = std::max(a, b);
  if (hi <= path.t0() + 1e-14) {
    M = path.A_minus();
    return true;
  }
  if (lo >= path.t1() - 1e-14) {
    M = path.A_plus();
    return true;
  }
  return false;
}

// Advance Y <- X(b) X(a)^{-1} Y, exactly on constant stretches.
MatrixXd advance(const OperatorPath& path, MatrixXd Y, double a, double b,
                 const ode::OdeOptions& opts) {
  if (a == b) return Y;
  auto pts = stretch_points(path, a, b);
  for (size_t i = 0; i + 1 < pts.size(); ++i) {
    double s = pts[i], t = pts[i + 1];
    MatrixXd C;
    if (stretch_is_constant(path, s, t, C)) {
      Y = expm((t - s) * C) * Y;
    } else {
      Y = ode::integrate_matrix(
          [&](double tau, const MatrixXd& X) -> MatrixXd {
            return path.at(tau) * X;
          },
          s, Y, t, opts);
    }
  }
  return Y;
}

MatrixXd qr_orthonormalize(const MatrixXd& B) {
  if (B.cols() == 0) return B;
  Eigen::HouseholderQR<MatrixXd> qr(B);
  return qr.householderQ() * MatrixXd::Identity(B.rows(), B.cols());
}

}  // namespace

MatrixXd fundamental_solution(const OperatorPath& path, double t,
                              const ode::OdeOptions& opts) {
  return advance(path, MatrixXd::Identity(path.dim(), path.dim()), 0.0, t,
                 opts);
}

MatrixXd propagate_frame(const OperatorPath& path, MatrixXd B, double from,
                         double to, const ode::OdeOptions& opts) {
  if (B.cols() == 0 || from == to) return B;
  const double chunk = 1.0;
  double t = from;
  const double dir = to > from ? 1.0 : -1.0;
  while ((to - t) * dir > 0) {
    double next = t + dir * std::min(chunk, std::abs(to - t));
    B = advance(path, B, t, next, opts);
    B = qr_orthonormalize(B);
    t = next;
  }
  return B;
}

StableUnstableData stable_unstable(const OperatorPath& path, double horizon,
                                   double tol) {
  const double gap = std::min(path.split_minus().gap, path.split_plus().gap);
  double T = horizon > 0.0
                 ? horizon
                 : std::max(std::abs(path.t0()), std::abs(path.t1())) + 10.0 / gap;

  auto stable_at = [&](double Th) {
    MatrixXd B = path.split_plus().V_minus.canonical_basis();
    return Subspace::span_of(propagate_frame(path, B, Th, 0.0));
  };
  auto unstable_at = [&](double Th) {
    MatrixXd B = path.split_minus().V_plus.canonical_basis();
    return Subspace::span_of(propagate_frame(path, B, -Th, 0.0));
  };

  Subspace Ws = stable_at(T), Wu = unstable_at(T);
  double T_prev = T;
  for (int iter = 0; iter < 7; ++iter) {
    double T2 = 2.0 * T;
    Subspace Ws2 = stable_at(T2), Wu2 = unstable_at(T2);
    double move = std::max(subspace_distance(Ws, Ws2), subspace_distance(Wu, Wu2));
    double prev_move = move;
    T_prev = T;
    Ws = Ws2;
    Wu = Wu2;
    T = T2;
    if (move < tol) break;
    if (iter == 6 && prev_move > std::sqrt(tol))
      throw NoConvergence("stable_unstable: residual stalled above tolerance");
  }

  StableUnstableData out;
  out.Ws = Ws;
  out.Wu = Wu;
  out.T_used = T_prev;
  MatrixXd fwd = propagate_frame(path, Ws.canonical_basis(), 0.0, T_prev);
  out.residual = max_principal_angle(Subspace::span_of(fwd),
                                     path.split_plus().V_minus);
  out.fredholm_index = pair_data(Ws, Wu).index;
  return out;
}

MatrixXd riccati_flow(const OperatorPath& path, const Subspace& V0, double t,
                      const ode::OdeOptions& opts) {
  MatrixXd P0 = V0.projector();
  return ode::integrate_matrix(
      [&](double tau, const MatrixXd& P) -> MatrixXd {
        const MatrixXd A = path.at(tau);
        const MatrixXd I = MatrixXd::Identity(P.rows(), P.cols());
        return (I - P) * A * P + P * A.transpose() * (I - P);
      },
      0.0, P0, t, opts);
}

OperatorPath construct_costra(int n_half, int k) {
  if (k < 0 || k > n_half)
    throw std::invalid_argument("construct_costra: need 0 <= k <= n_half");
  const int n = 2 * n_half;
  MatrixXd D = MatrixXd::Identity(n, n);
  for (int i = n_half; i < n; ++i) D(i, i) = -1.0;  // H^- = last n_half axes
  if (k == 0) return OperatorPath::constant(D);
  MatrixXd Dk = D;
  for (int i = 0; i < k; ++i) Dk(i, i) = -1.0;  // flip k of the H^+ axes
  return OperatorPath::blend(D, Dk, 0.0, 1.0);
}

std::pair<int, int> section4_intersection_dims(int n_half, int k) {
  auto path = construct_costra(n_half, k);
  auto data = stable_unstable(path);
  return {1, pair_data(data.Ws, data.Wu).intersection.dim() + 1};
}

}  // namespace morseflow::odeop
