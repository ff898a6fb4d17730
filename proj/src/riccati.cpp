#include "tpbb/riccati.hpp"

#include <cmath>

#include "tpbb/errors.hpp"

namespace tpbb {

namespace {

using Vec4 = std::array<double, 4>;

Mat4 transition_matrix(double dt, const KernelTriple& k) {
  const double h = 0.5 * dt;
  const double ff = k.ff.linear_rate();
  const double fl = k.fl.linear_rate();
  const double ll = k.ll.linear_rate();
  return {{{1.0 - h * (ff + 2.0 * fl), h * ff, h * fl, h * fl},
           {h * ff, 1.0 - h * (ff + 2.0 * fl), h * fl, h * fl},
           {0.0, 0.0, 1.0 - h * ll, h * ll},
           {0.0, 0.0, h * ll, 1.0 - h * ll}}};
}

Mat4 mul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int l = 0; l < 4; ++l) c[i][j] += a[i][l] * b[l][j];
  return c;
}

Mat4 transpose(const Mat4& a) {
  Mat4 t{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) t[i][j] = a[j][i];
  return t;
}

Vec4 mul(const Mat4& a, const Vec4& x) {
  Vec4 y{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) y[i] += a[i][j] * x[j];
  return y;
}

double dot(const Vec4& a, const Vec4& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

}  // namespace

double RiccatiGain::value(const BinaryState& s) const {
  const Vec4 z{s.x1 - reference, s.x2 - reference, s.y1 - reference, s.y2 - reference};
  return dot(z, mul(value_matrix, z));
}

RiccatiGain riccati_feedback(const CostParams& p, const KernelTriple& k) {
  if (!k.all_linear()) {
    throw ValidationError("riccati feedback requires constant (or zero) kernels");
  }
  p.validate();
  const double beta = p.discount();
  const Mat4 a = transition_matrix(p.dt, k);
  const Mat4 at = transpose(a);
  const Vec4 b{0.0, 0.0, p.dt, p.dt};
  // Per-step cost dt * (z^T Q z + gamma u^2).
  Mat4 q{};
  q[0][0] = q[1][1] = 0.5 * p.a_f * p.dt;
  q[2][2] = q[3][3] = 0.5 * p.a_l * p.dt;
  const double r = p.gamma * p.dt;

  Mat4 pm = q;
  RiccatiGain out;
  out.reference = p.reference;
  out.u_min = p.u_min;
  out.u_max = p.u_max;
  constexpr int kMaxIter = 10'000'000;
  for (int it = 1; it <= kMaxIter; ++it) {
    const Mat4 pa = mul(pm, a);                  // P A
    const Vec4 pb = mul(pm, b);                  // P B
    const double s = r + beta * dot(b, pb);      // R + beta B^T P B
    if (!(s > 0.0)) throw NoStabilizingSolution("riccati: non-positive control curvature");
    Vec4 btpa{};                                 // B^T P A
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i) btpa[j] += b[i] * pa[i][j];
    const Mat4 atpa = mul(at, pa);
    Mat4 next{};
    double change = 0.0;
    double scale = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        next[i][j] = q[i][j] + beta * atpa[i][j] - beta * beta * btpa[i] * btpa[j] / s;
        if (!std::isfinite(next[i][j])) throw NoStabilizingSolution("riccati: recursion diverged");
        change = std::max(change, std::abs(next[i][j] - pm[i][j]));
        scale = std::max(scale, std::abs(next[i][j]));
      }
    }
    pm = next;
    if (scale > 1e15) throw NoStabilizingSolution("riccati: recursion diverged");
    if (change < 1e-12) {
      out.iterations = it;
      break;
    }
    if (it == kMaxIter) throw NoStabilizingSolution("riccati: no fixed point within iteration cap");
  }

  const Vec4 pb = mul(pm, b);
  const double s = r + beta * dot(b, pb);
  const Mat4 pa = mul(pm, a);
  for (int j = 0; j < 4; ++j) {
    double btpa = 0.0;
    for (int i = 0; i < 4; ++i) btpa += b[i] * pa[i][j];
    out.gain[j] = -beta * btpa / s;
  }
  out.value_matrix = pm;
  return out;
}

}  // namespace tpbb
