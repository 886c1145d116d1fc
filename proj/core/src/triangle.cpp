#include "vscale/triangle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vscale/json_format.hpp"

namespace vscale {

namespace {

constexpr double kPi = std::numbers::pi;

// Per-triangle scalars shared by every formula below. With
// s2 = S^2 (hyperbolic, S = sinh(base/2)) or base^2 (Euclidean) and
// xi = exp(-u), x = s2 * xi. The scaled half-length sinh (hyperbolic) or
// length (Euclidean) squared is x / P with P = xi_0 xi_1 xi_2.
struct Terms {
  bool hyperbolic = false;
  Vec3 s2{};
  Vec3 xi{};
  Vec3 x{};
  double p = 1.0;
};

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::Overflow, std::string(what) + " is not finite");
}

Terms make_terms(const TriangleInput& in) {
  check_input(in);
  Terms t;
  t.hyperbolic = in.geometry == Geometry::Hyperbolic;
  for (int c = 0; c < 3; ++c) {
    const double s = t.hyperbolic ? std::sinh(0.5 * in.base[c]) : in.base[c];
    t.s2[c] = s * s;
    t.xi[c] = std::exp(-in.u[c]);
    t.x[c] = t.s2[c] * t.xi[c];
    require_finite(t.x[c], "scaled edge term");
  }
  t.p = t.xi[0] * t.xi[1] * t.xi[2];
  require_finite(t.p, "factor product");
  return t;
}

double q_from_terms(const Terms& t) {
  const auto& x = t.x;
  double q = -x[0] * x[0] - x[1] * x[1] - x[2] * x[2] + 2.0 * x[0] * x[1] +
             2.0 * x[0] * x[2] + 2.0 * x[1] * x[2];
  if (t.hyperbolic) q += 4.0 * t.s2[0] * t.s2[1] * t.s2[2];
  require_finite(q, "Q");
  return q;
}

Vec3 h_from_terms(const Terms& t) {
  Vec3 h{};
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    h[a] = t.s2[a] * (t.x[b] + t.x[c] - t.x[a]);
    require_finite(h[a], "h");
  }
  return h;
}

RegionClass classify_terms(double q, const Vec3& h) {
  if (q > 0.0) return RegionClass::nondegenerate();
  const auto it = std::min_element(h.begin(), h.end());
  return RegionClass::degenerate(static_cast<int>(it - h.begin()));
}

void require_nondegenerate(double q) {
  if (!(q > 0.0)) {
    throw Error(ErrorCode::DegenerateTriangle,
                "conformal factor lies outside the admissible space (Q = " + format_double(q) + ")");
  }
}

Vec3 angles_from_terms(const Terms& t, double q) {
  require_nondegenerate(q);
  const double root_q = std::sqrt(q);
  Vec3 out{};
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    // Cosine law; both arguments share a positive factor that cancels.
    const double cos_part = t.x[b] + t.x[c] - t.x[a];
    if (t.hyperbolic) {
      out[a] = std::atan2(root_q * t.p, t.p * cos_part + 2.0 * t.x[b] * t.x[c]);
    } else {
      out[a] = std::atan2(root_q, cos_part);
    }
  }
  return out;
}

Eigen::Matrix3d jacobian_from_terms(const Terms& t, double q) {
  require_nondegenerate(q);
  const double root_q = std::sqrt(q);
  const auto& x = t.x;
  Eigen::Matrix3d m;
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    if (t.hyperbolic) {
      const double p = t.p;
      const double num = p * ((x[b] - x[c]) * (x[b] - x[c]) - 2.0 * x[a] * p -
                              3.0 * x[a] * (x[b] + x[c])) -
                         4.0 * x[a] * x[b] * x[c];
      m(a, a) = num / (2.0 * root_q * (p + x[b]) * (p + x[c]));
      // d alpha_a / d u_b; the third vertex c labels the shared denominator.
      const double off = p * (x[a] + x[b] - x[c]) / (2.0 * root_q * (p + x[c]));
      m(a, b) = off;
      m(b, a) = off;
    } else {
      m(a, a) = -x[a] / root_q;
      const double off = (x[a] + x[b] - x[c]) / (2.0 * root_q);
      m(a, b) = off;
      m(b, a) = off;
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) require_finite(m(r, c), "angle Jacobian");
  }
  return m;
}

double euclidean_heron(Vec3 l) {
  std::sort(l.begin(), l.end(), std::greater<>());
  const double a = l[0], b = l[1], c = l[2];
  const double prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
  return 0.25 * std::sqrt(std::max(prod, 0.0));
}

}  // namespace

void check_input(const TriangleInput& in) {
  for (int c = 0; c < 3; ++c) {
    if (!std::isfinite(in.u[c]) || std::abs(in.u[c]) > kMaxFactorMagnitude) {
      throw Error(ErrorCode::Overflow, "conformal factor " + format_double(in.u[c]) +
                                           " outside the supported range");
    }
    if (!std::isfinite(in.base[c]) || !(in.base[c] > kMinBaseLength) ||
        !(in.base[c] < kMaxBaseLength)) {
      throw Error(ErrorCode::Overflow,
                  "base length " + format_double(in.base[c]) + " outside the supported range");
    }
  }
  const auto& l = in.base;
  if (!(l[0] + l[1] > l[2] && l[0] + l[2] > l[1] && l[1] + l[2] > l[0])) {
    throw Error(ErrorCode::DegenerateBaseMetric, "base lengths violate the triangle inequality");
  }
}

Vec3 scaled_lengths(const TriangleInput& in) {
  check_input(in);
  Vec3 out{};
  for (int a = 0; a < 3; ++a) {
    const double scale = std::exp(0.5 * (in.u[(a + 1) % 3] + in.u[(a + 2) % 3]));
    if (in.geometry == Geometry::Euclidean) {
      out[a] = in.base[a] * scale;
    } else {
      out[a] = 2.0 * std::asinh(std::sinh(0.5 * in.base[a]) * scale);
    }
    require_finite(out[a], "scaled length");
  }
  return out;
}

double q_value(const TriangleInput& in) { return q_from_terms(make_terms(in)); }

Vec3 h_values(const TriangleInput& in) { return h_from_terms(make_terms(in)); }

RegionClass classify(const TriangleInput& in) {
  const Terms t = make_terms(in);
  return classify_terms(q_from_terms(t), h_from_terms(t));
}

double v_region_threshold(const TriangleInput& input, int apex) {
  TriangleInput in = input;
  in.u[apex] = 0.0;
  const Terms t = make_terms(in);
  const int b = (apex + 1) % 3;
  const int c = (apex + 2) % 3;
  // Larger root of A xi^2 + B xi + C = 0 in xi_apex, divided through by 2 S_apex^2:
  // 2A / (-B + sqrt(Delta)) = s2_a / (s2_b xi_b + s2_c xi_c + 2 sqrt(s2_b s2_c (xi_b xi_c + k)))
  // with k = S_apex^2 (hyperbolic) or 0 (Euclidean).
  const double k = t.hyperbolic ? t.s2[apex] : 0.0;
  const double denom =
      t.x[b] + t.x[c] + 2.0 * std::sqrt(t.s2[b] * t.s2[c]) * std::sqrt(t.xi[b] * t.xi[c] + k);
  const double value = std::log(t.s2[apex] / denom);
  require_finite(value, "threshold");
  return value;
}

Vec3 angles(const TriangleInput& in) {
  const Terms t = make_terms(in);
  return angles_from_terms(t, q_from_terms(t));
}

Vec3 extended_angles(const TriangleInput& in) {
  const Terms t = make_terms(in);
  const double q = q_from_terms(t);
  const RegionClass region = classify_terms(q, h_from_terms(t));
  if (!region.is_degenerate()) return angles_from_terms(t, q);
  Vec3 out{0.0, 0.0, 0.0};
  out[region.apex] = kPi;
  return out;
}

AngleJacobian angle_jacobian(const TriangleInput& in) {
  const Terms t = make_terms(in);
  return AngleJacobian{jacobian_from_terms(t, q_from_terms(t))};
}

double area(const TriangleInput& in) {
  const Terms t = make_terms(in);
  const double q = q_from_terms(t);
  require_nondegenerate(q);
  if (in.geometry == Geometry::Euclidean) return euclidean_heron(scaled_lengths(in));
  // Half-defect form of pi - (sum of angles): tan(S/2) = sqrt(Q) / (2P + sum x).
  // Free of the cancellation the defect suffers on small triangles.
  return 2.0 * std::atan2(std::sqrt(q), 2.0 * t.p + t.x[0] + t.x[1] + t.x[2]);
}

AreaDerivativeCheck area_derivative_check(const TriangleInput& in, int vertex) {
  if (in.geometry != Geometry::Hyperbolic) {
    throw Error(ErrorCode::WrongGeometry, "area derivative identity is hyperbolic only");
  }
  const Terms t = make_terms(in);
  const double q = q_from_terms(t);
  const Eigen::Matrix3d jac = jacobian_from_terms(t, q);

  constexpr double step = 1e-6;
  TriangleInput plus = in;
  TriangleInput minus = in;
  plus.u[vertex] += step;
  minus.u[vertex] -= step;
  AreaDerivativeCheck out;
  out.finite_difference = (area(plus) - area(minus)) / (2.0 * step);

  const int j = (vertex + 1) % 3;
  const int k = (vertex + 2) % 3;
  // cosh l - 1 = 2 sinh^2(l/2) = 2 x / P
  const double cosh_lk_m1 = 2.0 * t.x[k] / t.p;
  const double cosh_lj_m1 = 2.0 * t.x[j] / t.p;
  out.identity_rhs = jac(j, vertex) * cosh_lk_m1 + jac(k, vertex) * cosh_lj_m1;
  return out;
}

double circumcenter_signed_distance(const TriangleInput& in, int edge_apex) {
  if (in.geometry != Geometry::Euclidean) {
    throw Error(ErrorCode::WrongGeometry, "circumcenter distance is Euclidean only");
  }
  const Terms t = make_terms(in);
  const double q = q_from_terms(t);
  require_nondegenerate(q);
  const Vec3 h = h_from_terms(t);
  const int a = edge_apex;
  const int b = (a + 1) % 3;
  const int c = (a + 2) % 3;
  const double s = area(in);
  const double scale =
      1.0 / (t.xi[a] * std::pow(t.xi[b] * t.xi[c], 1.5) * 8.0 * s * in.base[a]);
  return scale * h[a];
}

TriangleConformalState evaluate(const TriangleInput& in) {
  const Terms t = make_terms(in);
  TriangleConformalState st;
  st.input = in;
  st.lengths = scaled_lengths(in);
  st.q = q_from_terms(t);
  st.h = h_from_terms(t);
  st.region = classify_terms(st.q, st.h);
  if (st.region.is_degenerate()) {
    st.extended_angles = {0.0, 0.0, 0.0};
    st.extended_angles[st.region.apex] = kPi;
  } else {
    st.angles = angles_from_terms(t, st.q);
    st.extended_angles = *st.angles;
  }
  return st;
}

}  // namespace vscale
