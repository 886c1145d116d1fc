#pragma once

#include <array>
#include <optional>

#include <Eigen/Core>

#include "vscale/mesh.hpp"

namespace vscale {

using Vec3 = std::array<double, 3>;

// Factors with |u| above this, or base lengths outside the open interval
// (kMinBaseLength, kMaxBaseLength), are rejected with ErrorCode::Overflow.
inline constexpr double kMaxFactorMagnitude = 700.0;
inline constexpr double kMinBaseLength = 1e-8;
inline constexpr double kMaxBaseLength = 1e3;

/// One triangle of a vertex-scaled metric.
///
/// Slot c of `base` is the base length of the edge opposite slot c of `u`;
/// slots 0, 1, 2 play the roles of the vertices i, j, k.
struct TriangleInput {
  Geometry geometry = Geometry::Euclidean;
  Vec3 base{1.0, 1.0, 1.0};
  Vec3 u{0.0, 0.0, 0.0};
};

struct RegionClass {
  // apex is -1 for a nondegenerate triangle, else the slot where the
  // triangle collapses with angle pi.
  int apex = -1;

  static RegionClass nondegenerate() { return {}; }
  static RegionClass degenerate(int a) { return RegionClass{a}; }

  bool is_degenerate() const { return apex >= 0; }
  friend bool operator==(const RegionClass&, const RegionClass&) = default;
};

struct TriangleConformalState {
  TriangleInput input;
  Vec3 lengths{};
  double q = 0.0;
  Vec3 h{};
  RegionClass region;
  std::optional<Vec3> angles;
  Vec3 extended_angles{};
};

/// Row r holds the derivatives of angle r with respect to (u_0, u_1, u_2).
struct AngleJacobian {
  Eigen::Matrix3d m;
};

// Throws Overflow / DegenerateBaseMetric on inputs outside the supported range.
void check_input(const TriangleInput& input);

Vec3 scaled_lengths(const TriangleInput& input);

/// Degeneracy polynomial in xi = exp(-u). Positive exactly when the scaled
/// lengths satisfy the strict triangle inequalities.
double q_value(const TriangleInput& input);

Vec3 h_values(const TriangleInput& input);

/// Nondegenerate iff Q > 0; otherwise the apex is the slot with the negative
/// h-value (minimal h-value on Q = 0).
RegionClass classify(const TriangleInput& input);

/// Critical factor u_apex* such that the triangle is degenerate with this apex
/// exactly when u_apex <= u_apex*. The value input.u[apex] is ignored.
double v_region_threshold(const TriangleInput& input, int apex);

Vec3 angles(const TriangleInput& input);
Vec3 extended_angles(const TriangleInput& input);
AngleJacobian angle_jacobian(const TriangleInput& input);

// Euclidean: Heron. Hyperbolic: the angle defect pi - sum of angles, evaluated
// in a cancellation-free form.
double area(const TriangleInput& input);

struct AreaDerivativeCheck {
  double finite_difference = 0.0;
  double identity_rhs = 0.0;
};

/// Hyperbolic only. Central difference of the area in u_vertex against
/// (d alpha_j / d u_i)(cosh l_k - 1) + (d alpha_k / d u_i)(cosh l_j - 1).
AreaDerivativeCheck area_derivative_check(const TriangleInput& input, int vertex);

/// Euclidean only. Signed distance from the circumcenter to the edge opposite
/// `edge_apex`, positive when the center is on the same side as the triangle.
double circumcenter_signed_distance(const TriangleInput& input, int edge_apex);

TriangleConformalState evaluate(const TriangleInput& input);

}  // namespace vscale
