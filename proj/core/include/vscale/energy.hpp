#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "vscale/mesh.hpp"
#include "vscale/triangle.hpp"

namespace vscale {

struct QuadratureConfig {
  double absolute_tolerance = 1e-10;
  int max_depth = 40;
};

struct CurvatureVector {
  std::vector<double> k;

  CurvatureVector() = default;
  explicit CurvatureVector(std::vector<double> values) : k(std::move(values)) {}

  std::size_t size() const { return k.size(); }
  double operator[](std::size_t i) const { return k[i]; }
};

using SparseHessian = Eigen::SparseMatrix<double>;

struct CurvatureJacobian {
  SparseHessian matrix;
  // Faces outside the admissible space; they contribute nothing.
  std::vector<std::size_t> degenerate_faces;
};

/// Integral of the extended-angle 1-form from `base_point` to `input.u` along
/// the straight segment. The segment is split where it crosses a region
/// boundary; each piece is integrated adaptively to the absolute tolerance.
double triangle_energy(const TriangleInput& input, const Vec3& base_point,
                       const QuadratureConfig& quad = {});

/// Same 1-form integrated along a polyline through `points` (at least two).
double triangle_energy_along(Geometry geometry, const Vec3& base, std::span<const Vec3> points,
                             const QuadratureConfig& quad = {});

TriangleInput face_input(const MetricMesh& mesh, std::size_t face, const ConformalFactor& u);

std::vector<RegionClass> face_regions(const MetricMesh& mesh, const ConformalFactor& u);

/// K_i = 2 pi minus the extended angles at vertex i, summed over faces in
/// ascending face order.
CurvatureVector curvature(const MetricMesh& mesh, const ConformalFactor& u);

/// Sum of face areas. Throws DegenerateFace when any face is degenerate.
double total_area(const MetricMesh& mesh, const ConformalFactor& u);

/// Convex potential whose gradient is the extended curvature, with base
/// point u = 0.
double global_energy(const MetricMesh& mesh, const ConformalFactor& u,
                     const QuadratureConfig& quad = {});

/// global_energy(to) - global_energy(from), integrated directly along the
/// segment between the two points.
double energy_difference(const MetricMesh& mesh, const ConformalFactor& from,
                         const ConformalFactor& to, const QuadratureConfig& quad = {});

/// Derivative of the curvature with respect to u: the negated angle
/// Jacobians assembled over nondegenerate faces. Exactly symmetric.
CurvatureJacobian curvature_jacobian(const MetricMesh& mesh, const ConformalFactor& u);

}  // namespace vscale
