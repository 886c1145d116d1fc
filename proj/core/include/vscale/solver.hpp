#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "vscale/energy.hpp"
#include "vscale/mesh.hpp"

namespace vscale {

struct SolverConfig {
  // Stop once max_i |K_i(u) - K*_i| falls to this value.
  double tolerance = 1e-10;
  int max_iterations = 100;
  double initial_damping = 1e-8;
  double shrink = 0.5;
  QuadratureConfig quadrature{};
};

enum class Normalization { None, SumZero };

std::string_view to_string(Normalization n);

struct SolveResult {
  ConformalFactor u;
  bool converged = false;
  int iterations = 0;
  std::vector<double> residual_history;
  // Objective F(u) - <K*, u> after each accepted step, starting at the
  // initial point. Differences are integrated along the steps.
  std::vector<double> objective_history;
  std::vector<std::size_t> degenerate_faces_at_solution;
  Normalization normalization = Normalization::None;
};

/// Finds u with extended curvature equal to `target` by damped Newton on the
/// convex objective F(u) - <K*, u>. Euclidean iterates stay on sum(u) = 0.
///
/// Throws TargetSumMismatch when a Euclidean target violates Gauss-Bonnet
/// and InvalidTarget when a target entry is not below 2 pi. A result with
/// converged == false is returned when the iteration budget runs out.
SolveResult solve_prescribed_curvature(const MetricMesh& mesh, const CurvatureVector& target,
                                       const SolverConfig& config = {},
                                       std::optional<ConformalFactor> start = std::nullopt);

struct RigidityVerdict {
  bool consistent = true;
  std::string details;  // filled for violations
  double curvature_gap = 0.0;
  double factor_gap = 0.0;
};

/// If the two factors give curvatures within `tol`, they must agree
/// (up to a constant vector for Euclidean meshes) within 10 tol.
RigidityVerdict rigidity_check(const MetricMesh& mesh, const ConformalFactor& u1,
                               const ConformalFactor& u2, double tol);

struct GaussBonnetCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

// Euclidean: (sum K, 2 pi chi). Hyperbolic: (sum K - 2 pi chi, total area).
GaussBonnetCheck gauss_bonnet_check(const MetricMesh& mesh, const ConformalFactor& u);

}  // namespace vscale
