#include "vscale/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/SparseCholesky>

#include "vscale/json_format.hpp"

namespace vscale {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kGaussBonnetTolerance = 1e-9;
constexpr double kArmijo = 1e-4;
constexpr int kMaxBacktracks = 40;
constexpr int kMaxDampingRetries = 12;
constexpr double kMinDamping = 1e-14;

void project_sum_zero(Eigen::VectorXd& v) { v.array() -= v.mean(); }

void project_sum_zero(std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Eigen::Map<const Eigen::VectorXd> as_eigen(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

}  // namespace

std::string_view to_string(Normalization n) {
  return n == Normalization::SumZero ? "sum_zero" : "none";
}

SolveResult solve_prescribed_curvature(const MetricMesh& mesh, const CurvatureVector& target,
                                       const SolverConfig& config,
                                       std::optional<ConformalFactor> start) {
  const auto n = static_cast<std::size_t>(mesh.vertex_count());
  if (target.size() != n) {
    throw Error(ErrorCode::SizeMismatch, "target has " + std::to_string(target.size()) +
                                             " entries for " + std::to_string(n) + " vertices");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(target[i]) || !(target[i] < kTwoPi)) {
      throw Error(ErrorCode::InvalidTarget,
                  "target curvature at vertex " + std::to_string(i) + " must be below 2 pi");
    }
  }
  const bool euclidean = mesh.geometry() == Geometry::Euclidean;
  if (euclidean) {
    const double sum = std::accumulate(target.k.begin(), target.k.end(), 0.0);
    const double expected = kTwoPi * euler_characteristic(mesh.mesh());
    if (std::abs(sum - expected) > kGaussBonnetTolerance) {
      throw Error(ErrorCode::TargetSumMismatch, "target sums to " + format_double(sum) +
                                                    ", Gauss-Bonnet requires " +
                                                    format_double(expected));
    }
  }

  SolveResult result;
  result.normalization = euclidean ? Normalization::SumZero : Normalization::None;
  result.u = start ? *start : ConformalFactor::zeros(mesh.vertex_count());
  if (result.u.size() != n) {
    throw Error(ErrorCode::SizeMismatch, "starting point has the wrong length");
  }
  if (euclidean) project_sum_zero(result.u.u);

  const auto target_vec = as_eigen(target.k);
  double objective = global_energy(mesh, result.u, config.quadrature) -
                     target_vec.dot(as_eigen(result.u.u));
  result.objective_history.push_back(objective);

  double damping = config.initial_damping;
  ConformalFactor previous;
  for (int iter = 0;; ++iter) {
    // Infeasible targets push u toward the edge of the representable range;
    // fall back to the last evaluable iterate and report non-convergence.
    CurvatureVector k;
    SparseHessian hessian;
    try {
      k = curvature(mesh, result.u);
      if (iter < config.max_iterations) hessian = curvature_jacobian(mesh, result.u).matrix;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Overflow || iter == 0) throw;
      result.u = std::move(previous);
      result.objective_history.pop_back();
      break;
    }
    Eigen::VectorXd grad = as_eigen(k.k) - target_vec;
    const double residual = grad.cwiseAbs().maxCoeff();
    result.residual_history.push_back(residual);
    result.iterations = iter;
    if (residual <= config.tolerance) {
      result.converged = true;
      break;
    }
    if (iter >= config.max_iterations) break;
    if (euclidean) project_sum_zero(grad);

    SparseHessian identity(hessian.rows(), hessian.cols());
    identity.setIdentity();

    bool accepted = false;
    ConformalFactor next;
    double decrease = 0.0;
    for (int retry = 0; retry < kMaxDampingRetries && !accepted; ++retry) {
      const SparseHessian system = hessian + damping * identity;
      Eigen::SimplicialLDLT<SparseHessian> ldlt(system);
      Eigen::VectorXd step;
      if (ldlt.info() == Eigen::Success) step = ldlt.solve(-grad);
      if (ldlt.info() != Eigen::Success || !step.allFinite()) {
        damping *= 10.0;
        continue;
      }
      if (euclidean) project_sum_zero(step);
      const double slope = grad.dot(step);
      if (!(slope < 0.0)) {
        damping *= 10.0;
        continue;
      }

      double t = 1.0;
      for (int ls = 0; ls < kMaxBacktracks; ++ls, t *= config.shrink) {
        ConformalFactor trial = result.u;
        for (std::size_t i = 0; i < n; ++i) trial[i] += t * step[static_cast<Eigen::Index>(i)];
        if (euclidean) project_sum_zero(trial.u);
        // Linear term on the displacement actually taken; trial is rounded to
        // the float grid around u, which dominates t * step near convergence.
        const Eigen::VectorXd moved = as_eigen(trial.u) - as_eigen(result.u.u);
        double delta = 0.0;
        try {
          delta = energy_difference(mesh, result.u, trial, config.quadrature) -
                  target_vec.dot(moved);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::Overflow) throw;
          continue;
        }
        if (delta <= kArmijo * t * slope) {
          accepted = true;
          next = std::move(trial);
          decrease = delta;
          break;
        }
      }
      if (accepted) {
        damping = std::max(damping * 0.1, kMinDamping);
      } else {
        damping *= 10.0;
      }
    }
    if (!accepted) break;
    previous = std::move(result.u);
    result.u = std::move(next);
    objective += decrease;
    result.objective_history.push_back(objective);
  }

  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    if (classify(face_input(mesh, f, result.u)).is_degenerate()) {
      result.degenerate_faces_at_solution.push_back(f);
    }
  }
  return result;
}

RigidityVerdict rigidity_check(const MetricMesh& mesh, const ConformalFactor& u1,
                               const ConformalFactor& u2, double tol) {
  RigidityVerdict verdict;
  const CurvatureVector k1 = curvature(mesh, u1);
  const CurvatureVector k2 = curvature(mesh, u2);
  verdict.curvature_gap = max_abs_diff(k1.k, k2.k);

  std::vector<double> diff(u1.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = u1[i] - u2[i];
  if (mesh.geometry() == Geometry::Euclidean) project_sum_zero(diff);
  verdict.factor_gap = 0.0;
  for (double d : diff) verdict.factor_gap = std::max(verdict.factor_gap, std::abs(d));

  if (verdict.curvature_gap <= tol && verdict.factor_gap > 10.0 * tol) {
    verdict.consistent = false;
    verdict.details = "curvatures agree within " + format_double(verdict.curvature_gap) +
                      " but factors differ by " + format_double(verdict.factor_gap) +
                      (mesh.geometry() == Geometry::Euclidean ? " after mean-centering" : "");
  }
  return verdict;
}

GaussBonnetCheck gauss_bonnet_check(const MetricMesh& mesh, const ConformalFactor& u) {
  const CurvatureVector k = curvature(mesh, u);
  const double sum = std::accumulate(k.k.begin(), k.k.end(), 0.0);
  const double two_pi_chi = kTwoPi * euler_characteristic(mesh.mesh());
  GaussBonnetCheck out;
  if (mesh.geometry() == Geometry::Euclidean) {
    out.lhs = sum;
    out.rhs = two_pi_chi;
  } else {
    out.lhs = sum - two_pi_chi;
    out.rhs = total_area(mesh, u);
  }
  out.pass = std::abs(out.lhs - out.rhs) < kGaussBonnetTolerance;
  return out;
}

}  // namespace vscale
