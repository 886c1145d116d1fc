// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Every check compares library output against an oracle from
// test_support or a closed-form value.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "test_support.hpp"
#include "vscale/energy.hpp"
#include "vscale/solver.hpp"
#include "vscale/triangle.hpp"

namespace {

using namespace vscale;
using namespace vscale::testing;

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Eigen::Vector3d eig3(const Eigen::Matrix3d& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

ConformalFactor from_eigen(const Eigen::VectorXd& v) {
  return ConformalFactor{std::vector<double>(v.data(), v.data() + v.size())};
}

// 1 ---------------------------------------------------------------------------
Outcome golden_jacobians() {
  Eigen::Matrix3d pattern;
  pattern << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  const Eigen::Matrix3d expect_e = (-std::sqrt(3.0) / 6.0) * pattern;

  const double c1 = std::cosh(1.0);
  const double a = std::sinh(1.0) * std::sinh(1.0) * std::sin(std::acos(c1 / (1.0 + c1)));
  Eigen::Matrix3d pattern_h;
  pattern_h << 2 * c1, -1, -1, -1, 2 * c1, -1, -1, -1, 2 * c1;
  const Eigen::Matrix3d expect_h = (-(c1 - 1.0) / (a * (1.0 + c1))) * pattern_h;

  const double err_e = max_abs(angle_jacobian({Geometry::Euclidean, {1, 1, 1}, {0, 0, 0}}).m - expect_e);
  const double err_h = max_abs(angle_jacobian({Geometry::Hyperbolic, {1, 1, 1}, {0, 0, 0}}).m - expect_h);
  return {err_e < 1e-12 && err_h < 1e-12,
          "euclidean err " + fmt("%.2e", err_e) + ", hyperbolic err " + fmt("%.2e", err_h)};
}

// 2 ---------------------------------------------------------------------------
Outcome symmetry_definiteness() {
  Sampler rng(2);
  double worst_sym = 0.0;
  double worst_h_eig = -1e300;  // largest eigenvalue seen, hyperbolic
  double worst_e_eig = -1e300;  // largest eigenvalue seen, Euclidean
  double worst_null = 0.0;
  int failures = 0;
  for (Geometry g : {Geometry::Euclidean, Geometry::Hyperbolic}) {
    for (int n = 0; n < 10000; ++n) {
      const TriangleInput in = rng.nondegenerate(g);
      const Eigen::Matrix3d m = angle_jacobian(in).m;
      const double sym = max_abs(m - m.transpose()) / max_abs(m);
      worst_sym = std::max(worst_sym, sym);
      const Eigen::Vector3d ev = eig3(0.5 * (m + m.transpose()));
      bool ok = sym < 1e-10;
      if (g == Geometry::Hyperbolic) {
        worst_h_eig = std::max(worst_h_eig, ev.maxCoeff());
        ok = ok && ev.maxCoeff() < 0.0;
      } else {
        const double null = (m * Eigen::Vector3d::Ones()).cwiseAbs().maxCoeff();
        worst_e_eig = std::max(worst_e_eig, ev.maxCoeff());
        worst_null = std::max(worst_null, null);
        ok = ok && ev.maxCoeff() <= 1e-10 && null <= 1e-10;
      }
      if (!ok) ++failures;
    }
  }
  return {failures == 0, "rel asym " + fmt("%.1e", worst_sym) + ", max hyp eig " +
                             fmt("%.3e", worst_h_eig) + ", max euc eig " + fmt("%.1e", worst_e_eig) +
                             ", |L 1| " + fmt("%.1e", worst_null) + ", failures " +
                             std::to_string(failures)};
}

// 3 ---------------------------------------------------------------------------
Outcome finite_difference_oracles() {
  Sampler rng(3);
  double worst_tri = 0.0;
  double worst_hess = 0.0;
  double worst_grad = 0.0;

  for (int n = 0; n < 100; ++n) {
    const Geometry g = n % 2 ? Geometry::Hyperbolic : Geometry::Euclidean;
    const TriangleInput in = rng.nondegenerate(g, 1.0);
    worst_tri = std::max(worst_tri, relative_error(angle_jacobian(in).m, fd_angle_jacobian(in)));
  }

  const std::vector<std::function<MetricMesh()>> meshes = {
      [] { return tetrahedron(Geometry::Euclidean); }, [] { return tetrahedron(Geometry::Hyperbolic); },
      [] { return torus7(Geometry::Euclidean); },      [] { return torus7(Geometry::Hyperbolic); },
      [] { return icosahedron(Geometry::Euclidean); }};
  for (int n = 0; n < 100; ++n) {
    const MetricMesh mesh = meshes[n % meshes.size()]();
    ConformalFactor u;
    do {
      u = rng.factors(mesh.vertex_count(), 0.3, false);
    } while (!curvature_jacobian(mesh, u).degenerate_faces.empty());
    const Eigen::VectorXd x = to_eigen(u.u);

    const auto k_of = [&](const Eigen::VectorXd& v) { return to_eigen(curvature(mesh, from_eigen(v)).k); };
    const Eigen::MatrixXd fd = central_difference(k_of, x, 1e-6);
    worst_hess = std::max(worst_hess, relative_error(dense(curvature_jacobian(mesh, u).matrix), fd));

    // Energy differences are integrated directly across each stencil.
    const double eps = 1e-5;
    Eigen::VectorXd grad(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      Eigen::VectorXd lo = x, hi = x;
      lo[i] -= eps;
      hi[i] += eps;
      grad[i] = energy_difference(mesh, from_eigen(lo), from_eigen(hi)) / (2.0 * eps);
    }
    worst_grad = std::max(worst_grad, relative_error(grad, k_of(x)));
  }
  const bool pass = worst_tri < 1e-5 && worst_hess < 1e-5 && worst_grad < 1e-5;
  return {pass, "angle jac " + fmt("%.1e", worst_tri) + ", hessian " + fmt("%.1e", worst_hess) +
                    ", energy grad " + fmt("%.1e", worst_grad)};
}

// 4 ---------------------------------------------------------------------------
Outcome degeneracy_trichotomy() {
  Sampler rng(4);
  int exceptions = 0;
  for (Geometry g : {Geometry::Euclidean, Geometry::Hyperbolic}) {
    for (int n = 0; n < 10000; ++n) {
      const Vec3 h = h_values(rng.degenerate(g));
      const auto neg = std::count_if(h.begin(), h.end(), [](double v) { return v < 0.0; });
      const auto pos = std::count_if(h.begin(), h.end(), [](double v) { return v > 0.0; });
      if (neg != 1 || pos != 2) ++exceptions;
    }
  }
  return {exceptions == 0, std::to_string(exceptions) + " exceptions in 20000 samples"};
}

// 5 ---------------------------------------------------------------------------
Outcome threshold_consistency() {
  Sampler rng(5);
  double worst = 0.0;
  for (Geometry g : {Geometry::Euclidean, Geometry::Hyperbolic}) {
    for (int n = 0; n < 100; ++n) {
      TriangleInput in = rng.triangle(g);
      const int apex = rng.index(3);
      worst = std::max(worst, std::abs(v_region_threshold(in, apex) - oracle_threshold_bisection(in, apex)));
    }
  }
  const double unit = v_region_threshold({Geometry::Euclidean, {1, 1, 1}, {0, 0, 0}}, 0);
  const double unit_err = std::abs(unit + std::log(4.0));
  return {worst < 1e-10 && unit_err < 1e-12,
          "max gap to bisection " + fmt("%.1e", worst) + ", unit case " + fmt("%.13f", unit)};
}

// 6 ---------------------------------------------------------------------------
// Rays in the u_i direction with random base and random (u_j, u_k), stopped
// 1e-6 short of the threshold on the admissible side.
Outcome extension_continuity() {
  Sampler rng(6);
  double worst = 0.0;
  for (int n = 0; n < 10; ++n) {
    const Geometry g = n % 2 ? Geometry::Hyperbolic : Geometry::Euclidean;
    TriangleInput in = rng.triangle(g);
    in.u[0] = v_region_threshold(in, 0) + 1e-6;
    const Vec3 a = extended_angles(in);
    worst = std::max({worst, std::abs(a[0] - kPi), std::abs(a[1]), std::abs(a[2])});
  }
  return {worst < 1e-3, "max discrepancy at distance 1e-6: " + fmt("%.3e", worst)};
}

// 7 ---------------------------------------------------------------------------
Outcome energy_structure() {
  Sampler rng(7);
  double worst_path = 0.0;
  for (int n = 0; n < 50; ++n) {
    const Geometry g = n % 2 ? Geometry::Hyperbolic : Geometry::Euclidean;
    const Vec3 base = rng.base();
    Vec3 start{}, end{};
    for (double& x : start) x = rng.uniform(-2, 2);
    for (double& x : end) x = rng.uniform(-2, 2);
    // Detour through a nondegenerate point.
    TriangleInput mid{g, base, {}};
    do {
      for (double& x : mid.u) x = rng.uniform(-1, 1);
    } while (q_value(mid) <= 0.0);
    const std::vector<Vec3> straight{start, end};
    const std::vector<Vec3> detour{start, mid.u, end};
    worst_path = std::max(worst_path, std::abs(triangle_energy_along(g, base, straight) -
                                               triangle_energy_along(g, base, detour)));
  }

  double worst_shift = 0.0;
  for (int n = 0; n < 20; ++n) {
    const TriangleInput in = rng.triangle(Geometry::Euclidean, 2.0);
    const double f0 = triangle_energy(in, {0, 0, 0});
    for (double t : {-1.0, 0.3, 2.0}) {
      TriangleInput shifted = in;
      for (double& x : shifted.u) x += t;
      worst_shift = std::max(worst_shift, std::abs(triangle_energy(shifted, {0, 0, 0}) - f0 - t * kPi));
    }
  }

  double worst_gb = 0.0;
  for (const MetricMesh& mesh : {tetrahedron(Geometry::Euclidean), torus7(Geometry::Euclidean),
                                 icosahedron(Geometry::Euclidean)}) {
    const double chi = euler_characteristic(mesh.mesh());
    for (int n = 0; n < 50; ++n) {
      const CurvatureVector k = curvature(mesh, rng.factors(mesh.vertex_count(), 3.0, false));
      double sum = 0.0;
      for (double v : k.k) sum += v;
      worst_gb = std::max(worst_gb, std::abs(sum - 2.0 * kPi * chi));
    }
  }
  const bool pass = worst_path < 1e-9 && worst_shift < 1e-9 && worst_gb < 1e-12;
  return {pass, "path gap " + fmt("%.1e", worst_path) + ", translation gap " + fmt("%.1e", worst_shift) +
                    ", gauss-bonnet gap " + fmt("%.1e", worst_gb)};
}

// 8 ---------------------------------------------------------------------------
Outcome rigidity_round_trip() {
  Sampler rng(8);
  double worst = 0.0;
  int max_iter = 0;
  int failures = 0;
  for (Geometry g : {Geometry::Euclidean, Geometry::Hyperbolic}) {
    for (const MetricMesh& mesh : {tetrahedron(g), torus7(g)}) {
      const bool euclidean = g == Geometry::Euclidean;
      for (int s = 0; s < 20; ++s) {
        const ConformalFactor truth = rng.factors(mesh.vertex_count(), 0.5, euclidean);
        const CurvatureVector target = curvature(mesh, truth);
        const ConformalFactor other = rng.factors(mesh.vertex_count(), 0.5, false);
        for (const ConformalFactor& start : {ConformalFactor::zeros(mesh.vertex_count()), other}) {
          const SolveResult r = solve_prescribed_curvature(mesh, target, {}, start);
          Eigen::VectorXd diff = to_eigen(r.u.u) - to_eigen(truth.u);
          if (euclidean) diff.array() -= diff.mean();
          const double err = diff.cwiseAbs().maxCoeff();
          worst = std::max(worst, err);
          max_iter = std::max(max_iter, r.iterations);
          if (!r.converged || err >= 1e-8 || r.iterations > 25) {
            ++failures;
            std::fprintf(stderr, "  miss: %s, %d vertices, sample %d, iterations %d, error %.3e\n",
                         std::string(to_string(g)).c_str(), mesh.vertex_count(), s, r.iterations, err);
          }
        }
      }
    }
  }
  return {failures == 0, "max |u - u*| " + fmt("%.1e", worst) + ", max iterations " +
                             std::to_string(max_iter) + ", failures " + std::to_string(failures)};
}

// 9 ---------------------------------------------------------------------------
Outcome area_derivative_identity() {
  Sampler rng(9);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const TriangleInput in = rng.nondegenerate(Geometry::Hyperbolic);
    const AreaDerivativeCheck c = area_derivative_check(in, rng.index(3));
    worst = std::max(worst, std::abs(c.finite_difference - c.identity_rhs) / std::abs(c.identity_rhs));
  }
  return {worst < 1e-5, "max relative gap " + fmt("%.1e", worst)};
}

// 10 --------------------------------------------------------------------------
Outcome hyperbolic_area() {
  Sampler rng(10);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const TriangleInput in = rng.nondegenerate(Geometry::Hyperbolic);
    const double oracle = oracle_hyperbolic_area(oracle_lengths(in));
    worst = std::max(worst, std::abs(area(in) - oracle) / oracle);
  }
  return {worst < 1e-10, "max relative gap " + fmt("%.1e", worst)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"golden Jacobians", golden_jacobians},
      {"symmetry and definiteness", symmetry_definiteness},
      {"finite-difference oracles", finite_difference_oracles},
      {"degeneracy trichotomy", degeneracy_trichotomy},
      {"threshold consistency", threshold_consistency},
      {"extension continuity", extension_continuity},
      {"energy structure", energy_structure},
      {"rigidity round trip", rigidity_round_trip},
      {"area derivative identity", area_derivative_identity},
      {"hyperbolic area cross-check", hyperbolic_area},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
