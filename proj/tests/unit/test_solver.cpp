#include <cmath>
#include <numbers>
#include <numeric>

#include "doctest.h"
#include "test_support.hpp"
#include "vscale/solver.hpp"

using namespace vscale;
using namespace vscale::testing;

namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode error_code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::ParseError;
}

double centered_gap(const ConformalFactor& a, const ConformalFactor& b, bool center) {
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a[i] - b[i];
  if (center) {
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
    for (double& x : d) x -= mean;
  }
  double m = 0.0;
  for (double x : d) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("fixed point") {
  const auto mesh = tetrahedron(Geometry::Euclidean);
  const SolveResult r = solve_prescribed_curvature(mesh, CurvatureVector({kPi, kPi, kPi, kPi}));
  CHECK(r.converged);
  CHECK(r.iterations <= 1);
  CHECK(r.normalization == Normalization::SumZero);
  for (double x : r.u.u) CHECK(std::abs(x) < 1e-12);
  CHECK(r.degenerate_faces_at_solution.empty());
  CHECK(r.residual_history.size() == static_cast<std::size_t>(r.iterations) + 1);
}

TEST_CASE("round trip recovers the factors") {
  Sampler rng(51);
  for (Geometry g : {Geometry::Euclidean, Geometry::Hyperbolic}) {
    for (const MetricMesh& mesh : {tetrahedron(g), torus7(g), icosahedron(g)}) {
      const bool euclidean = g == Geometry::Euclidean;
      for (int s = 0; s < 5; ++s) {
        const ConformalFactor truth = rng.factors(mesh.vertex_count(), 0.5, euclidean);
        const SolveResult r = solve_prescribed_curvature(mesh, curvature(mesh, truth));
        CHECK(r.converged);
        CHECK(r.residual_history.back() <= 1e-10);
        CHECK(centered_gap(r.u, truth, euclidean) < 1e-8);
        CHECK(r.normalization == (euclidean ? Normalization::SumZero : Normalization::None));
        if (euclidean) CHECK(std::abs(std::accumulate(r.u.u.begin(), r.u.u.end(), 0.0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("objective never increases and the final phase is quadratic") {
  Sampler rng(52);
  for (Geometry g : {Geometry::Euclidean, Geometry::Hyperbolic}) {
    const MetricMesh mesh = torus7(g);
    for (int s = 0; s < 5; ++s) {
      const ConformalFactor truth = rng.factors(7, 0.5, g == Geometry::Euclidean);
      const SolveResult r = solve_prescribed_curvature(mesh, curvature(mesh, truth), {},
                                                       rng.factors(7, 0.5, false));
      REQUIRE(r.converged);
      for (std::size_t n = 1; n < r.objective_history.size(); ++n) {
        CHECK(r.objective_history[n] <= r.objective_history[n - 1] + 1e-12);
      }
      const auto& res = r.residual_history;
      for (std::size_t n = 0; n + 1 < res.size(); ++n) {
        if (res[n] < 1e-4) CHECK(res[n + 1] < std::pow(res[n], 1.5));
      }
    }
  }
}

TEST_CASE("Euclidean solution ignores the translation part of the start") {
  Sampler rng(53);
  const auto mesh = icosahedron(Geometry::Euclidean);
  const ConformalFactor truth = rng.factors(12, 0.4, true);
  const CurvatureVector target = curvature(mesh, truth);
  const ConformalFactor start = rng.factors(12, 0.4, false);
  ConformalFactor shifted = start;
  for (double& x : shifted.u) x += 3.0;
  const SolveResult a = solve_prescribed_curvature(mesh, target, {}, start);
  const SolveResult b = solve_prescribed_curvature(mesh, target, {}, shifted);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  CHECK(centered_gap(a.u, b.u, false) < 1e-10);
}

TEST_CASE("target preconditions") {
  const auto mesh = tetrahedron(Geometry::Euclidean);
  CHECK(error_code_of([&] { solve_prescribed_curvature(mesh, CurvatureVector({kPi + 0.1, kPi, kPi, kPi})); }) ==
        ErrorCode::TargetSumMismatch);
  CHECK(error_code_of([&] { solve_prescribed_curvature(mesh, CurvatureVector({2 * kPi, kPi, kPi, 0})); }) ==
        ErrorCode::InvalidTarget);
  CHECK(error_code_of([&] { solve_prescribed_curvature(mesh, CurvatureVector({kPi, kPi, kPi})); }) ==
        ErrorCode::SizeMismatch);
  CHECK(error_code_of([&] {
          solve_prescribed_curvature(mesh, CurvatureVector({kPi, kPi, kPi, kPi}), {}, ConformalFactor::zeros(3));
        }) == ErrorCode::SizeMismatch);

  // Hyperbolic targets carry no sum constraint.
  const auto hmesh = tetrahedron(Geometry::Hyperbolic);
  const SolveResult r = solve_prescribed_curvature(hmesh, CurvatureVector({4, 4, 4, 4}));
  CHECK(r.converged);
  for (double k : curvature(hmesh, r.u).k) CHECK(k == doctest::Approx(4.0).epsilon(1e-10));
}

TEST_CASE("iteration budget") {
  const auto mesh = torus7(Geometry::Hyperbolic);
  Sampler rng(54);
  const CurvatureVector target = curvature(mesh, rng.factors(7, 0.5, false));
  SolverConfig config;
  config.max_iterations = 1;
  const SolveResult r = solve_prescribed_curvature(mesh, target, config);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 1);
  CHECK(r.residual_history.back() > config.tolerance);
}

TEST_CASE("unreachable hyperbolic target") {
  // Total curvature exceeds 2 pi chi by the (positive) area, so 10.5 < 4 pi
  // has no preimage.
  const auto mesh = tetrahedron(Geometry::Hyperbolic);
  const SolveResult r = solve_prescribed_curvature(mesh, CurvatureVector({4, 3, 2.5, 1}));
  CHECK_FALSE(r.converged);
  CHECK(r.residual_history.size() == static_cast<std::size_t>(r.iterations) + 1);
  CHECK(r.objective_history.size() == r.residual_history.size());
  for (double x : r.u.u) CHECK(std::isfinite(x));
}

TEST_CASE("targets realized only by degenerate faces are flagged") {
  const auto mesh = tetrahedron(Geometry::Euclidean);
  // Vertex 0 collapses every face around it: each contributes pi there.
  ConformalFactor u{{-3, 1, 1, 1}};
  const CurvatureVector target = curvature(mesh, u);
  CHECK(target[0] == doctest::Approx(-kPi));
  const SolveResult r = solve_prescribed_curvature(mesh, target);
  CHECK(r.converged);
  CHECK_FALSE(r.degenerate_faces_at_solution.empty());
  for (std::size_t i = 0; i < 4; ++i) CHECK(curvature(mesh, r.u)[i] == doctest::Approx(target[i]).epsilon(1e-10));
}

TEST_CASE("rigidity verdicts") {
  Sampler rng(55);
  SUBCASE("translation is not a violation") {
    const auto mesh = torus7(Geometry::Euclidean);
    const ConformalFactor u1 = rng.factors(7, 0.5, false);
    ConformalFactor u2 = u1;
    for (double& x : u2.u) x += 0.7;
    const RigidityVerdict v = rigidity_check(mesh, u1, u2, 1e-9);
    CHECK(v.consistent);
    CHECK(v.curvature_gap < 1e-12);
    CHECK(v.factor_gap < 1e-12);
  }
  SUBCASE("identical hyperbolic factors") {
    const auto mesh = tetrahedron(Geometry::Hyperbolic);
    const ConformalFactor u = rng.factors(4, 0.5, false);
    CHECK(rigidity_check(mesh, u, u, 1e-9).consistent);
  }
  SUBCASE("random hyperbolic pairs") {
    const auto mesh = tetrahedron(Geometry::Hyperbolic);
    int violations = 0;
    for (int n = 0; n < 1000; ++n) {
      const RigidityVerdict v = rigidity_check(mesh, rng.factors(4, 2.0, false), rng.factors(4, 2.0, false), 1e-8);
      if (!v.consistent) ++violations;
    }
    CHECK(violations == 0);
  }
  SUBCASE("solutions from different starts agree") {
    const auto mesh = torus7(Geometry::Hyperbolic);
    const CurvatureVector target = curvature(mesh, rng.factors(7, 0.5, false));
    const SolveResult a = solve_prescribed_curvature(mesh, target);
    const SolveResult b = solve_prescribed_curvature(mesh, target, {}, rng.factors(7, 0.5, false));
    CHECK(rigidity_check(mesh, a.u, b.u, 1e-9).consistent);
    CHECK(centered_gap(a.u, b.u, false) < 1e-8);
  }
  SUBCASE("a loose tolerance reports the offending pair") {
    // Extended curvature on a tetrahedron stays in [-pi, 2 pi], so tol = 10
    // treats every pair as equal-curvature.
    const auto mesh = tetrahedron(Geometry::Euclidean);
    const RigidityVerdict v = rigidity_check(mesh, ConformalFactor::zeros(4), ConformalFactor{{150, 0, 0, 0}}, 10.0);
    CHECK_FALSE(v.consistent);
    CHECK(v.factor_gap == doctest::Approx(112.5));
    CHECK_FALSE(v.details.empty());
  }
}

TEST_CASE("gauss-bonnet check") {
  const GaussBonnetCheck e = gauss_bonnet_check(tetrahedron(Geometry::Euclidean), ConformalFactor::zeros(4));
  CHECK(e.pass);
  CHECK(e.lhs == doctest::Approx(4 * kPi));
  CHECK(e.rhs == doctest::Approx(4 * kPi));

  Sampler rng(56);
  const GaussBonnetCheck t = gauss_bonnet_check(torus7(Geometry::Euclidean), rng.factors(7, 1.0, false));
  CHECK(t.pass);
  CHECK(std::abs(t.lhs) < 1e-12);
  CHECK(t.rhs == 0.0);

  const double c1 = std::cosh(1.0);
  const double defect = 4 * (kPi - 3 * std::acos(c1 / (1 + c1)));
  const GaussBonnetCheck h = gauss_bonnet_check(tetrahedron(Geometry::Hyperbolic), ConformalFactor::zeros(4));
  CHECK(h.pass);
  CHECK(h.lhs == doctest::Approx(defect).epsilon(1e-12));
  CHECK(h.rhs == doctest::Approx(defect).epsilon(1e-12));

  CHECK(error_code_of([] { gauss_bonnet_check(tetrahedron(Geometry::Hyperbolic), ConformalFactor{{-4, 0, 0, 0}}); }) ==
        ErrorCode::DegenerateFace);
}
