#include <benchmark/benchmark.h>

#include <array>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "vscale/energy.hpp"
#include "vscale/mesh.hpp"
#include "vscale/solver.hpp"

namespace {

using vscale::Face;

struct Sphere {
  std::vector<std::array<double, 3>> points;
  std::vector<Face> faces;
};

// Subdivided icosahedron projected to the unit sphere.
Sphere icosphere(int levels) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  Sphere s;
  s.points = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
              {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  s.faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9},  {5, 11, 4},
             {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6},  {3, 6, 8},
             {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  const auto normalize = [&](int i) {
    auto& p = s.points[i];
    const double n = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]);
    for (double& x : p) x /= n;
  };
  for (int i = 0; i < 12; ++i) normalize(i);
  for (int level = 0; level < levels; ++level) {
    std::map<std::pair<int, int>, int> mid;
    const auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      if (auto it = mid.find(key); it != mid.end()) return it->second;
      const auto& p = s.points[a];
      const auto& q = s.points[b];
      s.points.push_back({p[0] + q[0], p[1] + q[1], p[2] + q[2]});
      const int id = static_cast<int>(s.points.size()) - 1;
      normalize(id);
      mid.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    for (const Face& f : s.faces) {
      const int a = midpoint(f[0], f[1]), b = midpoint(f[1], f[2]), c = midpoint(f[2], f[0]);
      next.push_back({f[0], a, c});
      next.push_back({f[1], b, a});
      next.push_back({f[2], c, b});
      next.push_back({a, b, c});
    }
    s.faces = std::move(next);
  }
  return s;
}

vscale::MetricMesh sphere_mesh(int levels) {
  const Sphere s = icosphere(levels);
  return vscale::metric_from_positions(s.points, s.faces);
}

vscale::ConformalFactor wobble(std::size_t n) {
  vscale::ConformalFactor u = vscale::ConformalFactor::zeros(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i) u[i] = 0.2 * std::sin(1.7 * static_cast<double>(i));
  return u;
}

void BM_Curvature(benchmark::State& state) {
  const auto mesh = sphere_mesh(static_cast<int>(state.range(0)));
  const auto u = wobble(static_cast<std::size_t>(mesh.vertex_count()));
  for (auto _ : state) benchmark::DoNotOptimize(vscale::curvature(mesh, u));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(mesh.face_count()));
}
BENCHMARK(BM_Curvature)->DenseRange(1, 4);

void BM_Jacobian(benchmark::State& state) {
  const auto mesh = sphere_mesh(static_cast<int>(state.range(0)));
  const auto u = wobble(static_cast<std::size_t>(mesh.vertex_count()));
  for (auto _ : state) benchmark::DoNotOptimize(vscale::curvature_jacobian(mesh, u));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(mesh.face_count()));
}
BENCHMARK(BM_Jacobian)->DenseRange(1, 4);

// Recover the curvature of a perturbed metric from the flat start.
void BM_Solve(benchmark::State& state) {
  const auto mesh = sphere_mesh(static_cast<int>(state.range(0)));
  auto truth = wobble(static_cast<std::size_t>(mesh.vertex_count()));
  double mean = 0.0;
  for (double x : truth.u) mean += x;
  mean /= static_cast<double>(truth.size());
  for (double& x : truth.u) x -= mean;
  const auto target = vscale::curvature(mesh, truth);
  for (auto _ : state) {
    auto result = vscale::solve_prescribed_curvature(mesh, target);
    benchmark::DoNotOptimize(result.u.u.data());
  }
}
BENCHMARK(BM_Solve)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
