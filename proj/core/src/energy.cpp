#include "vscale/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vscale/json_format.hpp"

namespace vscale {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Samples used to locate region changes along a segment.
constexpr int kScanSamples = 64;

void check_size(const MetricMesh& mesh, const ConformalFactor& u) {
  if (u.size() != static_cast<std::size_t>(mesh.vertex_count())) {
    throw Error(ErrorCode::SizeMismatch, "expected " + std::to_string(mesh.vertex_count()) +
                                             " conformal factors, got " +
                                             std::to_string(u.size()));
  }
}

class AdaptiveKronrod {
 public:
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;

  explicit AdaptiveKronrod(int max_depth) : max_depth_(max_depth) {}

  template <class F>
  double integrate(const F& f, double a, double b, double tol) {
    return recurse(f, a, b, tol, max_depth_);
  }

  bool failed() const { return failed_; }
  double worst_error() const { return worst_error_; }

 private:
  template <class F>
  double recurse(const F& f, double a, double b, double tol, int depth) {
    const auto& nodes = Rule::abscissa();
    const auto& kw = Rule::weights();
    const auto& gw = boost::math::quadrature::gauss<double, 7>::weights();
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    // Boost stores the non-negative half of the symmetric rule; the Gauss
    // nodes are the even-indexed Kronrod nodes.
    const double f0 = f(mid);
    double kronrod = kw[0] * f0;
    double gauss = gw[0] * f0;
    for (std::size_t n = 1; n < nodes.size(); ++n) {
      const double pair = f(mid - half * nodes[n]) + f(mid + half * nodes[n]);
      kronrod += kw[n] * pair;
      if (n % 2 == 0) gauss += gw[n / 2] * pair;
    }
    kronrod *= half;
    gauss *= half;

    const double err = std::abs(kronrod - gauss);
    if (err <= tol || half <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(mid)) {
      return kronrod;
    }
    if (depth == 0) {
      failed_ = true;
      worst_error_ = std::max(worst_error_, err);
      return kronrod;
    }
    return recurse(f, a, mid, 0.5 * tol, depth - 1) + recurse(f, mid, b, 0.5 * tol, depth - 1);
  }

  int max_depth_;
  bool failed_ = false;
  double worst_error_ = 0.0;
};

// Region label along a segment: -1 admissible, 0..2 degenerate apex.
int region_label(const TriangleInput& in) { return classify(in).apex; }

void find_breaks(const auto& label_at, double s0, int c0, double s1, int c1,
                 std::vector<double>& breaks) {
  if (c0 == c1) return;
  if (s1 - s0 <= 1e-15) {
    breaks.push_back(0.5 * (s0 + s1));
    return;
  }
  const double mid = 0.5 * (s0 + s1);
  const int cm = label_at(mid);
  find_breaks(label_at, s0, c0, mid, cm, breaks);
  find_breaks(label_at, mid, cm, s1, c1, breaks);
}

double segment_integral(Geometry geometry, const Vec3& base, const Vec3& from, const Vec3& to,
                        double tol, AdaptiveKronrod& quad) {
  const Vec3 d{to[0] - from[0], to[1] - from[1], to[2] - from[2]};
  if (d[0] == 0.0 && d[1] == 0.0 && d[2] == 0.0) return 0.0;

  const auto point = [&](double s) {
    TriangleInput in;
    in.geometry = geometry;
    in.base = base;
    in.u = {from[0] + s * d[0], from[1] + s * d[1], from[2] + s * d[2]};
    return in;
  };
  const auto label_at = [&](double s) { return region_label(point(s)); };

  std::vector<double> cuts{0.0};
  int prev = label_at(0.0);
  for (int n = 1; n <= kScanSamples; ++n) {
    const double s = static_cast<double>(n) / kScanSamples;
    const int cur = label_at(s);
    find_breaks(label_at, static_cast<double>(n - 1) / kScanSamples, prev, s, cur, cuts);
    prev = cur;
  }
  cuts.push_back(1.0);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const bool has_breaks = cuts.size() > 2;

  const auto integrand = [&](double s) {
    const Vec3 a = extended_angles(point(s));
    return a[0] * d[0] + a[1] * d[1] + a[2] * d[2];
  };

  double total = 0.0;
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double s0 = cuts[p];
    const double s1 = cuts[p + 1];
    const double len = s1 - s0;
    if (len <= 0.0) continue;
    const double piece_tol = tol * len;
    if (!has_breaks) {
      total += quad.integrate(integrand, s0, s1, piece_tol);
      continue;
    }
    // Angles behave like a square root of the distance to a region
    // boundary. s = s0 + len (3 w^2 - 2 w^3) flattens both ends so the
    // transformed integrand is smooth.
    const auto smoothed = [&](double w) {
      const double s = s0 + len * w * w * (3.0 - 2.0 * w);
      return integrand(s) * len * 6.0 * w * (1.0 - w);
    };
    total += quad.integrate(smoothed, 0.0, 1.0, piece_tol);
  }
  return total;
}

}  // namespace

double triangle_energy_along(Geometry geometry, const Vec3& base, std::span<const Vec3> points,
                             const QuadratureConfig& config) {
  if (points.size() < 2) return 0.0;
  if (!(config.absolute_tolerance > 0.0)) {
    throw Error(ErrorCode::QuadratureFailure, "tolerance must be positive");
  }
  AdaptiveKronrod quad(config.max_depth);
  // Split the tolerance across segments in proportion to their length.
  std::vector<double> lengths;
  double total_length = 0.0;
  for (std::size_t n = 0; n + 1 < points.size(); ++n) {
    double l = 0.0;
    for (int c = 0; c < 3; ++c) l += std::abs(points[n + 1][c] - points[n][c]);
    lengths.push_back(l);
    total_length += l;
  }
  double total = 0.0;
  for (std::size_t n = 0; n + 1 < points.size(); ++n) {
    const double share = total_length > 0.0 ? lengths[n] / total_length : 0.0;
    total += segment_integral(geometry, base, points[n], points[n + 1],
                              config.absolute_tolerance * share, quad);
  }
  if (quad.failed()) {
    throw Error(ErrorCode::QuadratureFailure,
                "tolerance " + format_double(config.absolute_tolerance) +
                    " not reached at depth " + std::to_string(config.max_depth) +
                    " (local error " + format_double(quad.worst_error()) + ")");
  }
  return total;
}

double triangle_energy(const TriangleInput& input, const Vec3& base_point,
                       const QuadratureConfig& quad) {
  const Vec3 path[2] = {base_point, input.u};
  return triangle_energy_along(input.geometry, input.base, path, quad);
}

TriangleInput face_input(const MetricMesh& mesh, std::size_t face, const ConformalFactor& u) {
  const Face& t = mesh.mesh().faces()[face];
  TriangleInput in;
  in.geometry = mesh.geometry();
  in.base = mesh.face_base(face);
  in.u = {u[t[0]], u[t[1]], u[t[2]]};
  return in;
}

std::vector<RegionClass> face_regions(const MetricMesh& mesh, const ConformalFactor& u) {
  check_size(mesh, u);
  std::vector<RegionClass> out;
  out.reserve(mesh.face_count());
  for (std::size_t f = 0; f < mesh.face_count(); ++f) out.push_back(classify(face_input(mesh, f, u)));
  return out;
}

CurvatureVector curvature(const MetricMesh& mesh, const ConformalFactor& u) {
  check_size(mesh, u);
  std::vector<double> k(static_cast<std::size_t>(mesh.vertex_count()), kTwoPi);
  const auto& faces = mesh.mesh().faces();
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Vec3 a = extended_angles(face_input(mesh, f, u));
    for (int c = 0; c < 3; ++c) k[faces[f][c]] -= a[c];
  }
  return CurvatureVector(std::move(k));
}

double total_area(const MetricMesh& mesh, const ConformalFactor& u) {
  check_size(mesh, u);
  double sum = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const TriangleInput in = face_input(mesh, f, u);
    if (classify(in).is_degenerate()) {
      throw Error(ErrorCode::DegenerateFace, "face " + std::to_string(f) + " is degenerate");
    }
    sum += area(in);
  }
  return sum;
}

double energy_difference(const MetricMesh& mesh, const ConformalFactor& from,
                         const ConformalFactor& to, const QuadratureConfig& quad) {
  check_size(mesh, from);
  check_size(mesh, to);
  QuadratureConfig per_face = quad;
  per_face.absolute_tolerance =
      quad.absolute_tolerance / static_cast<double>(std::max<std::size_t>(1, mesh.face_count()));
  double faces_sum = 0.0;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const TriangleInput a = face_input(mesh, f, from);
    const TriangleInput b = face_input(mesh, f, to);
    faces_sum += triangle_energy(b, a.u, per_face);
  }
  double linear = 0.0;
  for (std::size_t i = 0; i < to.size(); ++i) linear += to[i] - from[i];
  return -faces_sum + kTwoPi * linear;
}

double global_energy(const MetricMesh& mesh, const ConformalFactor& u,
                     const QuadratureConfig& quad) {
  return energy_difference(mesh, ConformalFactor::zeros(mesh.vertex_count()), u, quad);
}

CurvatureJacobian curvature_jacobian(const MetricMesh& mesh, const ConformalFactor& u) {
  check_size(mesh, u);
  const TriMesh& tri = mesh.mesh();
  std::vector<double> diag(static_cast<std::size_t>(mesh.vertex_count()), 0.0);
  std::vector<double> off(tri.edge_count(), 0.0);
  CurvatureJacobian out;

  for (std::size_t f = 0; f < tri.face_count(); ++f) {
    const TriangleInput in = face_input(mesh, f, u);
    if (classify(in).is_degenerate()) {
      out.degenerate_faces.push_back(f);
      continue;
    }
    const Eigen::Matrix3d lam = angle_jacobian(in).m;
    const Face& t = tri.faces()[f];
    for (int c = 0; c < 3; ++c) {
      diag[t[c]] -= lam(c, c);
      // The edge opposite corner c joins the other two corners.
      const int a = (c + 1) % 3;
      const int b = (c + 2) % 3;
      off[tri.face_edge(f, c)] -= lam(a, b);
    }
  }

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(diag.size() + 2 * off.size());
  for (std::size_t v = 0; v < diag.size(); ++v) {
    entries.emplace_back(static_cast<int>(v), static_cast<int>(v), diag[v]);
  }
  for (std::size_t e = 0; e < off.size(); ++e) {
    const EdgeKey& key = tri.edges()[e];
    entries.emplace_back(key.a, key.b, off[e]);
    entries.emplace_back(key.b, key.a, off[e]);
  }
  out.matrix.resize(mesh.vertex_count(), mesh.vertex_count());
  out.matrix.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace vscale
