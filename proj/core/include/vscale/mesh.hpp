#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vscale/error.hpp"

namespace vscale {

enum class Geometry { Euclidean, Hyperbolic };

std::string_view to_string(Geometry g);

using Face = std::array<int, 3>;

// Undirected edge, always stored with first < second.
struct EdgeKey {
  int a = 0;
  int b = 0;

  EdgeKey() = default;
  EdgeKey(int x, int y) : a(x < y ? x : y), b(x < y ? y : x) {}

  friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

/// Closed, consistently oriented triangulation.
///
/// Construction through `TriMesh::build` checks closedness and orientation and
/// derives the edge table. Edges are numbered in ascending (min, max) order.
class TriMesh {
 public:
  TriMesh() = default;

  static TriMesh build(int vertex_count, std::vector<Face> faces);

  int vertex_count() const { return vertex_count_; }
  std::size_t face_count() const { return faces_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<EdgeKey>& edges() const { return edges_; }

  // Index into edges() of the edge opposite slot `corner` of face `f`.
  int face_edge(std::size_t f, int corner) const { return face_edges_[f][corner]; }
  std::optional<int> find_edge(int a, int b) const;

 private:
  int vertex_count_ = 0;
  std::vector<Face> faces_;
  std::vector<EdgeKey> edges_;
  std::vector<std::array<int, 3>> face_edges_;
};

int euler_characteristic(const TriMesh& mesh);

/// Triangulation plus a geometry tag and one base length per edge.
class MetricMesh {
 public:
  MetricMesh() = default;

  // Throws on the first violated invariant.
  static MetricMesh build(TriMesh mesh, Geometry geometry, std::vector<double> base_lengths);

  const TriMesh& mesh() const { return mesh_; }
  Geometry geometry() const { return geometry_; }
  const std::vector<double>& base_lengths() const { return base_lengths_; }

  int vertex_count() const { return mesh_.vertex_count(); }
  std::size_t face_count() const { return mesh_.face_count(); }

  // Base lengths of face f, ordered so that entry c is opposite corner c.
  std::array<double, 3> face_base(std::size_t f) const;

 private:
  TriMesh mesh_;
  Geometry geometry_ = Geometry::Euclidean;
  std::vector<double> base_lengths_;
};

struct ConformalFactor {
  std::vector<double> u;

  ConformalFactor() = default;
  explicit ConformalFactor(std::vector<double> values) : u(std::move(values)) {}
  static ConformalFactor zeros(int n) { return ConformalFactor(std::vector<double>(n, 0.0)); }

  std::size_t size() const { return u.size(); }
  double operator[](std::size_t i) const { return u[i]; }
  double& operator[](std::size_t i) { return u[i]; }
};

// -- unvalidated description, as read from a file -----------------------------

struct EdgeLengthRecord {
  int a = 0;
  int b = 0;
  double length = 0.0;
};

struct RawMetricMesh {
  Geometry geometry = Geometry::Euclidean;
  int vertex_count = 0;
  std::vector<Face> faces;
  std::vector<EdgeLengthRecord> edge_lengths;
};

struct ValidationIssue {
  ErrorCode code;
  std::string location;  // "face 3", "edge (0,2)", ...
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool contains(ErrorCode code) const;
};

ValidationReport validate(const RawMetricMesh& raw);
ValidationReport validate(const MetricMesh& mesh);

// -- file formats -------------------------------------------------------------

enum class MeshFormat { MetricJson, Obj };

RawMetricMesh parse_metric_json(std::string_view text);
RawMetricMesh parse_obj(std::string_view text);

MetricMesh load_mesh(std::string_view bytes, MeshFormat format);
MetricMesh load_mesh_file(const std::string& path);

RawMetricMesh to_raw(const MetricMesh& mesh);
std::string serialize_metric_json(const MetricMesh& mesh);

// Euclidean mesh with lengths taken from 3D positions.
MetricMesh metric_from_positions(std::span<const std::array<double, 3>> positions,
                                 std::vector<Face> faces);

}  // namespace vscale
