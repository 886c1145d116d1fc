#include "vscale/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "vscale/json_format.hpp"

namespace vscale {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::NotOriented: return "NotOriented";
    case ErrorCode::DuplicateFace: return "DuplicateFace";
    case ErrorCode::DegenerateBaseMetric: return "DegenerateBaseMetric";
    case ErrorCode::MissingEdgeLength: return "MissingEdgeLength";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::InvalidVertexIndex: return "InvalidVertexIndex";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorCode::WrongGeometry: return "WrongGeometry";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::TargetSumMismatch: return "TargetSumMismatch";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::DegenerateFace: return "DegenerateFace";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
  }
  return "Unknown";
}

std::string_view to_string(Geometry g) {
  return g == Geometry::Euclidean ? "euclidean" : "hyperbolic";
}

namespace {

std::string edge_name(int a, int b) {
  return "edge (" + std::to_string(a) + "," + std::to_string(b) + ")";
}

std::string face_name(std::size_t f) { return "face " + std::to_string(f); }

// Connectivity checks shared by raw validation and TriMesh::build. Returns
// the face count of each undirected edge.
std::map<EdgeKey, int> check_connectivity(int vertex_count, const std::vector<Face>& faces,
                                          std::vector<ValidationIssue>& issues) {
  std::map<EdgeKey, int> edge_faces;
  std::map<std::pair<int, int>, int> directed;
  std::map<std::array<int, 3>, std::size_t> seen_triples;

  if (vertex_count < 0) {
    issues.push_back({ErrorCode::ParseError, "mesh", "negative vertex count"});
  }
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& t = faces[f];
    bool in_range = true;
    for (int v : t) {
      if (v < 0 || v >= vertex_count) in_range = false;
    }
    if (!in_range) {
      issues.push_back({ErrorCode::InvalidVertexIndex, face_name(f), "vertex index out of range"});
      continue;
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) {
      issues.push_back({ErrorCode::ParseError, face_name(f), "repeated vertex within face"});
      continue;
    }
    std::array<int, 3> sorted = t;
    std::sort(sorted.begin(), sorted.end());
    if (auto [it, inserted] = seen_triples.emplace(sorted, f); !inserted) {
      issues.push_back({ErrorCode::DuplicateFace, face_name(f),
                        "same vertex triple as face " + std::to_string(it->second)});
    }
    for (int c = 0; c < 3; ++c) {
      const int a = t[c];
      const int b = t[(c + 1) % 3];
      ++edge_faces[EdgeKey(a, b)];
      ++directed[{a, b}];
    }
  }
  for (const auto& [e, count] : edge_faces) {
    if (count != 2) {
      issues.push_back({ErrorCode::NotClosed, edge_name(e.a, e.b),
                        "edge lies in " + std::to_string(count) + " faces"});
    }
  }
  for (const auto& [d, count] : directed) {
    if (count > 1) {
      issues.push_back({ErrorCode::NotOriented, edge_name(d.first, d.second),
                        "directed edge " + std::to_string(d.first) + "->" +
                            std::to_string(d.second) + " appears in " + std::to_string(count) +
                            " faces"});
    }
  }
  return edge_faces;
}

bool triangle_inequality_holds(double a, double b, double c) {
  return a + b > c && a + c > b && b + c > a;
}

void throw_first(const ValidationReport& report) {
  if (report.ok()) return;
  // Report structural problems before metric ones.
  static constexpr ErrorCode order[] = {
      ErrorCode::ParseError,        ErrorCode::InvalidVertexIndex, ErrorCode::DuplicateFace,
      ErrorCode::NotClosed,         ErrorCode::NotOriented,        ErrorCode::MissingEdgeLength,
      ErrorCode::NonPositiveLength, ErrorCode::DegenerateBaseMetric};
  for (ErrorCode code : order) {
    for (const auto& issue : report.issues) {
      if (issue.code == code) throw Error(code, issue.location + ": " + issue.message);
    }
  }
  const auto& issue = report.issues.front();
  throw Error(issue.code, issue.location + ": " + issue.message);
}

}  // namespace

bool ValidationReport::contains(ErrorCode code) const {
  return std::any_of(issues.begin(), issues.end(),
                     [code](const ValidationIssue& i) { return i.code == code; });
}

TriMesh TriMesh::build(int vertex_count, std::vector<Face> faces) {
  std::vector<ValidationIssue> issues;
  const auto edge_faces = check_connectivity(vertex_count, faces, issues);
  ValidationReport report{std::move(issues)};
  throw_first(report);

  TriMesh mesh;
  mesh.vertex_count_ = vertex_count;
  mesh.edges_.reserve(edge_faces.size());
  for (const auto& [e, count] : edge_faces) mesh.edges_.push_back(e);
  mesh.faces_ = std::move(faces);
  mesh.face_edges_.resize(mesh.faces_.size());
  for (std::size_t f = 0; f < mesh.faces_.size(); ++f) {
    const Face& t = mesh.faces_[f];
    for (int c = 0; c < 3; ++c) {
      mesh.face_edges_[f][c] = *mesh.find_edge(t[(c + 1) % 3], t[(c + 2) % 3]);
    }
  }
  return mesh;
}

std::optional<int> TriMesh::find_edge(int a, int b) const {
  const EdgeKey key(a, b);
  const auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
  if (it == edges_.end() || *it != key) return std::nullopt;
  return static_cast<int>(it - edges_.begin());
}

int euler_characteristic(const TriMesh& mesh) {
  return mesh.vertex_count() - static_cast<int>(mesh.edge_count()) +
         static_cast<int>(mesh.face_count());
}

MetricMesh MetricMesh::build(TriMesh mesh, Geometry geometry, std::vector<double> base_lengths) {
  if (base_lengths.size() != mesh.edge_count()) {
    throw Error(ErrorCode::MissingEdgeLength,
                "expected " + std::to_string(mesh.edge_count()) + " edge lengths, got " +
                    std::to_string(base_lengths.size()));
  }
  MetricMesh out;
  out.mesh_ = std::move(mesh);
  out.geometry_ = geometry;
  out.base_lengths_ = std::move(base_lengths);
  throw_first(validate(out));
  return out;
}

std::array<double, 3> MetricMesh::face_base(std::size_t f) const {
  return {base_lengths_[mesh_.face_edge(f, 0)], base_lengths_[mesh_.face_edge(f, 1)],
          base_lengths_[mesh_.face_edge(f, 2)]};
}

ValidationReport validate(const RawMetricMesh& raw) {
  ValidationReport report;
  const auto edge_faces = check_connectivity(raw.vertex_count, raw.faces, report.issues);

  std::map<EdgeKey, double> lengths;
  for (const auto& rec : raw.edge_lengths) {
    const EdgeKey key(rec.a, rec.b);
    if (rec.a >= rec.b) {
      report.issues.push_back(
          {ErrorCode::ParseError, edge_name(rec.a, rec.b), "edge record must have a < b"});
    }
    if (!edge_faces.contains(key)) {
      report.issues.push_back(
          {ErrorCode::ParseError, edge_name(key.a, key.b), "length given for a non-edge"});
      continue;
    }
    if (!lengths.emplace(key, rec.length).second) {
      report.issues.push_back(
          {ErrorCode::ParseError, edge_name(key.a, key.b), "edge length listed twice"});
    }
    if (!(rec.length > 0.0) || !std::isfinite(rec.length)) {
      report.issues.push_back({ErrorCode::NonPositiveLength, edge_name(key.a, key.b),
                               "length " + format_double(rec.length) + " is not positive"});
    }
  }
  for (const auto& [e, count] : edge_faces) {
    if (!lengths.contains(e)) {
      report.issues.push_back(
          {ErrorCode::MissingEdgeLength, edge_name(e.a, e.b), "no base length"});
    }
  }
  for (std::size_t f = 0; f < raw.faces.size(); ++f) {
    const Face& t = raw.faces[f];
    std::array<double, 3> l{};
    bool complete = true;
    for (int c = 0; c < 3; ++c) {
      const auto it = lengths.find(EdgeKey(t[(c + 1) % 3], t[(c + 2) % 3]));
      if (it == lengths.end() || !(it->second > 0.0)) {
        complete = false;
        break;
      }
      l[c] = it->second;
    }
    if (complete && !triangle_inequality_holds(l[0], l[1], l[2])) {
      report.issues.push_back({ErrorCode::DegenerateBaseMetric, face_name(f),
                               "base lengths (" + format_double(l[0]) + ", " +
                                   format_double(l[1]) + ", " + format_double(l[2]) +
                                   ") violate the triangle inequality"});
    }
  }
  return report;
}

ValidationReport validate(const MetricMesh& mesh) { return validate(to_raw(mesh)); }

RawMetricMesh to_raw(const MetricMesh& mesh) {
  RawMetricMesh raw;
  raw.geometry = mesh.geometry();
  raw.vertex_count = mesh.vertex_count();
  raw.faces = mesh.mesh().faces();
  const auto& edges = mesh.mesh().edges();
  raw.edge_lengths.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    raw.edge_lengths.push_back({edges[e].a, edges[e].b, mesh.base_lengths()[e]});
  }
  return raw;
}

namespace {

MetricMesh build_from_raw(const RawMetricMesh& raw) {
  throw_first(validate(raw));
  TriMesh tri = TriMesh::build(raw.vertex_count, raw.faces);
  std::vector<double> lengths(tri.edge_count());
  for (const auto& rec : raw.edge_lengths) lengths[*tri.find_edge(rec.a, rec.b)] = rec.length;
  return MetricMesh::build(std::move(tri), raw.geometry, std::move(lengths));
}

}  // namespace

RawMetricMesh parse_metric_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  RawMetricMesh raw;
  try {
    const std::string geometry = doc.at("geometry").get<std::string>();
    if (geometry == "euclidean") {
      raw.geometry = Geometry::Euclidean;
    } else if (geometry == "hyperbolic") {
      raw.geometry = Geometry::Hyperbolic;
    } else {
      throw Error(ErrorCode::ParseError, "unknown geometry '" + geometry + "'");
    }
    raw.vertex_count = doc.at("num_vertices").get<int>();
    for (const auto& f : doc.at("faces")) {
      if (!f.is_array() || f.size() != 3) throw Error(ErrorCode::ParseError, "face must have 3 indices");
      raw.faces.push_back({f[0].get<int>(), f[1].get<int>(), f[2].get<int>()});
    }
    for (const auto& rec : doc.at("edge_lengths")) {
      const auto& v = rec.at("v");
      if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::ParseError, "edge 'v' must have 2 indices");
      raw.edge_lengths.push_back({v[0].get<int>(), v[1].get<int>(), rec.at("l").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return raw;
}

RawMetricMesh parse_obj(std::string_view text) {
  std::vector<std::array<double, 3>> positions;
  std::vector<Face> faces;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    const auto where = "line " + std::to_string(line_no);
    if (tag == "v") {
      std::array<double, 3> p{};
      if (!(ls >> p[0] >> p[1] >> p[2])) throw Error(ErrorCode::ParseError, where + ": bad vertex");
      positions.push_back(p);
    } else if (tag == "f") {
      std::vector<int> idx;
      std::string tok;
      while (ls >> tok) {
        // "i", "i/t", "i//n", "i/t/n": only the position index matters.
        const auto slash = tok.find('/');
        const std::string head = tok.substr(0, slash);
        std::size_t used = 0;
        int value = 0;
        try {
          value = std::stoi(head, &used);
        } catch (const std::exception&) {
          throw Error(ErrorCode::ParseError, where + ": bad face index '" + tok + "'");
        }
        if (used != head.size() || value <= 0) {
          throw Error(ErrorCode::ParseError, where + ": bad face index '" + tok + "'");
        }
        idx.push_back(value - 1);
      }
      if (idx.size() != 3) {
        throw Error(ErrorCode::ParseError, where + ": only triangular faces are supported");
      }
      faces.push_back({idx[0], idx[1], idx[2]});
    }
    // vn, vt, o, g, s, usemtl, mtllib: ignored.
  }

  RawMetricMesh raw;
  raw.geometry = Geometry::Euclidean;
  raw.vertex_count = static_cast<int>(positions.size());
  raw.faces = faces;
  std::set<EdgeKey> edges;
  for (const Face& t : faces) {
    for (int c = 0; c < 3; ++c) {
      const int a = t[c];
      const int b = t[(c + 1) % 3];
      if (a < 0 || b < 0 || a >= raw.vertex_count || b >= raw.vertex_count) continue;
      edges.emplace(a, b);
    }
  }
  for (const EdgeKey& e : edges) {
    const auto& p = positions[e.a];
    const auto& q = positions[e.b];
    const double d = std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
    raw.edge_lengths.push_back({e.a, e.b, d});
  }
  return raw;
}

MetricMesh load_mesh(std::string_view bytes, MeshFormat format) {
  const RawMetricMesh raw =
      format == MeshFormat::MetricJson ? parse_metric_json(bytes) : parse_obj(bytes);
  return build_from_raw(raw);
}

MetricMesh load_mesh_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const bool is_obj = path.size() >= 4 && (path.ends_with(".obj") || path.ends_with(".OBJ"));
  return load_mesh(buf.str(), is_obj ? MeshFormat::Obj : MeshFormat::MetricJson);
}

std::string serialize_metric_json(const MetricMesh& mesh) {
  nlohmann::ordered_json doc;
  doc["geometry"] = std::string(to_string(mesh.geometry()));
  doc["num_vertices"] = mesh.vertex_count();
  auto faces = nlohmann::ordered_json::array();
  for (const Face& t : mesh.mesh().faces()) faces.push_back({t[0], t[1], t[2]});
  doc["faces"] = std::move(faces);
  auto lengths = nlohmann::ordered_json::array();
  const auto& edges = mesh.mesh().edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    nlohmann::ordered_json rec;
    rec["v"] = {edges[e].a, edges[e].b};
    rec["l"] = mesh.base_lengths()[e];
    lengths.push_back(std::move(rec));
  }
  doc["edge_lengths"] = std::move(lengths);
  return dump_json(doc) + "\n";
}

MetricMesh metric_from_positions(std::span<const std::array<double, 3>> positions,
                                 std::vector<Face> faces) {
  TriMesh tri = TriMesh::build(static_cast<int>(positions.size()), std::move(faces));
  std::vector<double> lengths;
  lengths.reserve(tri.edge_count());
  for (const EdgeKey& e : tri.edges()) {
    const auto& p = positions[e.a];
    const auto& q = positions[e.b];
    lengths.push_back(std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]));
  }
  return MetricMesh::build(std::move(tri), Geometry::Euclidean, std::move(lengths));
}

}  // namespace vscale
