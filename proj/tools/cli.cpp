#include "cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vscale/energy.hpp"
#include "vscale/json_format.hpp"
#include "vscale/mesh.hpp"
#include "vscale/solver.hpp"
#include "vscale/triangle.hpp"

namespace vscale::cli {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  if (!std::filesystem::exists(path)) throw UsageError("no such file: " + path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

MeshFormat format_for(const std::string& path) {
  const auto ext = std::filesystem::path(path).extension().string();
  return ext == ".obj" || ext == ".OBJ" ? MeshFormat::Obj : MeshFormat::MetricJson;
}

std::vector<double> read_vector_file(const std::string& path, const char* key) {
  const std::string text = read_file(path);
  try {
    const auto doc = nlohmann::json::parse(text);
    return doc.at(key).get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

ConformalFactor load_factors(const MetricMesh& mesh, const std::string& path) {
  if (path.empty()) return ConformalFactor::zeros(mesh.vertex_count());
  ConformalFactor u(read_vector_file(path, "u"));
  if (u.size() != static_cast<std::size_t>(mesh.vertex_count())) {
    throw Error(ErrorCode::SizeMismatch, path + ": expected " +
                                             std::to_string(mesh.vertex_count()) + " factors");
  }
  return u;
}

Json vec_json(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

Json vec_json(const Vec3& v) { return vec_json(std::span<const double>(v)); }

std::string region_name(const RegionClass& r) {
  return r.is_degenerate() ? "degenerate_" + std::to_string(r.apex) : "nondegenerate";
}

Json issue_json(const ValidationIssue& issue) {
  Json j;
  j["code"] = std::string(to_string(issue.code));
  j["location"] = issue.location;
  j["message"] = issue.message;
  return j;
}

struct Options {
  std::string mesh_path;
  std::string factors_path;
  std::string target_path;
  std::string start_path;
  bool global = false;
  double tol = 1e-10;
  int max_iter = 100;
  double quad_tol = 1e-10;
  int quad_depth = 40;
  double damping = 1e-8;
  double shrink = 0.5;
  int samples = 20;
  std::uint64_t seed = 1;
  double amplitude = 0.5;
};

QuadratureConfig quad_config(const Options& o) {
  return QuadratureConfig{o.quad_tol, o.quad_depth};
}

SolverConfig solver_config(const Options& o) {
  SolverConfig c;
  c.tolerance = o.tol;
  c.max_iterations = o.max_iter;
  c.initial_damping = o.damping;
  c.shrink = o.shrink;
  c.quadrature = quad_config(o);
  return c;
}

MetricMesh load_mesh_arg(const Options& o) {
  return load_mesh(read_file(o.mesh_path), format_for(o.mesh_path));
}

int cmd_check(const Options& o, std::ostream& out) {
  const std::string bytes = read_file(o.mesh_path);
  const MeshFormat format = format_for(o.mesh_path);
  const RawMetricMesh raw = format == MeshFormat::Obj ? parse_obj(bytes) : parse_metric_json(bytes);
  const ValidationReport report = validate(raw);

  Json doc;
  doc["valid"] = report.ok();
  Json issues = Json::array();
  for (const auto& issue : report.issues) issues.push_back(issue_json(issue));
  doc["issues"] = std::move(issues);
  if (!report.ok()) {
    out << dump_json(doc) << '\n';
    return kValidationFailure;
  }

  const MetricMesh mesh = load_mesh(bytes, format);
  const ConformalFactor u = load_factors(mesh, o.factors_path);
  doc["geometry"] = std::string(to_string(mesh.geometry()));
  doc["num_vertices"] = mesh.vertex_count();
  doc["num_edges"] = mesh.mesh().edge_count();
  doc["num_faces"] = mesh.face_count();
  doc["euler_characteristic"] = euler_characteristic(mesh.mesh());
  Json faces = Json::array();
  bool all_nondegenerate = true;
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const TriangleConformalState st = evaluate(face_input(mesh, f, u));
    Json jf;
    jf["face"] = f;
    const Face& t = mesh.mesh().faces()[f];
    jf["vertices"] = {t[0], t[1], t[2]};
    jf["q"] = st.q;
    jf["h"] = vec_json(st.h);
    jf["region"] = region_name(st.region);
    all_nondegenerate = all_nondegenerate && !st.region.is_degenerate();
    faces.push_back(std::move(jf));
  }
  doc["all_nondegenerate"] = all_nondegenerate;
  doc["faces"] = std::move(faces);
  out << dump_json(doc) << '\n';
  return kSuccess;
}

int cmd_angles(const Options& o, std::ostream& out) {
  const MetricMesh mesh = load_mesh_arg(o);
  const ConformalFactor u = load_factors(mesh, o.factors_path);
  Json faces = Json::array();
  for (std::size_t f = 0; f < mesh.face_count(); ++f) {
    const TriangleConformalState st = evaluate(face_input(mesh, f, u));
    Json jf;
    jf["face"] = f;
    jf["region"] = region_name(st.region);
    jf["lengths"] = vec_json(st.lengths);
    jf["angles"] = st.angles ? vec_json(*st.angles) : Json(nullptr);
    jf["extended_angles"] = vec_json(st.extended_angles);
    faces.push_back(std::move(jf));
  }
  Json doc;
  doc["faces"] = std::move(faces);
  out << dump_json(doc) << '\n';
  return kSuccess;
}

Json gauss_bonnet_json(const MetricMesh& mesh, const ConformalFactor& u) {
  Json gb;
  try {
    const GaussBonnetCheck check = gauss_bonnet_check(mesh, u);
    gb["lhs"] = check.lhs;
    gb["rhs"] = check.rhs;
    gb["pass"] = check.pass;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateFace) throw;
    gb["lhs"] = nullptr;
    gb["rhs"] = nullptr;
    gb["pass"] = nullptr;
    gb["skipped"] = e.what();
  }
  return gb;
}

int cmd_curvature(const Options& o, std::ostream& out) {
  const MetricMesh mesh = load_mesh_arg(o);
  const ConformalFactor u = load_factors(mesh, o.factors_path);
  const CurvatureVector k = curvature(mesh, u);
  Json doc;
  doc["K"] = vec_json(k.k);
  doc["gauss_bonnet"] = gauss_bonnet_json(mesh, u);
  out << dump_json(doc) << '\n';
  const auto& gb = doc["gauss_bonnet"]["pass"];
  return gb.is_boolean() && !gb.get<bool>() ? kValidationFailure : kSuccess;
}

int cmd_jacobian(const Options& o, std::ostream& out) {
  const MetricMesh mesh = load_mesh_arg(o);
  const ConformalFactor u = load_factors(mesh, o.factors_path);
  Json doc;
  if (o.global) {
    const CurvatureJacobian jac = curvature_jacobian(mesh, u);
    doc["size"] = mesh.vertex_count();
    Json entries = Json::array();
    for (int col = 0; col < jac.matrix.outerSize(); ++col) {
      for (SparseHessian::InnerIterator it(jac.matrix, col); it; ++it) {
        Json e;
        e["row"] = it.row();
        e["col"] = it.col();
        e["value"] = it.value();
        entries.push_back(std::move(e));
      }
    }
    doc["entries"] = std::move(entries);
    Json degenerate = Json::array();
    for (auto f : jac.degenerate_faces) degenerate.push_back(f);
    doc["degenerate_faces"] = std::move(degenerate);
  } else {
    Json faces = Json::array();
    for (std::size_t f = 0; f < mesh.face_count(); ++f) {
      const TriangleInput in = face_input(mesh, f, u);
      const RegionClass region = classify(in);
      Json jf;
      jf["face"] = f;
      jf["region"] = region_name(region);
      if (region.is_degenerate()) {
        jf["jacobian"] = nullptr;
      } else {
        const Eigen::Matrix3d m = angle_jacobian(in).m;
        Json rows = Json::array();
        for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
        jf["jacobian"] = std::move(rows);
      }
      faces.push_back(std::move(jf));
    }
    doc["faces"] = std::move(faces);
  }
  out << dump_json(doc) << '\n';
  return kSuccess;
}

int cmd_energy(const Options& o, std::ostream& out) {
  const MetricMesh mesh = load_mesh_arg(o);
  const ConformalFactor u = load_factors(mesh, o.factors_path);
  Json doc;
  doc["energy"] = global_energy(mesh, u, quad_config(o));
  out << dump_json(doc) << '\n';
  return kSuccess;
}

Json solve_result_json(const SolveResult& r) {
  Json doc;
  doc["converged"] = r.converged;
  doc["iterations"] = r.iterations;
  doc["u"] = vec_json(r.u.u);
  doc["residual_history"] = vec_json(r.residual_history);
  doc["objective_history"] = vec_json(r.objective_history);
  Json degenerate = Json::array();
  for (auto f : r.degenerate_faces_at_solution) degenerate.push_back(f);
  doc["degenerate_faces_at_solution"] = std::move(degenerate);
  doc["normalization"] = std::string(to_string(r.normalization));
  return doc;
}

int cmd_solve(const Options& o, std::ostream& out, std::ostream& err) {
  const MetricMesh mesh = load_mesh_arg(o);
  const CurvatureVector target(read_vector_file(o.target_path, "K"));
  std::optional<ConformalFactor> start;
  if (!o.start_path.empty()) start = load_factors(mesh, o.start_path);
  const SolveResult r = solve_prescribed_curvature(mesh, target, solver_config(o), start);
  out << dump_json(solve_result_json(r)) << '\n';
  if (!r.converged) {
    err << "solve: not converged after " << r.iterations << " iterations (residual "
        << format_double(r.residual_history.back()) << ")\n";
    return kNotConverged;
  }
  if (!r.degenerate_faces_at_solution.empty()) {
    err << "solve: " << r.degenerate_faces_at_solution.size()
        << " face(s) degenerate at the solution; the target is met by the extended curvature only\n";
  }
  return kSuccess;
}

int cmd_rigidity_test(const Options& o, std::ostream& out) {
  const MetricMesh mesh = load_mesh_arg(o);
  const bool euclidean = mesh.geometry() == Geometry::Euclidean;
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> dist(-o.amplitude, o.amplitude);
  const SolverConfig config = solver_config(o);
  const auto n = static_cast<std::size_t>(mesh.vertex_count());

  const auto draw = [&] {
    ConformalFactor u{std::vector<double>(n)};
    for (double& x : u.u) x = dist(rng);
    if (euclidean) {
      double mean = 0.0;
      for (double x : u.u) mean += x / static_cast<double>(n);
      for (double& x : u.u) x -= mean;
    }
    return u;
  };

  int passed = 0;
  int not_converged = 0;
  int mismatched = 0;
  int max_iterations = 0;
  double max_error = 0.0;
  Json failures = Json::array();
  for (int s = 0; s < o.samples; ++s) {
    const ConformalFactor truth = draw();
    const CurvatureVector target = curvature(mesh, truth);
    const ConformalFactor second_start = draw();
    bool ok = true;
    for (const auto& start : {ConformalFactor::zeros(mesh.vertex_count()), second_start}) {
      const SolveResult r = solve_prescribed_curvature(mesh, target, config, start);
      max_iterations = std::max(max_iterations, r.iterations);
      if (!r.converged) {
        ++not_converged;
        ok = false;
        continue;
      }
      const RigidityVerdict v = rigidity_check(mesh, r.u, truth, 1e-9);
      max_error = std::max(max_error, v.factor_gap);
      if (!v.consistent || v.factor_gap > 1e-8) {
        ++mismatched;
        ok = false;
        Json fj;
        fj["sample"] = s;
        fj["factor_gap"] = v.factor_gap;
        failures.push_back(std::move(fj));
      }
    }
    passed += ok ? 1 : 0;
  }
  Json doc;
  doc["samples"] = o.samples;
  doc["seed"] = o.seed;
  doc["passed"] = passed;
  doc["not_converged"] = not_converged;
  doc["mismatched"] = mismatched;
  doc["max_factor_error"] = max_error;
  doc["max_iterations"] = max_iterations;
  doc["failures"] = std::move(failures);
  out << dump_json(doc) << '\n';
  if (not_converged > 0) return kNotConverged;
  return mismatched > 0 ? kValidationFailure : kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Vertex scaling of discrete metrics on closed triangulated surfaces", "vscale"};
  app.require_subcommand(1);
  Options o;

  const auto add_mesh = [&](CLI::App* sub) {
    sub->add_option("mesh", o.mesh_path, "MetricJson (.json) or OBJ (.obj) mesh")->required();
  };
  const auto add_factors = [&](CLI::App* sub) {
    sub->add_option("--factors", o.factors_path, "JSON file {\"u\": [...]}; default all zero");
  };
  const auto add_quad = [&](CLI::App* sub) {
    sub->add_option("--quad-tol", o.quad_tol, "absolute quadrature tolerance")
        ->check(CLI::PositiveNumber);
    sub->add_option("--quad-depth", o.quad_depth, "maximum quadrature subdivision depth")
        ->check(CLI::NonNegativeNumber);
  };
  const auto add_solver = [&](CLI::App* sub) {
    sub->add_option("--tol", o.tol, "curvature residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--max-iter", o.max_iter, "maximum Newton iterations")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--damping", o.damping, "initial Newton damping")->check(CLI::PositiveNumber);
    sub->add_option("--shrink", o.shrink, "line-search shrink factor")
        ->check(CLI::Range(1e-6, 0.999999));
    add_quad(sub);
  };

  auto* check = app.add_subcommand("check", "validate and classify every face");
  add_mesh(check);
  add_factors(check);
  auto* angles_cmd = app.add_subcommand("angles", "per-face angles and extended angles");
  add_mesh(angles_cmd);
  add_factors(angles_cmd);
  auto* curvature_cmd = app.add_subcommand("curvature", "per-vertex curvature and Gauss-Bonnet");
  add_mesh(curvature_cmd);
  add_factors(curvature_cmd);
  auto* jacobian_cmd = app.add_subcommand("jacobian", "angle Jacobians or assembled Hessian");
  add_mesh(jacobian_cmd);
  add_factors(jacobian_cmd);
  jacobian_cmd->add_flag("--global", o.global, "assemble the sparse curvature Jacobian");
  auto* energy_cmd = app.add_subcommand("energy", "value of the convex energy");
  add_mesh(energy_cmd);
  add_factors(energy_cmd);
  add_quad(energy_cmd);
  auto* solve_cmd = app.add_subcommand("solve", "solve for prescribed curvature");
  add_mesh(solve_cmd);
  solve_cmd->add_option("--target", o.target_path, "JSON file {\"K\": [...]}")->required();
  solve_cmd->add_option("--start", o.start_path, "starting factors {\"u\": [...]}");
  add_solver(solve_cmd);
  auto* rigidity_cmd = app.add_subcommand("rigidity-test", "randomized solve round trips");
  add_mesh(rigidity_cmd);
  rigidity_cmd->add_option("--samples", o.samples, "number of random targets")
      ->check(CLI::PositiveNumber);
  rigidity_cmd->add_option("--seed", o.seed, "random seed");
  rigidity_cmd->add_option("--amplitude", o.amplitude, "factors drawn from [-a, a]")
      ->check(CLI::PositiveNumber);
  add_solver(rigidity_cmd);

  std::vector<const char*> argv{"vscale"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kUsageError;
  }

  try {
    if (check->parsed()) return cmd_check(o, out);
    if (angles_cmd->parsed()) return cmd_angles(o, out);
    if (curvature_cmd->parsed()) return cmd_curvature(o, out);
    if (jacobian_cmd->parsed()) return cmd_jacobian(o, out);
    if (energy_cmd->parsed()) return cmd_energy(o, out);
    if (solve_cmd->parsed()) return cmd_solve(o, out, err);
    if (rigidity_cmd->parsed()) return cmd_rigidity_test(o, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsageError;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailure;
  }
  return kUsageError;
}

}  // namespace vscale::cli
