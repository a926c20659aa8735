#include <gradlattice/job.hpp>

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace gradlattice {

namespace {

constexpr const char* kModule = "job";
using nlohmann::json;

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(kModule, "field '" + field + "' " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail(where, "must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items())
    if (!allowed.contains(k)) fail(where.empty() ? k : where + "." + k, "is not recognised");
}

double number(const json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_number()) fail(path + key, "must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path + key, "must be finite");
  return d;
}

std::string text(const json& j, const char* key, const std::string& path, std::string fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_string()) fail(path + key, "must be a string");
  return v.get<std::string>();
}

bool flag(const json& j, const char* key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_boolean()) fail(path + key, "must be true or false");
  return v.get<bool>();
}

template <std::size_t N>
std::array<double, N> numbers(const json& j, const char* key, const std::string& path, std::array<double, N> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != N) fail(path + key, "must be an array of " + std::to_string(N) + " numbers");
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) fail(path + key, "must contain numbers only");
    out[i] = v[i].get<double>();
  }
  return out;
}

Vec3 point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) fail(path, "must be an array of 3 numbers");
  Vec3 p;
  for (int i = 0; i < 3; ++i) {
    if (!v[i].is_number()) fail(path, "must contain numbers only");
    p[i] = v[i].get<double>();
  }
  return p;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(kModule, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(kModule, "failed writing '" + path.string() + "'");
}

std::string fmt(const char* format, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

}  // namespace

JobConfig parse_job(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(kModule, std::string("malformed JSON: ") + e.what());
  }
  only_keys(root, "", {"schema_version", "name", "shape", "voxel_size", "cell", "gradient", "channel", "surface",
                       "printability", "output"});
  if (!root.contains("schema_version")) fail("schema_version", "is required");
  if (!root["schema_version"].is_number_integer() || root["schema_version"].get<int>() != kJobSchemaVersion)
    fail("schema_version", "must be " + std::to_string(kJobSchemaVersion));

  JobConfig job;
  job.name = text(root, "name", "", job.name);
  job.voxel_size = number(root, "voxel_size", "", job.voxel_size);
  if (!(job.voxel_size > 0)) fail("voxel_size", "must be positive");
  if (root.contains("cell")) {
    if (!root["cell"].is_string()) fail("cell", "must be a string");
    job.cell = parse_cell_kind(root["cell"].get<std::string>());
  }

  if (root.contains("shape")) {
    const auto& s = root["shape"];
    only_keys(s, "shape", {"type", "path", "total_length", "fractions", "flexion_deg", "radii", "mesh_resolution"});
    const std::string type = text(s, "type", "shape.", "finger");
    if (type == "finger") {
      auto& f = job.finger;
      f.total_length = number(s, "total_length", "shape.", f.total_length);
      f.fractions = numbers(s, "fractions", "shape.", f.fractions);
      f.flexion_deg = numbers(s, "flexion_deg", "shape.", f.flexion_deg);
      f.radii = numbers(s, "radii", "shape.", f.radii);
      f.mesh_resolution = number(s, "mesh_resolution", "shape.", f.mesh_resolution);
    } else if (type == "stl") {
      job.use_finger = false;
      const std::string p = text(s, "path", "shape.", "");
      if (p.empty()) fail("shape.path", "is required for STL shapes");
      job.stl_path = std::filesystem::path(p).is_absolute() ? std::filesystem::path(p) : base_dir / p;
    } else {
      fail("shape.type", "must be \"finger\" or \"stl\"");
    }
  }

  if (root.contains("gradient")) {
    const auto& g = root["gradient"];
    only_keys(g, "gradient", {"mode", "radius", "r_min", "r_max", "planes"});
    auto& gs = job.gradient;
    const std::string mode = text(g, "mode", "gradient.", "finger_joints");
    if (mode == "constant") {
      gs.mode = GradientMode::constant;
      if (!g.contains("radius")) fail("gradient.radius", "is required for constant mode");
      gs.r_min = gs.r_max = number(g, "radius", "gradient.", 0);
    } else if (mode == "linear" || mode == "finger_joints") {
      gs.mode = mode == "linear" ? GradientMode::linear : GradientMode::finger_joints;
      gs.r_min = number(g, "r_min", "gradient.", gs.r_min);
      gs.r_max = number(g, "r_max", "gradient.", gs.r_max);
    } else {
      fail("gradient.mode", "must be \"constant\", \"linear\" or \"finger_joints\"");
    }
    if (gs.mode == GradientMode::linear) {
      if (!g.contains("planes") || !g["planes"].is_array() || g["planes"].empty())
        fail("gradient.planes", "must be a non-empty array for linear mode");
      for (std::size_t i = 0; i < g["planes"].size(); ++i) {
        const auto& pl = g["planes"][i];
        const std::string at = "gradient.planes[" + std::to_string(i) + "]";
        only_keys(pl, at, {"point", "normal", "radius"});
        if (!pl.contains("point") || !pl.contains("normal") || !pl.contains("radius"))
          fail(at, "needs point, normal and radius");
        gs.planes.push_back({point(pl["point"], at + ".point"), point(pl["normal"], at + ".normal"),
                             number(pl, "radius", at + ".", 0)});
      }
    }
  }
  if (!job.use_finger && job.gradient.mode == GradientMode::finger_joints)
    fail("gradient.mode", "finger_joints needs the finger shape");

  if (root.contains("channel")) {
    const auto& c = root["channel"];
    only_keys(c, "channel", {"enabled", "radius", "anchor", "path"});
    job.channel.enabled = flag(c, "enabled", "channel.", true);
    job.channel.radius = number(c, "radius", "channel.", job.channel.radius);
    if (!(job.channel.radius > 0)) fail("channel.radius", "must be positive");
    if (c.contains("anchor")) {
      const auto& a = c["anchor"];
      only_keys(a, "channel.anchor", {"bar_length", "bar_radius", "setback"});
      TAnchor t = job.finger.anchor;
      t.bar_length = number(a, "bar_length", "channel.anchor.", t.bar_length);
      t.bar_radius = number(a, "bar_radius", "channel.anchor.", t.bar_radius);
      t.setback = number(a, "setback", "channel.anchor.", t.setback);
      if (!(t.bar_length > 0) || t.bar_radius < 0 || t.setback < 0) fail("channel.anchor", "has invalid dimensions");
      job.channel.anchor = t;
    }
    if (c.contains("path")) {
      if (!c["path"].is_array()) fail("channel.path", "must be an array of points");
      for (std::size_t i = 0; i < c["path"].size(); ++i)
        job.channel.path.push_back(point(c["path"][i], "channel.path[" + std::to_string(i) + "]"));
      if (job.channel.path.size() < 2) fail("channel.path", "needs at least two points");
    }
  }
  if (!job.use_finger && job.channel.enabled && job.channel.path.empty()) job.channel.enabled = false;
  job.finger.channel_radius = job.channel.radius;
  if (job.channel.anchor) job.finger.anchor = *job.channel.anchor;

  if (root.contains("surface")) {
    const auto& s = root["surface"];
    only_keys(s, "surface", {"cell_size", "blend_radius"});
    if (s.contains("cell_size") && !s["cell_size"].is_null()) {
      job.march_cell_size = number(s, "cell_size", "surface.", 0);
      if (!(*job.march_cell_size > 0)) fail("surface.cell_size", "must be positive");
    }
    job.blend_radius = number(s, "blend_radius", "surface.", 0);
    if (job.blend_radius < 0) fail("surface.blend_radius", "must not be negative");
  }

  if (root.contains("printability")) {
    const auto& p = root["printability"];
    only_keys(p, "printability", {"min_radius", "min_gap", "override"});
    job.min_radius = number(p, "min_radius", "printability.", job.min_radius);
    job.min_gap = number(p, "min_gap", "printability.", job.min_gap);
    job.override_checks = flag(p, "override", "printability.", false);
    if (job.min_radius < 0 || job.min_gap < 0) fail("printability", "bounds must not be negative");
  }

  if (root.contains("output")) {
    const auto& o = root["output"];
    only_keys(o, "output", {"stl", "format", "report", "lattice", "occupancy", "sdf_grid"});
    job.stl_output = text(o, "stl", "output.", job.stl_output);
    const std::string format = text(o, "format", "output.", "binary");
    if (format == "binary") job.stl_format = StlFormat::binary;
    else if (format == "ascii") job.stl_format = StlFormat::ascii;
    else fail("output.format", "must be \"binary\" or \"ascii\"");
    job.report_output = text(o, "report", "output.", job.report_output);
    job.lattice_output = text(o, "lattice", "output.", "");
    job.occupancy_output = text(o, "occupancy", "output.", "");
    job.sdf_output = text(o, "sdf_grid", "output.", "");
  }
  return job;
}

JobConfig load_job(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(kModule, "cannot open job file '" + path.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return parse_job(s.str(), path.parent_path());
}

JobOutcome run_job(const JobConfig& job, const std::filesystem::path& out_dir, bool surface,
                   const std::function<void(const std::string&)>& log) {
  auto note = [&](const std::string& line) {
    if (log) log(line);
  };
  JobOutcome outcome;
  std::ostringstream report;
  report << "job: " << job.name << '\n';
  report << "cell: " << to_string(job.cell) << '\n';
  report << "voxel size: " << fmt("%.3f", job.voxel_size) << " mm\n";
  report << "radius range: " << fmt("%.3f", job.gradient.r_min) << " - " << fmt("%.3f", job.gradient.r_max)
         << " mm\n";

  auto output = [&](const std::string& name) {
    std::filesystem::create_directories(out_dir);
    const auto path = out_dir / name;
    outcome.written.push_back(path);
    return path;
  };
  auto finish = [&](JobStatus status) {
    outcome.status = status;
    outcome.report = report.str();
    if (!job.report_output.empty()) write_text(output(job.report_output), outcome.report);
    return outcome;
  };

  // Openness gate first, it needs no geometry.
  try {
    outcome.openness = max_open_radius(get_cell(job.cell), job.voxel_size, job.min_gap);
  } catch (const Error&) {
    // cell without hexagon/octagon openings: nothing to keep open
  }
  if (outcome.openness) {
    const auto& lim = *outcome.openness;
    report << "openness limit: " << fmt("%.4f", lim.radius_mm) << " mm (" << to_string(lim.governing)
           << " faces)\n";
    if (job.gradient.r_max > lim.radius_mm + kRadiusRounding) {
      report << "openness: REFUSED, r_max " << fmt("%.3f", job.gradient.r_max) << " mm exceeds the "
             << fmt("%.2f", lim.radius_mm) << " mm limit\n";
      note("r_max exceeds the openness limit of " + fmt("%.2f", lim.radius_mm) + " mm");
      if (!job.override_checks) return finish(JobStatus::openness_refused);
      report << "openness: overridden\n";
    }
  } else {
    report << "openness limit: none for this cell\n";
  }

  TriMesh shape_mesh;
  std::vector<Channel> channels;
  std::vector<ControlPlane> planes = job.gradient.planes;
  if (job.use_finger) {
    note("building finger shape");
    auto shape = make_finger_shape(job.finger);
    if (job.gradient.mode == GradientMode::finger_joints)
      planes = finger_joint_planes(shape, job.gradient.r_min, job.gradient.r_max);
    if (job.channel.enabled) {
      if (!job.channel.path.empty()) shape.channel.path = job.channel.path;
      channels.push_back(shape.channel);
    }
    shape_mesh = std::move(shape.mesh);
  } else {
    note("reading " + job.stl_path.string());
    shape_mesh = read_stl_file(job.stl_path);
    if (job.channel.enabled) channels.push_back({job.channel.path, job.channel.radius, job.channel.anchor});
  }
  report << "shape: " << shape_mesh.triangles.size() << " triangles, volume "
         << fmt("%.1f", signed_volume(shape_mesh)) << " mm^3\n";

  note("voxelizing");
  const SolidQuery solid(shape_mesh);
  outcome.grid = voxelize(solid, job.voxel_size);
  report << "grid: " << outcome.grid.dims.x() << " x " << outcome.grid.dims.y() << " x " << outcome.grid.dims.z()
         << ", " << outcome.grid.occupied_count() << " occupied\n";

  note("populating lattice");
  const auto raw = populate(outcome.grid, get_cell(job.cell));
  const auto trimmed = trim_to_solid(raw, solid);
  const RadiusField field = job.gradient.mode == GradientMode::constant
                                ? RadiusField::constant(job.gradient.r_min)
                                : RadiusField::linear(planes, job.gradient.r_min, job.gradient.r_max);
  outcome.lattice = apply_radius_field(trimmed, field);
  report << "lattice: " << outcome.lattice.nodes.size() << " nodes, " << outcome.lattice.struts.size()
         << " struts (" << raw.struts.size() - trimmed.struts.size() << " trimmed)\n";
  if (field.mode() == RadiusField::Mode::linear_between_planes) {
    report << "gradient planes:\n";
    for (const auto& pl : field.planes())
      report << "  point " << fmt("%.3f", pl.point.x()) << ' ' << fmt("%.3f", pl.point.y()) << ' '
             << fmt("%.3f", pl.point.z()) << "  normal " << fmt("%.4f", pl.normal.x()) << ' '
             << fmt("%.4f", pl.normal.y()) << ' ' << fmt("%.4f", pl.normal.z()) << "  radius "
             << fmt("%.3f", pl.radius) << '\n';
  }

  if (!job.lattice_output.empty()) {
    std::ostringstream s;
    write_lattice(s, outcome.lattice);
    write_text(output(job.lattice_output), s.str());
  }
  if (!job.occupancy_output.empty()) {
    std::ostringstream s;
    write_occupancy(s, outcome.grid);
    write_text(output(job.occupancy_output), s.str());
  }

  note("checking printability");
  outcome.printability = validate_printability(outcome.lattice, job.min_radius, job.min_gap);
  report << outcome.printability.summary();
  if (!outcome.printability.pass) {
    if (!job.override_checks) return finish(JobStatus::printability_failed);
    report << "printability: overridden\n";
  }

  if (surface) {
    const SdfScene scene(outcome.lattice, job.blend_radius, channels);
    const double h = job.march_cell_size.value_or(default_cell_size(scene));
    note("surfacing at " + fmt("%.3f", h) + " mm");
    outcome.mesh = march(scene, h);
    const bool closed = is_watertight(outcome.mesh);
    report << "surface: cell " << fmt("%.3f", h) << " mm, " << outcome.mesh.triangles.size() << " triangles, "
           << (closed ? "watertight" : "NOT watertight") << ", volume " << fmt("%.1f", signed_volume(outcome.mesh))
           << " mm^3\n";
    if (!job.sdf_output.empty()) {
      std::ofstream out(output(job.sdf_output), std::ios::binary);
      if (!out) throw Error(kModule, "cannot write '" + job.sdf_output + "'");
      write_sdf_grid(out, scene, scene.bounds(), h);
    }
    if (!job.stl_output.empty()) {
      note("writing " + job.stl_output);
      write_stl_file(output(job.stl_output), outcome.mesh, job.stl_format);
    }
  }
  return finish(JobStatus::ok);
}

}  // namespace gradlattice
