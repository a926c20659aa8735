#include <gradlattice/beam.hpp>
#include <gradlattice/parallel.hpp>

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <queue>
#include <sstream>

namespace gradlattice {

namespace {

constexpr const char* kModule = "beam-sim";
constexpr double kPaPerMPa = 1e6;

using Mat12 = Eigen::Matrix<double, 12, 12>;

struct Section {
  double A, I, J;
};

Section section(double r) {
  const double pi = std::numbers::pi;
  return {pi * r * r, pi * std::pow(r, 4) / 4.0, pi * std::pow(r, 4) / 2.0};
}

Mat12 local_stiffness(double L, double r, double E, double G) {
  const Section s = section(r);
  const double EA = E * s.A / L;
  const double GJ = G * s.J / L;
  const double b12 = 12 * E * s.I / (L * L * L);
  const double b6 = 6 * E * s.I / (L * L);
  const double b4 = 4 * E * s.I / L;
  const double b2 = 2 * E * s.I / L;

  Mat12 k = Mat12::Zero();
  k(0, 0) = k(6, 6) = EA;
  k(0, 6) = -EA;
  k(3, 3) = k(9, 9) = GJ;
  k(3, 9) = -GJ;
  // xy plane: v, theta_z
  k(1, 1) = k(7, 7) = b12;
  k(1, 7) = -b12;
  k(1, 5) = k(1, 11) = b6;
  k(5, 7) = k(7, 11) = -b6;
  k(5, 5) = k(11, 11) = b4;
  k(5, 11) = b2;
  // xz plane: w, theta_y
  k(2, 2) = k(8, 8) = b12;
  k(2, 8) = -b12;
  k(2, 4) = k(2, 10) = -b6;
  k(4, 8) = k(8, 10) = b6;
  k(4, 4) = k(10, 10) = b4;
  k(4, 10) = b2;
  return k.selfadjointView<Eigen::Upper>();
}

Mat12 rotation(const Vec3& a, const Vec3& b) {
  const Vec3 ex = (b - a).normalized();
  const Vec3 ref = std::abs(ex.z()) >= 0.9 ? Vec3::UnitY() : Vec3::UnitZ();
  const Vec3 ey = ref.cross(ex).normalized();
  const Vec3 ez = ex.cross(ey);
  Eigen::Matrix3d R;
  R.row(0) = ex;
  R.row(1) = ey;
  R.row(2) = ez;
  Mat12 T = Mat12::Zero();
  for (int q = 0; q < 4; ++q) T.block<3, 3>(3 * q, 3 * q) = R;
  return T;
}

// Material constants in N/mm^2.
std::pair<double, double> moduli(const MaterialProps& mat) {
  return {mat.youngs_modulus / kPaPerMPa, mat.shear_modulus() / kPaPerMPa};
}

Eigen::Matrix<double, 12, 1> gather(const Eigen::VectorXd& u, const Strut& s) {
  Eigen::Matrix<double, 12, 1> ue;
  ue << u.segment<6>(6 * s.a), u.segment<6>(6 * s.b);
  return ue;
}

}  // namespace

void MaterialProps::validate() const {
  if (!(youngs_modulus > 0)) throw Error(kModule, "Young's modulus must be positive");
  if (!(poissons_ratio >= 0 && poissons_ratio < 0.5))
    throw Error(kModule, "Poisson's ratio must lie in [0, 0.5)");
  if (!(density > 0)) throw Error(kModule, "density must be positive");
}

std::string_view to_string(LoadKind kind) {
  switch (kind) {
    case LoadKind::bending: return "bending";
    case LoadKind::torsion: return "torsion";
    case LoadKind::compression: return "compression";
  }
  return "?";
}

LoadKind parse_load_kind(std::string_view name) {
  for (auto k : {LoadKind::bending, LoadKind::torsion, LoadKind::compression})
    if (name == to_string(k)) return k;
  throw Error(kModule, "unknown load case '" + std::string(name) + "'");
}

LatticeGraph build_block(const UnitCell& cell, int n, double voxel_size, double radius) {
  if (n < 1) throw Error(kModule, "block size must be at least 1");
  if (!(voxel_size > 0)) throw Error(kModule, "voxel size must be positive");
  if (!(radius > 0)) throw Error(kModule, "strut radius must be positive");
  VoxelGrid grid(Vec3::Zero(), voxel_size, Vec3i::Constant(n));
  std::fill(grid.occupancy.begin(), grid.occupancy.end(), 1);
  return with_uniform_radius(populate(grid, cell), radius);
}

Mat12 element_stiffness(const Vec3& a, const Vec3& b, double radius, const MaterialProps& mat) {
  const double L = (b - a).norm();
  if (!(L > 0)) throw Error(kModule, "zero-length strut");
  const auto [E, G] = moduli(mat);
  const Mat12 T = rotation(a, b);
  return T.transpose() * local_stiffness(L, radius, E, G) * T;
}

Eigen::SparseMatrix<double> stiffness_matrix(const LatticeGraph& graph, const MaterialProps& mat) {
  mat.validate();
  const auto& struts = graph.struts;
  std::vector<Mat12> ke(struts.size());
  parallel_for(struts.size(), [&](std::size_t e) {
    ke[e] = element_stiffness(graph.nodes[struts[e].a], graph.nodes[struts[e].b], struts[e].radius, mat);
  });
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(struts.size() * 144);
  for (std::size_t e = 0; e < struts.size(); ++e) {
    const int base[2] = {6 * struts[e].a, 6 * struts[e].b};
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        triplets.emplace_back(base[i / 6] + i % 6, base[j / 6] + j % 6, ke[e](i, j));
  }
  const int n = static_cast<int>(6 * graph.nodes.size());
  Eigen::SparseMatrix<double> K(n, n);
  K.setFromTriplets(triplets.begin(), triplets.end());
  return K;
}

FrameResult solve_frame(const LatticeGraph& graph, const MaterialProps& mat,
                        std::span<const int> clamped, const Eigen::VectorXd& loads) {
  mat.validate();
  const int nn = static_cast<int>(graph.nodes.size());
  if (loads.size() != 6 * nn) throw Error(kModule, "load vector size does not match the frame");
  if (clamped.empty()) throw Error(kModule, "singular system (no clamped nodes)", ErrorKind::numerical);
  for (const auto& s : graph.struts)
    if (!(s.radius > 0)) throw Error(kModule, "strut radius must be positive");

  // Every node must reach a clamp through struts.
  std::vector<std::vector<int>> adj(nn);
  for (const auto& s : graph.struts) {
    adj[s.a].push_back(s.b);
    adj[s.b].push_back(s.a);
  }
  std::vector<char> fixed(nn, 0), seen(nn, 0);
  std::queue<int> queue;
  for (int c : clamped) {
    if (c < 0 || c >= nn) throw Error(kModule, "clamped node index out of range");
    fixed[c] = 1;
    if (!seen[c]) {
      seen[c] = 1;
      queue.push(c);
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        queue.push(w);
      }
  }
  for (int v = 0; v < nn; ++v)
    if (!seen[v])
      throw Error(kModule, "singular system (floating substructure at node " + std::to_string(v) + ")",
                  ErrorKind::numerical);

  const Eigen::SparseMatrix<double> K = stiffness_matrix(graph, mat);
  std::vector<int> reduced(6 * nn, -1);
  int free = 0;
  for (int v = 0; v < nn; ++v)
    if (!fixed[v])
      for (int d = 0; d < 6; ++d) reduced[6 * v + d] = free++;

  FrameResult result;
  result.displacements = Eigen::VectorXd::Zero(6 * nn);
  if (free > 0) {
    std::vector<Eigen::Triplet<double>> triplets;
    for (int col = 0; col < K.outerSize(); ++col)
      for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
        const int r = reduced[it.row()];
        const int c = reduced[it.col()];
        if (r >= 0 && c >= 0) triplets.emplace_back(r, c, it.value());
      }
    Eigen::SparseMatrix<double> Kr(free, free);
    Kr.setFromTriplets(triplets.begin(), triplets.end());
    Eigen::VectorXd fr(free);
    for (int i = 0; i < 6 * nn; ++i)
      if (reduced[i] >= 0) fr[reduced[i]] = loads[i];

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(Kr);
    if (llt.info() != Eigen::Success)
      throw Error(kModule, "stiffness matrix not positive definite after clamping", ErrorKind::numerical);
    const Eigen::VectorXd ur = llt.solve(fr);
    if (llt.info() != Eigen::Success || !ur.allFinite())
      throw Error(kModule, "solve failed", ErrorKind::numerical);
    for (int i = 0; i < 6 * nn; ++i)
      if (reduced[i] >= 0) result.displacements[i] = ur[reduced[i]];
  }

  const Eigen::VectorXd& u = result.displacements;
  result.external_work = 0.5 * loads.dot(u);
  result.strain_energy = 0.5 * u.dot(K * u);
  for (int v = 0; v < nn; ++v) result.max_displacement = std::max(result.max_displacement, result.translation(v).norm());

  const auto [E, G] = moduli(mat);
  result.element_stress.resize(graph.struts.size());
  for (std::size_t e = 0; e < graph.struts.size(); ++e) {
    const Strut& s = graph.struts[e];
    const Vec3& a = graph.nodes[s.a];
    const Vec3& b = graph.nodes[s.b];
    const Section sec = section(s.radius);
    const Eigen::Matrix<double, 12, 1> f =
        local_stiffness((b - a).norm(), s.radius, E, G) * (rotation(a, b) * gather(u, s));
    const double axial = std::abs(f[6]);
    const double moment = std::max(std::hypot(f[4], f[5]), std::hypot(f[10], f[11]));
    result.element_stress[e] = (axial / sec.A + moment * s.radius / sec.I) * kPaPerMPa;
  }
  if (!result.element_stress.empty()) {
    double sum = 0;
    for (double st : result.element_stress) sum += st;
    result.avg_stress = sum / static_cast<double>(result.element_stress.size());
  }
  return result;
}

std::vector<int> face_nodes(const LatticeGraph& graph, int axis, bool max_side, double tol) {
  if (graph.nodes.empty()) return {};
  double extreme = graph.nodes[0][axis];
  for (const auto& p : graph.nodes) extreme = max_side ? std::max(extreme, p[axis]) : std::min(extreme, p[axis]);
  std::vector<int> out;
  for (std::size_t v = 0; v < graph.nodes.size(); ++v)
    if (std::abs(graph.nodes[v][axis] - extreme) <= tol) out.push_back(static_cast<int>(v));
  return out;
}

Eigen::VectorXd load_vector(const LatticeGraph& graph, const LoadCase& load) {
  if (!(load.magnitude > 0)) throw Error(kModule, "load magnitude must be positive");
  Eigen::VectorXd f = Eigen::VectorXd::Zero(6 * static_cast<Eigen::Index>(graph.nodes.size()));
  const auto top = face_nodes(graph, 2, true);
  if (top.empty()) throw Error(kModule, "no loaded nodes");
  const double share = load.magnitude / static_cast<double>(top.size());
  switch (load.kind) {
    case LoadKind::bending:
      for (int v : top) f[6 * v + 0] += share;
      break;
    case LoadKind::compression:
      for (int v : top) f[6 * v + 2] -= share;
      break;
    case LoadKind::torsion:
      if (load.torsion == TorsionMode::nodal_moments) {
        for (int v : top) f[6 * v + 5] += share;
      } else {
        double xmin = graph.nodes[top[0]].x(), xmax = xmin;
        for (int v : top) {
          xmin = std::min(xmin, graph.nodes[v].x());
          xmax = std::max(xmax, graph.nodes[v].x());
        }
        if (!(xmax - xmin > 1e-9)) throw Error(kModule, "torsion couple needs a top face with x extent");
        std::vector<int> lo, hi;
        for (int v : top) {
          if (std::abs(graph.nodes[v].x() - xmin) <= 1e-6) lo.push_back(v);
          if (std::abs(graph.nodes[v].x() - xmax) <= 1e-6) hi.push_back(v);
        }
        // Opposing y forces whose couple equals the requested moment.
        const double force = load.magnitude / (xmax - xmin);
        for (int v : hi) f[6 * v + 1] += force / static_cast<double>(hi.size());
        for (int v : lo) f[6 * v + 1] -= force / static_cast<double>(lo.size());
      }
      break;
  }
  return f;
}

FrameResult assemble_and_solve(const LatticeGraph& graph, const MaterialProps& mat, const LoadCase& load) {
  const auto base = face_nodes(graph, 2, false);
  return solve_frame(graph, mat, base, load_vector(graph, load));
}

LatticeGraph split_struts(const LatticeGraph& graph) {
  LatticeGraph out;
  out.nodes = graph.nodes;
  for (const auto& s : graph.struts) {
    const int mid = static_cast<int>(out.nodes.size());
    out.nodes.push_back(graph.midpoint(s));
    out.struts.push_back({s.a, mid, s.radius});
    out.struts.push_back({mid, s.b, s.radius});
  }
  return out;
}

// --- campaign -----------------------------------------------------------------

std::vector<CampaignRow> run_campaign(const CampaignOptions& opt) {
  opt.material.validate();
  if (!(opt.radius > 0)) throw Error(kModule, "strut radius must be positive");
  if (opt.n < 1) throw Error(kModule, "block size must be at least 1");
  const std::array<LoadKind, 3> kinds{LoadKind::bending, LoadKind::torsion, LoadKind::compression};
  std::vector<CampaignRow> rows;
  for (auto cell : opt.cells)
    for (auto kind : kinds) {
      CampaignRow row;
      row.cell = cell;
      row.kind = kind;
      rows.push_back(row);
    }

  parallel_for(rows.size(), [&](std::size_t i) {
    CampaignRow& row = rows[i];
    try {
      const auto graph = build_block(get_cell(row.cell), opt.n, opt.voxel_size, opt.radius);
      LoadCase load{row.kind, 1.0, opt.torsion};
      load.magnitude = row.kind == LoadKind::bending   ? opt.bending_load
                       : row.kind == LoadKind::torsion ? opt.torsion_load
                                                       : opt.compression_load;
      const auto r = assemble_and_solve(graph, opt.material, load);
      row.max_displacement = r.max_displacement;
      row.avg_stress = r.avg_stress;
      row.external_work = r.external_work;
      row.strain_energy = r.strain_energy;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  });

  for (auto kind : kinds) {
    std::vector<CampaignRow*> group;
    for (auto& r : rows)
      if (r.kind == kind && !r.error) group.push_back(&r);
    auto rank = [&](auto key, int CampaignRow::*slot) {
      auto sorted = group;
      std::stable_sort(sorted.begin(), sorted.end(),
                       [&](const CampaignRow* a, const CampaignRow* b) { return key(*a) > key(*b); });
      for (std::size_t i = 0; i < sorted.size(); ++i) sorted[i]->*slot = static_cast<int>(i) + 1;
    };
    rank([](const CampaignRow& r) { return r.max_displacement; }, &CampaignRow::displacement_rank);
    rank([](const CampaignRow& r) { return r.avg_stress; }, &CampaignRow::stress_rank);
  }
  return rows;
}

std::string campaign_csv(const std::vector<CampaignRow>& rows) {
  std::ostringstream out;
  out << "cell,case,max_displacement_mm,avg_stress_Pa,displacement_rank,stress_rank\n";
  char line[256];
  for (const auto& r : rows) {
    if (r.error)
      std::snprintf(line, sizeof line, "%s,%s,nan,nan,0,0\n", std::string(to_string(r.cell)).c_str(),
                    std::string(to_string(r.kind)).c_str());
    else
      std::snprintf(line, sizeof line, "%s,%s,%.6e,%.6e,%d,%d\n", std::string(to_string(r.cell)).c_str(),
                    std::string(to_string(r.kind)).c_str(), r.max_displacement, r.avg_stress,
                    r.displacement_rank, r.stress_rank);
    out << line;
  }
  return out.str();
}

std::string campaign_table(const std::vector<CampaignRow>& rows) {
  std::vector<CellKind> cells;
  for (const auto& r : rows)
    if (std::find(cells.begin(), cells.end(), r.cell) == cells.end()) cells.push_back(r.cell);
  const std::array<LoadKind, 3> kinds{LoadKind::bending, LoadKind::torsion, LoadKind::compression};

  std::ostringstream out;
  char buf[64];
  out << "               average stress (Pa)                  maximum displacement (mm)\n";
  out << "cell           bending     torsion     compression  bending     torsion     compression\n";
  for (auto cell : cells) {
    std::snprintf(buf, sizeof buf, "%-13s", std::string(to_string(cell)).c_str());
    out << buf;
    for (int pass = 0; pass < 2; ++pass)
      for (auto kind : kinds) {
        auto it = std::find_if(rows.begin(), rows.end(),
                               [&](const CampaignRow& r) { return r.cell == cell && r.kind == kind; });
        if (it == rows.end() || it->error)
          std::snprintf(buf, sizeof buf, "  %-10s", "error");
        else
          std::snprintf(buf, sizeof buf, "  %-10.3e", pass == 0 ? it->avg_stress : it->max_displacement);
        out << buf;
      }
    out << '\n';
  }
  for (const auto& r : rows)
    if (r.error) out << "error: " << to_string(r.cell) << ' ' << to_string(r.kind) << ": " << *r.error << '\n';
  return out.str();
}

double estimate_fingertip_stiffness(const LatticeGraph& graph, const MaterialProps& mat,
                                    std::span<const int> tip_nodes, std::span<const int> base_nodes,
                                    const Vec3& direction) {
  if (tip_nodes.empty() || base_nodes.empty()) throw Error(kModule, "tip and base node sets must be non-empty");
  if (!(direction.norm() > 0)) throw Error(kModule, "load direction must be non-zero");

  // Keep the part reachable from the base.
  const int nn = static_cast<int>(graph.nodes.size());
  std::vector<std::vector<int>> adj(nn);
  for (const auto& s : graph.struts) {
    adj[s.a].push_back(s.b);
    adj[s.b].push_back(s.a);
  }
  std::vector<char> seen(nn, 0);
  std::queue<int> queue;
  for (int b : base_nodes) {
    if (b < 0 || b >= nn) throw Error(kModule, "base node index out of range");
    if (!seen[b]) {
      seen[b] = 1;
      queue.push(b);
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop();
    for (int w : adj[v])
      if (!seen[w]) {
        seen[w] = 1;
        queue.push(w);
      }
  }
  std::vector<int> remap(nn, -1);
  LatticeGraph sub = filter_struts(graph, [&](std::size_t s) { return seen[graph.struts[s].a] != 0; });
  for (int v = 0, next = 0; v < nn; ++v)
    if (seen[v] && !adj[v].empty()) remap[v] = next++;

  std::vector<int> tips, base;
  for (int t : tip_nodes)
    if (t >= 0 && t < nn && remap[t] >= 0) tips.push_back(remap[t]);
  for (int b : base_nodes)
    if (remap[b] >= 0) base.push_back(remap[b]);
  if (tips.empty()) throw Error(kModule, "no tip node is connected to the base", ErrorKind::numerical);

  const Vec3 dir = direction.normalized();
  Eigen::VectorXd f = Eigen::VectorXd::Zero(6 * static_cast<Eigen::Index>(sub.nodes.size()));
  for (int t : tips) f.segment<3>(6 * t) += dir / static_cast<double>(tips.size());
  const auto r = solve_frame(sub, mat, base, f);
  Vec3 mean = Vec3::Zero();
  for (int t : tips) mean += r.translation(t);
  mean /= static_cast<double>(tips.size());
  const double deflection = mean.norm();
  if (!(deflection > 0)) throw Error(kModule, "tip did not deflect", ErrorKind::numerical);
  return 1.0 / deflection;
}

}  // namespace gradlattice
