#include <gradlattice/voxelizer.hpp>

#include <cmath>
#include <ostream>

namespace gradlattice {

VoxelGrid::VoxelGrid(const Vec3& origin_, double voxel_size_, const Vec3i& dims_)
    : origin(origin_), voxel_size(voxel_size_), dims(dims_) {
  if (!(voxel_size > 0)) throw Error("voxelizer", "voxel size must be positive");
  if ((dims.array() < 0).any()) throw Error("voxelizer", "negative grid dimensions");
  occupancy.assign(static_cast<std::size_t>(dims.x()) * dims.y() * dims.z(), 0);
}

Vec3i VoxelGrid::index(std::size_t linear) const noexcept {
  const int k = static_cast<int>(linear % dims.z());
  linear /= dims.z();
  const int j = static_cast<int>(linear % dims.y());
  const int i = static_cast<int>(linear / dims.y());
  return {i, j, k};
}

std::size_t VoxelGrid::occupied_count() const {
  std::size_t n = 0;
  for (auto v : occupancy) n += v != 0;
  return n;
}

VoxelGrid voxelize(const SolidQuery& solid, double voxel_size) {
  if (!(voxel_size > 0)) throw Error("voxelizer", "voxel size must be positive");
  const Box3 box = bounding_box(solid.mesh());
  const Vec3 center = box.center();
  Vec3i dims;
  for (int a = 0; a < 3; ++a) {
    // Cells covering the extent, one margin layer on each side.
    const int core = std::max(1, static_cast<int>(std::ceil(box.sizes()[a] / voxel_size - 1e-9)));
    dims[a] = core + 2;
  }
  const Vec3 origin = center - 0.5 * voxel_size * dims.cast<double>();
  VoxelGrid grid(origin, voxel_size, dims);

  std::vector<Vec3> centers(grid.size());
  for (std::size_t n = 0; n < grid.size(); ++n) centers[n] = grid.center(grid.index(n));
  const auto inside = solid.contains(centers);
  for (std::size_t n = 0; n < grid.size(); ++n) grid.occupancy[n] = inside[n] ? 1 : 0;
  return grid;
}

VoxelGrid voxelize(const TriMesh& mesh, double voxel_size) {
  if (!(voxel_size > 0)) throw Error("voxelizer", "voxel size must be positive");
  return voxelize(SolidQuery(mesh), voxel_size);
}

std::vector<Vec3i> occupied_indices(const VoxelGrid& grid) {
  std::vector<Vec3i> out;
  for (std::size_t n = 0; n < grid.size(); ++n)
    if (grid.occupancy[n]) out.push_back(grid.index(n));
  return out;
}

std::vector<Vec3> occupied_centers(const VoxelGrid& grid) {
  std::vector<Vec3> out;
  for (const auto& ijk : occupied_indices(grid)) out.push_back(grid.center(ijk));
  return out;
}

void write_occupancy(std::ostream& out, const VoxelGrid& grid) {
  for (const auto& ijk : occupied_indices(grid))
    out << ijk.x() << ' ' << ijk.y() << ' ' << ijk.z() << '\n';
}

}  // namespace gradlattice
