#pragma once

#include <gradlattice/geometry.hpp>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace gradlattice {

/// Dense axis-aligned occupancy grid. `origin` is the minimum corner of voxel
/// (0,0,0); storage is x-major so that linear order equals lexicographic
/// (i,j,k) order.
struct VoxelGrid {
  Vec3 origin = Vec3::Zero();
  double voxel_size = 1.0;
  Vec3i dims = Vec3i::Zero();
  std::vector<std::uint8_t> occupancy;

  VoxelGrid() = default;
  VoxelGrid(const Vec3& origin, double voxel_size, const Vec3i& dims);

  std::size_t size() const noexcept { return occupancy.size(); }
  std::size_t linear(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * dims.y() + j) * dims.z() + k;
  }
  Vec3i index(std::size_t linear) const noexcept;

  bool occupied(int i, int j, int k) const { return occupancy[linear(i, j, k)] != 0; }
  void set(int i, int j, int k, bool v = true) { occupancy[linear(i, j, k)] = v ? 1 : 0; }

  Vec3 corner(const Vec3i& ijk) const { return origin + voxel_size * ijk.cast<double>(); }
  Vec3 center(const Vec3i& ijk) const {
    return origin + voxel_size * (ijk.cast<double>() + Vec3::Constant(0.5));
  }
  std::size_t occupied_count() const;
};

/// Symmetric voxelization: the grid is centered on the mesh bounding-box
/// center and padded with one empty layer per side. A voxel is occupied iff
/// its center is inside the mesh.
VoxelGrid voxelize(const TriMesh& mesh, double voxel_size);
VoxelGrid voxelize(const SolidQuery& solid, double voxel_size);

/// World-space centers of occupied voxels in lexicographic (i,j,k) order.
std::vector<Vec3> occupied_centers(const VoxelGrid& grid);
std::vector<Vec3i> occupied_indices(const VoxelGrid& grid);

/// Debug export, one "i j k" line per occupied voxel.
void write_occupancy(std::ostream& out, const VoxelGrid& grid);

}  // namespace gradlattice
