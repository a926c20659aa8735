#pragma once

#include <gradlattice/geometry.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gradlattice {

enum class StlFormat { binary, ascii };

/// Parses binary or ASCII STL (auto-detected) and welds duplicate vertices
/// at kWeldTolerance. Triangles that collapse under welding are dropped.
TriMesh load_stl(std::span<const std::uint8_t> bytes);

/// Binary: 80-byte header, uint32 count, 50 bytes per facet, little-endian.
std::vector<std::uint8_t> save_stl(const TriMesh& mesh, StlFormat format = StlFormat::binary);

TriMesh read_stl_file(const std::filesystem::path& path);
void write_stl_file(const std::filesystem::path& path, const TriMesh& mesh,
                    StlFormat format = StlFormat::binary);

}  // namespace gradlattice
