#include <gradlattice/stl.hpp>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string_view>

namespace gradlattice {

namespace {

constexpr const char* kModule = "geometry-core";
constexpr std::size_t kHeaderSize = 80;
constexpr std::size_t kFacetSize = 50;

static_assert(std::endian::native == std::endian::little,
              "binary STL writer assumes a little-endian host");

float read_f32(const std::uint8_t* p) {
  float v;
  std::memcpy(&v, p, 4);
  return v;
}

std::uint32_t read_u32(const std::uint8_t* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

void append_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint8_t buf[4];
  std::memcpy(buf, &v, 4);
  out.insert(out.end(), buf, buf + 4);
}

Vec3 facet_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 n = (b - a).cross(c - a);
  const double len = n.norm();
  return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

TriMesh weld_soup(const std::vector<Vec3>& soup) {
  TriMesh mesh;
  PointWelder welder;
  for (std::size_t i = 0; i + 2 < soup.size(); i += 3) {
    for (std::size_t k = 0; k < 3; ++k)
      if (!soup[i + k].allFinite())
        throw Error(kModule, "non-finite coordinate in facet " + std::to_string(i / 3));
    Triangle t{welder.insert(soup[i]), welder.insert(soup[i + 1]), welder.insert(soup[i + 2])};
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) continue;
    mesh.triangles.push_back(t);
  }
  mesh.vertices = welder.release();
  std::erase_if(mesh.triangles,
                [&](const Triangle& t) { return triangle_area(mesh, t) <= kDegenerateArea; });
  return mesh;
}

bool looks_ascii(std::span<const std::uint8_t> bytes) {
  if (bytes.size() >= kHeaderSize + 4) {
    const std::uint64_t count = read_u32(bytes.data() + kHeaderSize);
    if (kHeaderSize + 4 + count * kFacetSize == bytes.size()) return false;
  }
  std::string_view head(reinterpret_cast<const char*>(bytes.data()),
                        std::min<std::size_t>(bytes.size(), 512));
  const auto pos = head.find_first_not_of(" \t\r\n");
  return pos != std::string_view::npos && head.substr(pos, 5) == "solid" &&
         head.find("facet") != std::string_view::npos;
}

TriMesh parse_binary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize + 4)
    throw Error(kModule, "truncated STL: " + std::to_string(bytes.size()) + " bytes");
  const std::uint64_t count = read_u32(bytes.data() + kHeaderSize);
  const std::uint64_t expected = kHeaderSize + 4 + count * kFacetSize;
  if (bytes.size() < expected)
    throw Error(kModule, "truncated STL: header declares " + std::to_string(count) +
                             " triangles but payload holds " +
                             std::to_string((bytes.size() - kHeaderSize - 4) / kFacetSize));
  if (bytes.size() != expected)
    throw Error(kModule, "triangle count mismatch: header declares " + std::to_string(count) +
                             ", file size implies " +
                             std::to_string((bytes.size() - kHeaderSize - 4) / kFacetSize));
  std::vector<Vec3> soup;
  soup.reserve(count * 3);
  const std::uint8_t* p = bytes.data() + kHeaderSize + 4;
  for (std::uint64_t i = 0; i < count; ++i, p += kFacetSize)
    for (int v = 0; v < 3; ++v) {
      const std::uint8_t* q = p + 12 + 12 * v;
      soup.emplace_back(read_f32(q), read_f32(q + 4), read_f32(q + 8));
    }
  return weld_soup(soup);
}

TriMesh parse_ascii(std::span<const std::uint8_t> bytes) {
  std::istringstream in(std::string(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
  std::vector<Vec3> soup;
  std::string token;
  int in_facet = 0;
  int facet_vertices = 0;
  bool closed = false;
  while (in >> token) {
    if (token == "facet") {
      in_facet = 1;
      facet_vertices = 0;
    } else if (token == "vertex") {
      if (!in_facet) throw Error(kModule, "ASCII STL: vertex outside facet");
      std::string xs, ys, zs;
      if (!(in >> xs >> ys >> zs)) throw Error(kModule, "truncated STL: incomplete vertex");
      Vec3 v;
      try {
        v = {std::stod(xs), std::stod(ys), std::stod(zs)};
      } catch (const std::exception&) {
        throw Error(kModule, "ASCII STL: malformed vertex '" + xs + " " + ys + " " + zs + "'");
      }
      soup.push_back(v);
      ++facet_vertices;
    } else if (token == "endfacet") {
      if (facet_vertices != 3)
        throw Error(kModule, "triangle count mismatch: facet with " +
                                 std::to_string(facet_vertices) + " vertices");
      in_facet = 0;
    } else if (token == "endsolid") {
      closed = true;
      break;
    }
  }
  if (in_facet || !closed) throw Error(kModule, "truncated STL: missing endfacet/endsolid");
  return weld_soup(soup);
}

}  // namespace

TriMesh load_stl(std::span<const std::uint8_t> bytes) {
  return looks_ascii(bytes) ? parse_ascii(bytes) : parse_binary(bytes);
}

std::vector<std::uint8_t> save_stl(const TriMesh& mesh, StlFormat format) {
  if (format == StlFormat::ascii) {
    std::ostringstream out;
    out.precision(9);
    out << "solid gradlattice\n";
    for (const auto& t : mesh.triangles) {
      const Vec3& a = mesh.vertices[t[0]];
      const Vec3& b = mesh.vertices[t[1]];
      const Vec3& c = mesh.vertices[t[2]];
      const Vec3 n = facet_normal(a, b, c);
      out << "  facet normal " << float(n.x()) << ' ' << float(n.y()) << ' ' << float(n.z())
          << "\n    outer loop\n";
      for (const Vec3* v : {&a, &b, &c})
        out << "      vertex " << float(v->x()) << ' ' << float(v->y()) << ' ' << float(v->z())
            << '\n';
      out << "    endloop\n  endfacet\n";
    }
    out << "endsolid gradlattice\n";
    const std::string s = out.str();
    return {s.begin(), s.end()};
  }

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + 4 + kFacetSize * mesh.triangles.size());
  std::string header = "binary STL written by gradlattice";
  header.resize(kHeaderSize, ' ');
  out.insert(out.end(), header.begin(), header.end());
  const auto count = static_cast<std::uint32_t>(mesh.triangles.size());
  std::uint8_t buf[4];
  std::memcpy(buf, &count, 4);
  out.insert(out.end(), buf, buf + 4);
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    const Vec3 n = facet_normal(a, b, c);
    for (const Vec3* v : {&n, &a, &b, &c})
      for (int k = 0; k < 3; ++k) append_f32(out, static_cast<float>((*v)[k]));
    out.push_back(0);
    out.push_back(0);
  }
  return out;
}

TriMesh read_stl_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(kModule, "cannot open STL file '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_stl(bytes);
}

void write_stl_file(const std::filesystem::path& path, const TriMesh& mesh, StlFormat format) {
  const auto bytes = save_stl(mesh, format);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(kModule, "cannot write STL file '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace gradlattice
