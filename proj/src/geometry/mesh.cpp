#include "sdfprox/geometry/mesh.hpp"

#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>

#include "sdfprox/common/io_util.hpp"

namespace sdfprox::geom {

Eigen::AlignedBox3d TriangleMesh::bounding_box() const {
  Eigen::AlignedBox3d box;
  for (const auto& v : vertices) box.extend(v);
  return box;
}

double TriangleMesh::triangle_area(int t) const {
  return triangle_area_normal(t).norm();
}

Eigen::Vector3d TriangleMesh::triangle_area_normal(int t) const {
  const auto& tri = triangles[t];
  const Eigen::Vector3d& a = vertices[tri[0]];
  const Eigen::Vector3d& b = vertices[tri[1]];
  const Eigen::Vector3d& c = vertices[tri[2]];
  return 0.5 * (b - a).cross(c - a);
}

Eigen::Vector3d TriangleMesh::triangle_normal(int t) const {
  return triangle_area_normal(t).normalized();
}

double TriangleMesh::total_area() const {
  double s = 0;
  for (int t = 0; t < static_cast<int>(triangles.size()); ++t) s += triangle_area(t);
  return s;
}

bool TriangleMesh::is_watertight() const {
  // Count directed edges; watertight iff every directed edge has exactly one
  // opposite partner and no duplicates.
  std::map<std::pair<int, int>, int> directed;
  for (const auto& tri : triangles) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      if (a == b) return false;
      if (++directed[{a, b}] > 1) return false;
    }
  }
  for (const auto& [edge, count] : directed) {
    auto it = directed.find({edge.second, edge.first});
    if (it == directed.end() || it->second != 1) return false;
  }
  return true;
}

double TriangleMesh::signed_volume() const {
  double v = 0;
  for (const auto& tri : triangles) {
    const Eigen::Vector3d& a = vertices[tri[0]];
    const Eigen::Vector3d& b = vertices[tri[1]];
    const Eigen::Vector3d& c = vertices[tri[2]];
    v += a.dot(b.cross(c)) / 6.0;
  }
  return v;
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw std::runtime_error("obj parse error (line " + std::to_string(line) + "): " + msg);
}

int resolve_index(long long raw, std::size_t vertex_count, int line) {
  if (raw == 0) parse_fail(line, "face index 0 is invalid (OBJ indices are 1-based)");
  long long idx = raw > 0 ? raw - 1 : static_cast<long long>(vertex_count) + raw;
  if (idx < 0 || idx >= static_cast<long long>(vertex_count)) {
    parse_fail(line, "face index " + std::to_string(raw) + " out of range for " +
                         std::to_string(vertex_count) + " vertices");
  }
  return static_cast<int>(idx);
}

}  // namespace

TriangleMesh parse_obj(const std::string& text) {
  TriangleMesh mesh;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) parse_fail(line_no, "vertex needs three numeric coordinates");
      mesh.vertices.emplace_back(x, y, z);
    } else if (tag == "f") {
      std::vector<int> corners;
      std::string token;
      while (ls >> token) {
        // Accept v, v/vt, v//vn, v/vt/vn; only the vertex index is used.
        const std::string head = token.substr(0, token.find('/'));
        char* end = nullptr;
        const long long raw = std::strtoll(head.c_str(), &end, 10);
        if (end != head.c_str() + head.size() || head.empty()) {
          parse_fail(line_no, "non-numeric face index: " + token);
        }
        corners.push_back(resolve_index(raw, mesh.vertices.size(), line_no));
      }
      if (corners.size() < 3) parse_fail(line_no, "face needs at least 3 vertices");
      for (std::size_t k = 1; k + 1 < corners.size(); ++k) {
        mesh.triangles.emplace_back(corners[0], corners[k], corners[k + 1]);
      }
    }
    // vn/vt/o/g/s/usemtl/mtllib and anything else: ignored.
  }
  if (mesh.vertices.empty() || mesh.triangles.empty()) {
    throw std::runtime_error("obj parse error: mesh has no vertices or no faces");
  }

  std::vector<Eigen::Vector3i> kept;
  kept.reserve(mesh.triangles.size());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    if (mesh.triangle_area(t) > 1e-12) {
      kept.push_back(mesh.triangles[t]);
    } else {
      ++mesh.dropped_degenerate;
    }
  }
  mesh.triangles = std::move(kept);
  if (mesh.triangles.empty()) {
    throw std::runtime_error("obj parse error: all faces degenerate (area <= 1e-12)");
  }

  const Eigen::AlignedBox3d box = mesh.bounding_box();
  if ((box.sizes().array() <= 0.0).any()) {
    throw std::runtime_error("obj parse error: bounding box is degenerate on some axis");
  }
  return mesh;
}

TriangleMesh load_mesh(const std::string& path) {
  return parse_obj(read_text_file(path));
}

std::string obj_text(const TriangleMesh& mesh, const std::string& comment) {
  std::ostringstream os;
  if (!comment.empty()) {
    std::istringstream cs(comment);
    std::string cl;
    while (std::getline(cs, cl)) os << "# " << cl << "\n";
  }
  for (const auto& v : mesh.vertices) {
    os << "v " << format_g17(v.x()) << ' ' << format_g17(v.y()) << ' ' << format_g17(v.z())
       << '\n';
  }
  for (const auto& t : mesh.triangles) {
    os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
  return os.str();
}

void write_obj(const TriangleMesh& mesh, const std::string& path, const std::string& comment) {
  write_text_file(path, obj_text(mesh, comment));
}

}  // namespace sdfprox::geom
