#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "doctest.h"
#include "sdfprox/common/hash.hpp"
#include "sdfprox/common/rng.hpp"
#include "sdfprox/geometry/bvh.hpp"
#include "sdfprox/geometry/fields.hpp"
#include "sdfprox/geometry/marching_cubes.hpp"
#include "sdfprox/geometry/mesh.hpp"
#include "sdfprox/geometry/sampling.hpp"
#include "sdfprox/geometry/sdf_oracle.hpp"

using namespace sdfprox;
using namespace sdfprox::geom;

namespace {

// ---------------------------------------------------------------------------
// Reference implementations the library code is tested against. These use
// different algorithms than the library (least-squares barycentrics instead
// of region classification, exhaustive scans instead of a BVH, analytic box
// SDF instead of mesh queries, central differences instead of closed forms).
// ---------------------------------------------------------------------------

// Point-triangle distance as a minimum over the 7 candidate feature
// projections (face via least-squares barycentrics, 3 clamped edge
// projections, 3 vertices).
double ref_point_triangle_dist(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                               const Eigen::Vector3d& b, const Eigen::Vector3d& c) {
  double best = std::min({(p - a).norm(), (p - b).norm(), (p - c).norm()});
  const Eigen::Vector3d corners[3] = {a, b, c};
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d& u = corners[i];
    const Eigen::Vector3d& v = corners[(i + 1) % 3];
    const Eigen::Vector3d e = v - u;
    const double t = std::clamp((p - u).dot(e) / e.squaredNorm(), 0.0, 1.0);
    best = std::min(best, (p - (u + t * e)).norm());
  }
  Eigen::Matrix<double, 3, 2> m;
  m.col(0) = b - a;
  m.col(1) = c - a;
  const Eigen::Vector2d uv =
      (m.transpose() * m).ldlt().solve(m.transpose() * (p - a));
  if (uv.x() >= 0 && uv.y() >= 0 && uv.x() + uv.y() <= 1) {
    best = std::min(best, (p - (a + m * uv)).norm());
  }
  return best;
}

double brute_force_distance(const TriangleMesh& mesh, const Eigen::Vector3d& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    best = std::min(best, ref_point_triangle_dist(p, mesh.vertices[t[0]],
                                                  mesh.vertices[t[1]],
                                                  mesh.vertices[t[2]]));
  }
  return best;
}

Eigen::Vector3d fd_gradient(const SdfOracle& oracle, const Eigen::Vector3d& p, double h) {
  Eigen::Vector3d g;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d e = Eigen::Vector3d::Zero();
    e[k] = h;
    g[k] = (oracle.signed_distance(p + e) - oracle.signed_distance(p - e)) / (2 * h);
  }
  return g;
}

// Side-2 cube centered at the origin, as six outward-oriented quads
// (exercises fan triangulation).
const char* kCubeQuadObj =
    "# unit-half cube\n"
    "v -1 -1 -1\n"
    "v  1 -1 -1\n"
    "v  1  1 -1\n"
    "v -1  1 -1\n"
    "v -1 -1  1\n"
    "v  1 -1  1\n"
    "v  1  1  1\n"
    "v -1  1  1\n"
    "f 1 4 3 2\n"
    "f 5 6 7 8\n"
    "f 1 2 6 5\n"
    "f 3 4 8 7\n"
    "f 1 5 8 4\n"
    "f 2 3 7 6\n";

TriangleMesh make_cube() { return parse_obj(kCubeQuadObj); }

TriangleMesh make_icosphere(int subdivisions, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> verts = {
      {-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  std::vector<Eigen::Vector3i> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (auto& v : verts) v.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const std::pair<int, int> key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Eigen::Vector3i> next;
    next.reserve(4 * faces.size());
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  TriangleMesh mesh;
  mesh.vertices.reserve(verts.size());
  for (const auto& v : verts) mesh.vertices.push_back(radius * v);
  mesh.triangles = std::move(faces);
  return mesh;
}

std::string temp_path(const std::string& name) {
  return std::string("/tmp/sdfprox_test_") + name;
}

}  // namespace

// ---------------------------------------------------------------------------
// OBJ parsing
// ---------------------------------------------------------------------------

TEST_CASE("parse_obj: cube quads fan-triangulate to 8 vertices, 12 triangles") {
  const TriangleMesh mesh = make_cube();
  CHECK(mesh.vertices.size() == 8);
  CHECK(mesh.triangles.size() == 12);
  CHECK(mesh.dropped_degenerate == 0);
  CHECK(mesh.vertices[0] == Eigen::Vector3d(-1, -1, -1));
  CHECK(mesh.vertices[6] == Eigen::Vector3d(1, 1, 1));
}

TEST_CASE("parse_obj: explicit triangle faces read back directly") {
  const std::string obj =
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
      "f 1 2 3\nf 1 4 2\nf 2 4 3\nf 1 3 4\n";
  const TriangleMesh mesh = parse_obj(obj);
  CHECK(mesh.vertices.size() == 4);
  CHECK(mesh.triangles.size() == 4);
  CHECK(mesh.triangles[0] == Eigen::Vector3i(0, 1, 2));
}

TEST_CASE("parse_obj: single quad emits two triangles") {
  const TriangleMesh mesh = parse_obj(
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 0 9\nf 1 2 3 4\nf 1 2 5\n");
  CHECK(mesh.triangles.size() == 3);
  CHECK(mesh.triangles[0] == Eigen::Vector3i(0, 1, 2));
  CHECK(mesh.triangles[1] == Eigen::Vector3i(0, 2, 3));
}

TEST_CASE("parse_obj: v/vt/vn index forms and negative indices") {
  const std::string obj =
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
      "vn 0 0 1\nvt 0 0\n"
      "f 1/1/1 2/1/1 3/1/1\n"
      "f 1//1 2//1 3//1\n"
      "f -4 -3 -2\n"
      "f 1 2 4\n";
  const TriangleMesh mesh = parse_obj(obj);
  REQUIRE(mesh.triangles.size() == 4);
  for (int i = 0; i < 3; ++i) CHECK(mesh.triangles[i] == Eigen::Vector3i(0, 1, 2));
  CHECK(mesh.triangles[3] == Eigen::Vector3i(0, 1, 3));
}

TEST_CASE("parse_obj: out-of-range face index is an error") {
  CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 9\n"),
                  std::runtime_error);
}

TEST_CASE("parse_obj: malformed coordinate reports its line") {
  try {
    parse_obj("v 0 0 0\nv 1 zero 0\nv 0 1 0\nf 1 2 3\n");
    FAIL("expected parse error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("parse_obj: empty or degenerate-only input is an error") {
  CHECK_THROWS_AS(parse_obj(""), std::runtime_error);
  CHECK_THROWS_AS(parse_obj("v 0 0 0\nv 1 0 0\nv 2 0 0\nf 1 2 3\n"),
                  std::runtime_error);
}

TEST_CASE("parse_obj: degenerate faces are dropped and counted") {
  const std::string obj =
      "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\n"
      "f 1 2 3\nf 1 1 2\nf 1 2 4\n";
  const TriangleMesh mesh = parse_obj(obj);
  CHECK(mesh.triangles.size() == 2);
  CHECK(mesh.dropped_degenerate == 1);
}

TEST_CASE("obj text round-trips vertices and faces exactly") {
  const TriangleMesh mesh = make_icosphere(1, 1.7);
  const TriangleMesh back = parse_obj(obj_text(mesh, "round trip"));
  REQUIRE(back.vertices.size() == mesh.vertices.size());
  REQUIRE(back.triangles.size() == mesh.triangles.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    CHECK(back.vertices[i] == mesh.vertices[i]);
  }
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    CHECK(back.triangles[i] == mesh.triangles[i]);
  }
}

// ---------------------------------------------------------------------------
// Mesh properties
// ---------------------------------------------------------------------------

TEST_CASE("mesh: cube area, volume, watertightness") {
  const TriangleMesh cube = make_cube();
  CHECK(cube.total_area() == doctest::Approx(24.0).epsilon(1e-12));
  CHECK(cube.signed_volume() == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(cube.is_watertight());
  const auto box = cube.bounding_box();
  CHECK(box.min() == Eigen::Vector3d(-1, -1, -1));
  CHECK(box.max() == Eigen::Vector3d(1, 1, 1));
}

TEST_CASE("mesh: icosphere is watertight, outward-oriented, near-spherical") {
  const TriangleMesh ico = make_icosphere(3, 1.0);
  CHECK(ico.is_watertight());
  const double v = ico.signed_volume();
  CHECK(v > 0.95 * 4.0 * M_PI / 3.0);
  CHECK(v < 4.0 * M_PI / 3.0);
}

TEST_CASE("mesh: hole breaks watertightness") {
  TriangleMesh cube = make_cube();
  cube.triangles.pop_back();
  CHECK(!cube.is_watertight());
}

// ---------------------------------------------------------------------------
// Distance queries
// ---------------------------------------------------------------------------

TEST_CASE("closest_point_triangle agrees with the least-squares reference") {
  Rng rng(101);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::Vector3d a = rng.uniform_box({-1, -1, -1}, {1, 1, 1});
    const Eigen::Vector3d b = rng.uniform_box({-1, -1, -1}, {1, 1, 1});
    const Eigen::Vector3d c = rng.uniform_box({-1, -1, -1}, {1, 1, 1});
    if ((b - a).cross(c - a).norm() < 1e-6) continue;
    const Eigen::Vector3d p = rng.uniform_box({-2, -2, -2}, {2, 2, 2});
    const double got = (p - closest_point_triangle(p, a, b, c)).norm();
    const double want = ref_point_triangle_dist(p, a, b, c);
    CHECK(got == doctest::Approx(want).epsilon(1e-10));
    CHECK(got <= want + 1e-12);
  }
}

TEST_CASE("unsigned_distance: cube face point and vertex identities") {
  const SdfOracle oracle(make_cube());
  const auto u = oracle.unsigned_distance({2, 0, 0});
  CHECK(u.d == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(u.q.isApprox(Eigen::Vector3d(1, 0, 0), 1e-9));
  for (const auto& v : oracle.mesh().vertices) {
    CHECK(oracle.unsigned_distance(v).d <= 1e-9);
  }
}

TEST_CASE("unsigned_distance: oracle distance to every mesh vertex is zero") {
  const SdfOracle oracle(make_icosphere(2, 2.0));
  for (const auto& v : oracle.mesh().vertices) {
    CHECK(oracle.unsigned_distance(v).d <= 1e-9);
  }
}

TEST_CASE("bvh distance equals exhaustive triangle scan on 1000+ queries") {
  const TriangleMesh ico = make_icosphere(2, 1.3);
  const TriangleMesh cube = make_cube();
  const SdfOracle ico_oracle(ico);
  const SdfOracle cube_oracle(cube);
  Rng rng(55);
  for (int i = 0; i < 1200; ++i) {
    const Eigen::Vector3d p = rng.uniform_box({-3, -3, -3}, {3, 3, 3});
    const auto ui = ico_oracle.unsigned_distance(p);
    CHECK(std::abs(ui.d - brute_force_distance(ico, p)) <= 1e-9);
    CHECK(std::abs((p - ui.q).norm() - ui.d) <= 1e-9);
    const auto uc = cube_oracle.unsigned_distance(p);
    CHECK(std::abs(uc.d - brute_force_distance(cube, p)) <= 1e-9);
    CHECK(std::abs((p - uc.q).norm() - uc.d) <= 1e-9);
  }
}

// ---------------------------------------------------------------------------
// Sign and signed distance
// ---------------------------------------------------------------------------

TEST_CASE("signed_distance: cube center and surface cases") {
  const SdfOracle oracle(make_cube());
  CHECK(oracle.signed_distance({0, 0, 0}) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(oracle.signed_distance({1, 0, 0})) <= 1e-12);
  CHECK(oracle.signed_distance({2, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("signed_distance: icosphere approximates the analytic sphere") {
  const SdfOracle oracle(make_icosphere(4, 1.0));
  CHECK(std::abs(oracle.signed_distance({0, 0, 2}) - 1.0) <= 5e-3);
  CHECK(std::abs(oracle.signed_distance({0, 0, 0}) + 1.0) <= 5e-3);
}

TEST_CASE("signed and unsigned magnitudes match exactly") {
  const SdfOracle oracle(make_icosphere(2, 1.0));
  Rng rng(77);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d p = rng.uniform_box({-2, -2, -2}, {2, 2, 2});
    CHECK(std::abs(oracle.signed_distance(p)) == oracle.unsigned_distance(p).d);
  }
}

TEST_CASE("winding number: near 1 inside, near 0 outside, dipole tracks exact") {
  const TriangleMesh ico = make_icosphere(2, 1.0);
  const Bvh bvh(ico);
  Rng rng(31);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector3d p = rng.uniform_box({-2, -2, -2}, {2, 2, 2});
    const double r = p.norm();
    if (std::abs(r - 1.0) < 0.05) continue;  // skip the faceted shell band
    const double w_exact = bvh.winding_number(p, 0.0);
    if (r < 1.0) {
      CHECK(w_exact == doctest::Approx(1.0).epsilon(1e-6));
    } else {
      CHECK(std::abs(w_exact) <= 1e-6);
    }
    // Opening factor trades accuracy for speed; both stay far from 0.5.
    CHECK(std::abs(bvh.winding_number(p, 2.0) - w_exact) <= 0.05);
    CHECK(std::abs(bvh.winding_number(p, 4.0) - w_exact) <= 3e-3);
  }
}

TEST_CASE("ray-parity sign agrees with winding sign on watertight meshes") {
  const TriangleMesh ico = make_icosphere(2, 1.0);
  const SdfOracle winding(ico, SignMethod::winding_number);
  const SdfOracle parity(make_icosphere(2, 1.0), SignMethod::ray_parity);
  Rng rng(13);
  for (int i = 0; i < 400; ++i) {
    const Eigen::Vector3d p = rng.uniform_box({-2, -2, -2}, {2, 2, 2});
    if (std::abs(p.norm() - 1.0) < 0.02) continue;
    CHECK(winding.sign(p) == parity.sign(p));
    CHECK(winding.signed_distance(p) == parity.signed_distance(p));
  }
}

TEST_CASE("winding ambiguity on a holed mesh raises the dedicated error") {
  TriangleMesh cube = make_cube();
  // Drop one bottom triangle; a point on the missing face sees half coverage.
  cube.triangles.erase(cube.triangles.begin());
  const SdfOracle oracle(std::move(cube));
  const Eigen::Vector3d on_hole(-1.0 / 3.0, 1.0 / 3.0, -1.0);
  CHECK_THROWS_AS(oracle.signed_distance(on_hole), SignAmbiguityError);
  // Ray parity still resolves points well inside the (now open) box.
  const SdfOracle parity(
      [] {
        TriangleMesh m = make_cube();
        m.triangles.erase(m.triangles.begin());
        return m;
      }(),
      SignMethod::ray_parity);
  CHECK(parity.sign({0.3, 0.2, 0.5}) == -1);
}

// ---------------------------------------------------------------------------
// Oracle gradient
// ---------------------------------------------------------------------------

TEST_CASE("oracle_gradient: cube face normal and interior direction") {
  const SdfOracle oracle(make_cube());
  const auto outside = oracle.gradient({2, 0, 0});
  CHECK(outside.g.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  CHECK(!outside.at_surface);

  const auto inside = oracle.gradient({0.2, 0.1, 0.05});
  CHECK(inside.g.isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
  CHECK(inside.g.norm() == doctest::Approx(1.0).epsilon(1e-12));

  const auto center = oracle.gradient({0, 0, 0});
  CHECK(center.g.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(center.ambiguous);

  const auto surface = oracle.gradient({1, 0, 0});
  CHECK(surface.at_surface);
}

TEST_CASE("oracle_gradient matches central differences of signed_distance") {
  const SdfOracle oracle(make_cube());
  const Eigen::Vector3d p(2, 0.3, 0.1);
  const Eigen::Vector3d fd = fd_gradient(oracle, p, 1e-5);
  CHECK((oracle.gradient(p).g - fd).norm() <= 1e-4);

  const SdfOracle ico(make_icosphere(2, 1.0));
  Rng rng(23);
  int checked = 0;
  while (checked < 100) {
    const Eigen::Vector3d q = rng.uniform_box({-2, -2, -2}, {2, 2, 2});
    if (std::abs(q.norm() - 1.0) < 0.05) continue;
    const auto g = ico.gradient(q);
    if (g.ambiguous || g.at_surface) continue;
    CHECK((g.g - fd_gradient(ico, q, 1e-6)).norm() <= 1e-4);
    ++checked;
  }
}

TEST_CASE("oracle_gradient has unit norm off the surface at unique features") {
  const SdfOracle oracle(make_icosphere(2, 1.5));
  Rng rng(47);
  int checked = 0;
  while (checked < 500) {
    const Eigen::Vector3d p = rng.uniform_box({-3, -3, -3}, {3, 3, 3});
    const auto u = oracle.unsigned_distance(p);
    if (u.d <= 1e-6) continue;
    const auto g = oracle.gradient(p);
    if (g.ambiguous) continue;
    CHECK(std::abs(g.g.norm() - 1.0) <= 1e-9);
    ++checked;
  }
}

// ---------------------------------------------------------------------------
// Dataset sampling
// ---------------------------------------------------------------------------

TEST_CASE("sample_dataset: pure surface mix yields d = 0 on every sample") {
  const SdfOracle oracle(make_cube());
  SampleMix mix;
  mix.surface_frac = 1.0;
  mix.near_frac = 0.0;
  mix.uniform_frac = 0.0;
  const auto samples = sample_dataset(oracle, 10, mix, 9);
  REQUIRE(samples.size() == 10);
  for (const auto& s : samples) CHECK(s.d == 0.0);
}

TEST_CASE("sample_dataset: fixed seed reproduces byte-identical samples") {
  const SdfOracle oracle(make_icosphere(1, 1.0));
  const SampleMix mix;
  const auto a = sample_dataset(oracle, 500, mix, 1234);
  const auto b = sample_dataset(oracle, 500, mix, 1234);
  REQUIRE(a.size() == b.size());
  CHECK(dataset_fingerprint(a) == dataset_fingerprint(b));
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].p == b[i].p);
    CHECK(a[i].d == b[i].d);
  }
  const auto c = sample_dataset(oracle, 500, mix, 1235);
  CHECK(dataset_fingerprint(a) != dataset_fingerprint(c));
}

TEST_CASE("sample_dataset: cube distances re-evaluate against the analytic box") {
  const SdfOracle oracle(make_cube());
  const SampleMix mix;  // 0.2 / 0.4 / 0.4
  const auto samples = sample_dataset(oracle, 50000, mix, 42);
  REQUIRE(samples.size() == 50000);

  const BoxField box(Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  const double diag = (oracle.mesh().bounding_box().diagonal() * mix.uniform_box_scale).norm();
  std::size_t zeros = 0;
  for (const auto& s : samples) {
    CHECK(std::abs(s.d - box.value(s.p)) <= 1e-9);
    CHECK(std::abs(s.d) <= diag);
    if (s.d == 0.0) ++zeros;
  }
  // llround(0.2 * 50000) surface samples, and only those sit exactly at zero.
  CHECK(zeros == 10000);
}

TEST_CASE("sample_dataset: invalid mixes are rejected") {
  const SdfOracle oracle(make_cube());
  SampleMix mix;
  mix.surface_frac = 0.5;
  mix.near_frac = 0.0;
  mix.uniform_frac = 0.4;
  CHECK_THROWS(sample_dataset(oracle, 10, mix, 1));
  CHECK_THROWS(sample_dataset(oracle, 0, SampleMix{}, 1));
}

TEST_CASE("dataset binary and csv files round-trip exactly") {
  const SdfOracle oracle(make_icosphere(1, 1.0));
  const auto samples = sample_dataset(oracle, 200, SampleMix{}, 7);

  const std::string bin = temp_path("ds.sdfd");
  write_dataset(bin, samples);
  const auto back = read_dataset(bin);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].p == samples[i].p);
    CHECK(back[i].d == samples[i].d);
  }

  // Fingerprint covers exactly the record payload that follows the header.
  std::ifstream in(bin, std::ios::binary);
  std::string blob((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  REQUIRE(blob.size() == 16 + 32 * samples.size());
  CHECK(blob.substr(0, 4) == "SDFD");
  CHECK(fnv1a(blob.data() + 16, blob.size() - 16) == dataset_fingerprint(samples));

  const std::string csv = temp_path("ds.csv");
  write_dataset_csv(csv, samples, {"target: icosphere", "seed: 7"});
  const auto csv_back = read_dataset_csv(csv);
  REQUIRE(csv_back.size() == samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    CHECK(csv_back[i].p == samples[i].p);
    CHECK(csv_back[i].d == samples[i].d);
  }

  CHECK_THROWS(read_dataset(csv));  // bad magic
}

// ---------------------------------------------------------------------------
// Analytic fields
// ---------------------------------------------------------------------------

TEST_CASE("box field matches the cube mesh oracle everywhere") {
  const SdfOracle oracle(make_cube());
  const BoxField box(Eigen::Vector3d::Zero(), Eigen::Vector3d::Ones());
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p = rng.uniform_box({-3, -3, -3}, {3, 3, 3});
    CHECK(std::abs(box.value(p) - oracle.signed_distance(p)) <= 1e-9);
    const auto g = oracle.gradient(p);
    if (!g.ambiguous && !g.at_surface && oracle.unsigned_distance(p).d > 1e-6) {
      CHECK((box.gradient(p) - g.g).norm() <= 1e-9);
    }
  }
}

TEST_CASE("box field gradient matches central differences inside and outside") {
  const BoxField box(Eigen::Vector3d(0.5, -0.25, 0), Eigen::Vector3d(1, 0.5, 2));
  Rng rng(8);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d p = rng.uniform_box({-3, -3, -3}, {4, 3, 3});
    Eigen::Vector3d fd;
    bool skip = false;
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d e = Eigen::Vector3d::Zero();
      e[k] = 1e-6;
      fd[k] = (box.value(p + e) - box.value(p - e)) / 2e-6;
    }
    // Skip points near the box surface or the interior axis-switch ridges,
    // where the SDF is not differentiable.
    if (std::abs(fd.norm() - 1.0) > 1e-6) skip = true;
    if (!skip) CHECK((box.gradient(p) - fd).norm() <= 1e-6);
  }
}

TEST_CASE("union field is the pointwise minimum of its parts") {
  const SphereField s1(Eigen::Vector3d(0, 0, 0), 1.0);
  const SphereField s2(Eigen::Vector3d(3, 0, 0), 0.5);
  UnionField u;
  u.add(std::make_unique<SphereField>(s1));
  u.add(std::make_unique<SphereField>(s2));
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const Eigen::Vector3d p = rng.uniform_box({-2, -2, -2}, {5, 2, 2});
    // Tolerance covers fp-contraction differences between call sites.
    const double want = std::min(s1.value(p), s2.value(p));
    CHECK(u.value(p) == doctest::Approx(want).epsilon(1e-14));
    const auto& active = s1.value(p) <= s2.value(p) ? s1 : s2;
    CHECK((u.gradient(p) - active.gradient(p)).norm() <= 1e-14);
  }
  CHECK(u.gradient({5, 0, 0}).isApprox(Eigen::Vector3d(1, 0, 0), 1e-12));
}

TEST_CASE("built-in targets resolve by tag") {
  const auto sphere = make_analytic_target("sphere");
  CHECK(sphere->value({3, 0, 0}) == doctest::Approx(1.0).epsilon(1e-12));
  const auto panels = make_analytic_target("sphere_panels");
  CHECK(panels->value({0, 0, 0}) < 0);
  CHECK(panels->value({0, 0, 0}) == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK_THROWS(make_analytic_target("unknown_tag"));
}

// ---------------------------------------------------------------------------
// Marching cubes
// ---------------------------------------------------------------------------

TEST_CASE("marching_cubes: sphere residual within one cell diagonal") {
  const McGrid grid{{-2, -2, -2}, {2, 2, 2}, {32, 32, 32}};
  const double cell_diag = (grid.max - grid.min).norm() / 31.0;
  const TriangleMesh mesh = marching_cubes(
      [](const Eigen::Vector3d& p) { return p.norm() - 1.0; }, grid);
  REQUIRE(mesh.vertices.size() > 100);
  double worst = 0;
  for (const auto& v : mesh.vertices) {
    worst = std::max(worst, std::abs(v.norm() - 1.0));
  }
  CHECK(worst <= cell_diag);
  CHECK(mesh.is_watertight());
  CHECK(mesh.signed_volume() > 0.9 * 4.0 * M_PI / 3.0);
  CHECK(mesh.signed_volume() < 1.1 * 4.0 * M_PI / 3.0);
  const Bvh bvh(mesh);
  CHECK(bvh.winding_number({0, 0, 0}, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(bvh.winding_number({1.9, 0, 0}, 0.0)) <= 1e-6);
}

TEST_CASE("marching_cubes: constant field yields an empty mesh") {
  const McGrid grid{{-1, -1, -1}, {1, 1, 1}, {8, 8, 8}};
  const TriangleMesh mesh =
      marching_cubes([](const Eigen::Vector3d&) { return 1.0; }, grid);
  CHECK(mesh.vertices.empty());
  CHECK(mesh.triangles.empty());
}

TEST_CASE("marching_cubes: linear field z reproduces the plane exactly") {
  const McGrid grid{{-1, -1, -0.737}, {1, 1, 1.21}, {9, 9, 9}};
  const TriangleMesh mesh =
      marching_cubes([](const Eigen::Vector3d& p) { return p.z(); }, grid);
  REQUIRE(!mesh.triangles.empty());
  for (const auto& v : mesh.vertices) CHECK(std::abs(v.z()) <= 1e-9);
  // Normals face the field > iso side (+z).
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    CHECK(mesh.triangle_normal(t).z() > 0.99);
  }
}

TEST_CASE("marching_cubes: degenerate grids are rejected") {
  const McGrid grid{{-1, -1, -1}, {1, 1, 1}, {1, 8, 8}};
  CHECK_THROWS(marching_cubes([](const Eigen::Vector3d& p) { return p.z(); }, grid));
}

TEST_CASE("marching_cubes: exported surface feeds back through the oracle") {
  const McGrid grid{{-3.2, -3.2, -3.2}, {3.2, 3.2, 3.2}, {40, 40, 40}};
  const auto target = make_sphere_target();
  const TriangleMesh mesh = marching_cubes(
      [&](const Eigen::Vector3d& p) { return target->value(p); }, grid);
  CHECK(mesh.is_watertight());
  const SdfOracle oracle(std::move(mesh));
  // The extracted surface tracks the analytic target within a cell diagonal.
  const double cell_diag = (grid.max - grid.min).norm() / 39.0;
  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d p = rng.uniform_box({-3, -3, -3}, {3, 3, 3});
    if (std::abs(target->value(p)) < 0.2) continue;
    CHECK(std::abs(oracle.signed_distance(p) - target->value(p)) <= cell_diag);
  }
}
