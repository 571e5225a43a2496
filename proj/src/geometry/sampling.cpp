#include "sdfprox/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sdfprox/common/hash.hpp"
#include "sdfprox/common/io_util.hpp"
#include "sdfprox/common/rng.hpp"

namespace sdfprox::geom {

Eigen::Vector3d sample_surface_point(const TriangleMesh& mesh,
                                     const std::vector<double>& cumulative_area, Rng& rng) {
  const double u = rng.uniform() * cumulative_area.back();
  const auto it = std::upper_bound(cumulative_area.begin(), cumulative_area.end(), u);
  const int t = static_cast<int>(std::min<std::ptrdiff_t>(
      it - cumulative_area.begin(), static_cast<std::ptrdiff_t>(cumulative_area.size()) - 1));
  const auto& tri = mesh.triangles[t];
  // Uniform barycentric via the square-root trick.
  const double r1 = std::sqrt(rng.uniform());
  const double r2 = rng.uniform();
  const double wa = 1.0 - r1;
  const double wb = r1 * (1.0 - r2);
  const double wc = r1 * r2;
  return wa * mesh.vertices[tri[0]] + wb * mesh.vertices[tri[1]] + wc * mesh.vertices[tri[2]];
}

std::vector<SdfSample> sample_dataset(const SdfOracle& oracle, std::size_t n_total,
                                      const SampleMix& mix, std::uint64_t seed) {
  if (n_total < 1) throw std::runtime_error("sample_dataset: n_total must be >= 1");
  const double frac_sum = mix.surface_frac + mix.near_frac + mix.uniform_frac;
  if (std::abs(frac_sum - 1.0) > 1e-9) {
    throw std::runtime_error("sample_dataset: mix fractions must sum to 1");
  }

  const TriangleMesh& mesh = oracle.mesh();
  std::vector<double> cum(mesh.triangles.size());
  double acc = 0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    acc += mesh.triangle_area(static_cast<int>(t));
    cum[t] = acc;
  }

  const Eigen::AlignedBox3d box = mesh.bounding_box();
  const double diag = box.diagonal().norm();
  const double sigma = mix.near_sigma_frac * diag;
  const Eigen::Vector3d center = box.center();
  const Eigen::Vector3d half = 0.5 * mix.uniform_box_scale * box.sizes();

  const auto n_surface = static_cast<std::size_t>(std::llround(mix.surface_frac * n_total));
  const auto n_near = static_cast<std::size_t>(std::llround(mix.near_frac * n_total));
  const std::size_t n_uniform =
      n_total - std::min(n_total, n_surface + n_near);

  Rng rng(seed);
  std::vector<SdfSample> out;
  out.reserve(n_total);
  for (std::size_t i = 0; i < n_surface && out.size() < n_total; ++i) {
    out.push_back({sample_surface_point(mesh, cum, rng), 0.0});
  }
  for (std::size_t i = 0; i < n_near && out.size() < n_total; ++i) {
    const Eigen::Vector3d p =
        sample_surface_point(mesh, cum, rng) + sigma * rng.normal3();
    out.push_back({p, oracle.signed_distance(p)});
  }
  for (std::size_t i = 0; i < n_uniform && out.size() < n_total; ++i) {
    const Eigen::Vector3d p = rng.uniform_box(center - half, center + half);
    out.push_back({p, oracle.signed_distance(p)});
  }
  // Rounding of the fractions can leave the list one short; top up with
  // uniform points so the count contract holds exactly.
  while (out.size() < n_total) {
    const Eigen::Vector3d p = rng.uniform_box(center - half, center + half);
    out.push_back({p, oracle.signed_distance(p)});
  }
  return out;
}

namespace {
constexpr char kMagic[4] = {'S', 'D', 'F', 'D'};
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_dataset(const std::string& path, const std::vector<SdfSample>& samples) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write(kMagic, 4);
  write_u32(f, kVersion);
  write_u64(f, samples.size());
  for (const auto& s : samples) {
    write_f64(f, s.p.x());
    write_f64(f, s.p.y());
    write_f64(f, s.p.z());
    write_f64(f, s.d);
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<SdfSample> read_dataset(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("not an SDFD dataset file: " + path);
  }
  const std::uint32_t version = read_u32(f);
  if (version != kVersion) {
    throw std::runtime_error("unsupported SDFD version " + std::to_string(version));
  }
  const std::uint64_t count = read_u64(f);
  std::vector<SdfSample> out(count);
  for (auto& s : out) {
    s.p.x() = read_f64(f);
    s.p.y() = read_f64(f);
    s.p.z() = read_f64(f);
    s.d = read_f64(f);
  }
  return out;
}

void write_dataset_csv(const std::string& path, const std::vector<SdfSample>& samples,
                       const std::vector<std::string>& meta_lines) {
  std::ostringstream os;
  for (const auto& line : meta_lines) os << "# " << line << "\n";
  os << "p_x,p_y,p_z,d\n";
  for (const auto& s : samples) {
    os << format_g17(s.p.x()) << ',' << format_g17(s.p.y()) << ',' << format_g17(s.p.z())
       << ',' << format_g17(s.d) << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<SdfSample> read_dataset_csv(const std::string& path) {
  const std::string text = read_text_file(path);
  std::istringstream is(text);
  std::string line;
  std::vector<SdfSample> out;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header row
      continue;
    }
    SdfSample s;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf", &s.p.x(), &s.p.y(), &s.p.z(), &s.d) != 4) {
      throw std::runtime_error("malformed dataset CSV row: " + line);
    }
    out.push_back(s);
  }
  return out;
}

std::uint64_t dataset_fingerprint(const std::vector<SdfSample>& samples) {
  Fnv1a h;
  for (const auto& s : samples) {
    const double vals[4] = {s.p.x(), s.p.y(), s.p.z(), s.d};
    h.update(vals, sizeof(vals));
  }
  return h.digest();
}

}  // namespace sdfprox::geom
