#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdfprox/common/rng.hpp"
#include "sdfprox/geometry/sdf_oracle.hpp"

namespace sdfprox::geom {

struct SdfSample {
  Eigen::Vector3d p;
  double d;
};

struct SampleMix {
  double surface_frac = 0.2;
  double near_frac = 0.4;
  double uniform_frac = 0.4;
  // Near-surface Gaussian sigma as a fraction of the bbox diagonal, and the
  // centered scale factor of the uniform sampling box.
  double near_sigma_frac = 0.025;
  double uniform_box_scale = 1.5;
};

/**
 * Draw a training set: surface points (d = 0 exactly), near-surface points
 * (surface + isotropic Gaussian offset), and uniform points in the scaled
 * bounding box, with all nonzero distances from the exact oracle.
 * Pure function of (mesh, n_total, mix, seed); single-threaded.
 */
std::vector<SdfSample> sample_dataset(const SdfOracle& oracle, std::size_t n_total,
                                      const SampleMix& mix, std::uint64_t seed);

/// Area-weighted uniform point on the mesh surface.
Eigen::Vector3d sample_surface_point(const TriangleMesh& mesh,
                                     const std::vector<double>& cumulative_area, Rng& rng);

// Binary dataset format: 16-byte header {magic "SDFD", version u32 = 1,
// count u64}, then count records of 4 little-endian f64 (p_x, p_y, p_z, d).
void write_dataset(const std::string& path, const std::vector<SdfSample>& samples);
std::vector<SdfSample> read_dataset(const std::string& path);

/// CSV export with header row "p_x,p_y,p_z,d"; `meta_lines` are emitted
/// first as "# "-prefixed comments.
void write_dataset_csv(const std::string& path, const std::vector<SdfSample>& samples,
                       const std::vector<std::string>& meta_lines = {});
std::vector<SdfSample> read_dataset_csv(const std::string& path);

/// FNV-1a fingerprint of the in-memory sample records (matches the digest of
/// the binary file payload).
std::uint64_t dataset_fingerprint(const std::vector<SdfSample>& samples);

}  // namespace sdfprox::geom
