#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "animesh/deform.hpp"
#include "animesh/mesh.hpp"
#include "animesh/rng.hpp"

namespace animesh {

/// Right-handed, Y-up camera looking at a target (the origin by default).
/// Perspective cameras use a vertical field of view; orthographic ones a
/// half-height in model units.
struct Camera {
  enum class Projection { perspective, orthographic };

  Projection projection = Projection::perspective;
  Eigen::Vector3d position{0.0, 0.0, 2.5};
  Eigen::Vector3d target{0.0, 0.0, 0.0};
  Eigen::Vector3d up{0.0, 1.0, 0.0};
  double fov_deg = 40.0;           // vertical, perspective only
  double ortho_half_height = 1.0;  // orthographic only
  int width = 64;
  int height = 64;

  void validate() const;

  /// World-to-camera rigid transform; the camera looks down -z.
  Eigen::Matrix4d view_matrix() const;
};

/// Binary coverage image, row-major, row 0 at the top.
struct Silhouette {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> mask;  // 0 or 1, width * height entries

  std::uint8_t at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x]; }
  double coverage() const;  // fraction of covered pixels
  Eigen::VectorXd flatten() const;
};

/// Rasterizes triangles with a point-in-triangle test at pixel centers.
/// There is no near-plane clipping: under perspective, a triangle with any
/// vertex at or behind the camera plane is skipped entirely.
Silhouette render_silhouette(const std::vector<Eigen::Vector3d>& vertices,
                             const std::vector<std::array<int, 3>>& faces, const Camera& camera);
Silhouette render_silhouette(const TriangleMesh& mesh, const Camera& camera);
std::vector<Silhouette> render_silhouette(const KeyframeSequence& frames, const Camera& camera);

/// Sampling windows for random view selection (degrees and model units).
struct CameraRanges {
  double fov_min = 15.0, fov_max = 60.0;
  double elevation_min = 10.0, elevation_max = 45.0;
  double azimuth_min = 0.0, azimuth_max = 360.0;
  double distance_min = 2.5, distance_max = 3.0;

  void validate() const;
};

/// Draws fov, elevation, azimuth, distance (one uniform each, in that
/// order) and builds a perspective camera at the spherical position
/// oriented toward the origin.
Camera sample_camera(Rng& rng, const CameraRanges& ranges, int width = 64, int height = 64);

}  // namespace animesh
