#include "animesh/camera.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "animesh/errors.hpp"

namespace animesh {

void Camera::validate() const {
  if (width < 16 || height < 16)
    throw ValidationError("camera: image must be at least 16x16");
  if (projection == Projection::perspective && !(fov_deg > 0.0 && fov_deg < 180.0))
    throw ValidationError("camera: fov must lie in (0, 180) degrees");
  if (projection == Projection::orthographic && !(ortho_half_height > 0.0))
    throw ValidationError("camera: ortho half-height must be > 0");
  const Eigen::Vector3d back = position - target;
  if (back.norm() < 1e-12) throw ValidationError("camera: position coincides with the target");
  if (up.norm() < 1e-12) throw ValidationError("camera: zero up vector");
  if (up.normalized().cross(back.normalized()).norm() < 1e-9)
    throw ValidationError("camera: degenerate basis (up is parallel to the view direction)");
}

Eigen::Matrix4d Camera::view_matrix() const {
  validate();
  const Eigen::Vector3d back = (position - target).normalized();
  const Eigen::Vector3d right = up.cross(back).normalized();
  const Eigen::Vector3d true_up = back.cross(right);
  Eigen::Matrix4d view = Eigen::Matrix4d::Identity();
  view.block<1, 3>(0, 0) = right.transpose();
  view.block<1, 3>(1, 0) = true_up.transpose();
  view.block<1, 3>(2, 0) = back.transpose();
  view.block<3, 1>(0, 3) = -view.block<3, 3>(0, 0) * position;
  return view;
}

double Silhouette::coverage() const {
  if (mask.empty()) return 0.0;
  std::size_t on = 0;
  for (std::uint8_t v : mask) on += v;
  return static_cast<double>(on) / static_cast<double>(mask.size());
}

Eigen::VectorXd Silhouette::flatten() const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t i = 0; i < mask.size(); ++i) out[static_cast<Eigen::Index>(i)] = mask[i];
  return out;
}

Silhouette render_silhouette(const std::vector<Eigen::Vector3d>& vertices,
                             const std::vector<std::array<int, 3>>& faces, const Camera& camera) {
  camera.validate();
  const Eigen::Matrix4d view = camera.view_matrix();
  const double aspect = static_cast<double>(camera.width) / camera.height;
  const bool perspective = camera.projection == Camera::Projection::perspective;
  const double tan_half = perspective
                              ? std::tan(camera.fov_deg * std::numbers::pi / 360.0)
                              : camera.ortho_half_height;

  // Screen-space positions at pixel scale; row 0 is the top of the image.
  std::vector<Eigen::Vector2d> screen(vertices.size());
  std::vector<char> ahead(vertices.size(), 1);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const Eigen::Vector3d p =
        view.block<3, 3>(0, 0) * vertices[i] + view.block<3, 1>(0, 3);
    double sx;
    double sy;
    if (perspective) {
      if (p.z() >= -1e-12) {
        ahead[i] = 0;
        screen[i].setZero();
        continue;
      }
      sx = p.x() / (-p.z() * tan_half * aspect);
      sy = p.y() / (-p.z() * tan_half);
    } else {
      sx = p.x() / (tan_half * aspect);
      sy = p.y() / tan_half;
    }
    screen[i].x() = (sx + 1.0) * 0.5 * camera.width;
    screen[i].y() = (1.0 - sy) * 0.5 * camera.height;
  }

  Silhouette sil;
  sil.width = camera.width;
  sil.height = camera.height;
  sil.mask.assign(static_cast<std::size_t>(camera.width) * camera.height, 0);

  for (const std::array<int, 3>& f : faces) {
    const std::size_t a = static_cast<std::size_t>(f[0]);
    const std::size_t b = static_cast<std::size_t>(f[1]);
    const std::size_t c = static_cast<std::size_t>(f[2]);
    if (!(ahead[a] && ahead[b] && ahead[c])) continue;
    const Eigen::Vector2d& pa = screen[a];
    const Eigen::Vector2d& pb = screen[b];
    const Eigen::Vector2d& pc = screen[c];

    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({pa.x(), pb.x(), pc.x()}))));
    const int x1 = std::min(camera.width - 1,
                            static_cast<int>(std::ceil(std::max({pa.x(), pb.x(), pc.x()}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({pa.y(), pb.y(), pc.y()}))));
    const int y1 = std::min(camera.height - 1,
                            static_cast<int>(std::ceil(std::max({pa.y(), pb.y(), pc.y()}))));

    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const Eigen::Vector2d q(x + 0.5, y + 0.5);
        const double e0 = (pb - pa).x() * (q - pa).y() - (pb - pa).y() * (q - pa).x();
        const double e1 = (pc - pb).x() * (q - pb).y() - (pc - pb).y() * (q - pb).x();
        const double e2 = (pa - pc).x() * (q - pc).y() - (pa - pc).y() * (q - pc).x();
        const bool inside = (e0 >= 0.0 && e1 >= 0.0 && e2 >= 0.0) ||
                            (e0 <= 0.0 && e1 <= 0.0 && e2 <= 0.0);
        if (inside) sil.mask[static_cast<std::size_t>(y) * camera.width + x] = 1;
      }
    }
  }
  return sil;
}

Silhouette render_silhouette(const TriangleMesh& mesh, const Camera& camera) {
  return render_silhouette(mesh.vertices, mesh.faces, camera);
}

std::vector<Silhouette> render_silhouette(const KeyframeSequence& frames, const Camera& camera) {
  frames.validate();
  std::vector<Silhouette> masks(frames.frames.size());
  for (std::size_t n = 0; n < frames.frames.size(); ++n)
    masks[n] = render_silhouette(frames.frames[n], frames.base.faces, camera);
  return masks;
}

void CameraRanges::validate() const {
  if (fov_min > fov_max || elevation_min > elevation_max || azimuth_min > azimuth_max ||
      distance_min > distance_max)
    throw ValidationError("camera ranges: inverted range");
  if (!(fov_min > 0.0 && fov_max < 180.0))
    throw ValidationError("camera ranges: fov must lie in (0, 180) degrees");
  if (!(distance_min > 0.0)) throw ValidationError("camera ranges: distance must be > 0");
}

Camera sample_camera(Rng& rng, const CameraRanges& ranges, int width, int height) {
  ranges.validate();
  const double fov = rng.uniform(ranges.fov_min, ranges.fov_max);
  const double elevation =
      rng.uniform(ranges.elevation_min, ranges.elevation_max) * std::numbers::pi / 180.0;
  const double azimuth =
      rng.uniform(ranges.azimuth_min, ranges.azimuth_max) * std::numbers::pi / 180.0;
  const double distance = rng.uniform(ranges.distance_min, ranges.distance_max);

  Camera cam;
  cam.projection = Camera::Projection::perspective;
  cam.fov_deg = fov;
  cam.width = width;
  cam.height = height;
  cam.target = Eigen::Vector3d::Zero();
  cam.up = Eigen::Vector3d::UnitY();
  cam.position = distance * Eigen::Vector3d(std::cos(elevation) * std::sin(azimuth),
                                            std::sin(elevation),
                                            std::cos(elevation) * std::cos(azimuth));
  cam.validate();
  return cam;
}

}  // namespace animesh
