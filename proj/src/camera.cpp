#include "p2c/camera.hpp"

#include <algorithm>
#include <cmath>

namespace p2c {

void CameraModel::validate() const {
  if (fx <= 0 || fy <= 0) throw ConfigError("camera: focal lengths must be > 0");
  if (cx <= 0 || cx >= width || cy <= 0 || cy >= height)
    throw ConfigError("camera: principal point outside image");
  const Eigen::Matrix3d r = orientation.toRotationMatrix();
  if ((r * r.transpose() - Eigen::Matrix3d::Identity()).norm() > 1e-9)
    throw ConfigError("camera: extrinsic rotation not orthonormal");
}

CameraModel CameraModel::look_at(const Vec3& position, const Vec3& target, int width, int height,
                                 double hfov_deg) {
  CameraModel cam;
  cam.width = width;
  cam.height = height;
  cam.cx = width / 2.0;
  cam.cy = height / 2.0;
  cam.fx = (width / 2.0) / std::tan(hfov_deg * 3.14159265358979323846 / 360.0);
  cam.fy = cam.fx;
  cam.position = position;

  const Vec3 forward = (target - position).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) right = Vec3::UnitX();
  right.normalize();
  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = forward.cross(right);  // image y points down
  r.col(2) = forward;
  cam.orientation = Quat(r).normalized();
  return cam;
}

Eigen::Vector2d project_point(const CameraModel& cam, const Vec3& p_world) {
  const Vec3 pc = cam.world_to_camera(p_world);
  if (pc.z() <= kMinCameraDepth) throw BehindCameraError("project_point: point behind camera");
  return {cam.fx * pc.x() / pc.z() + cam.cx, cam.fy * pc.y() / pc.z() + cam.cy};
}

std::optional<BoundingBox> object_bounding_box(const CameraModel& cam, const ObjectState& obj) {
  BoundingBox box;
  bool any = false;
  for (int mask = 0; mask < 8; ++mask) {
    Vec3 corner(obj.half_extents.x() * ((mask & 1) ? 1 : -1),
                obj.half_extents.y() * ((mask & 2) ? 1 : -1),
                obj.half_extents.z() * ((mask & 4) ? 1 : -1));
    const Vec3 world = obj.position + obj.orientation * corner;
    Eigen::Vector2d uv;
    try {
      uv = project_point(cam, world);
    } catch (const BehindCameraError&) {
      continue;
    }
    if (!any) {
      box.u_min = box.u_max = uv.x();
      box.v_min = box.v_max = uv.y();
      any = true;
    } else {
      box.u_min = std::min(box.u_min, uv.x());
      box.u_max = std::max(box.u_max, uv.x());
      box.v_min = std::min(box.v_min, uv.y());
      box.v_max = std::max(box.v_max, uv.y());
    }
  }
  if (!any) return std::nullopt;
  box.u_min = std::clamp(box.u_min, 0.0, static_cast<double>(cam.width));
  box.u_max = std::clamp(box.u_max, 0.0, static_cast<double>(cam.width));
  box.v_min = std::clamp(box.v_min, 0.0, static_cast<double>(cam.height));
  box.v_max = std::clamp(box.v_max, 0.0, static_cast<double>(cam.height));
  return box;
}

BoundingBox perturb_box(Rng& rng, const BoundingBox& box, const CameraModel& cam, double max_px) {
  if (max_px <= 0.0) return box;
  std::uniform_real_distribution<double> u(-max_px, max_px);
  double u0 = box.u_min + u(rng), v0 = box.v_min + u(rng);
  double u1 = box.u_max + u(rng), v1 = box.v_max + u(rng);
  BoundingBox out;
  out.u_min = std::clamp(std::min(u0, u1), 0.0, static_cast<double>(cam.width));
  out.u_max = std::clamp(std::max(u0, u1), 0.0, static_cast<double>(cam.width));
  out.v_min = std::clamp(std::min(v0, v1), 0.0, static_cast<double>(cam.height));
  out.v_max = std::clamp(std::max(v0, v1), 0.0, static_cast<double>(cam.height));
  return out;
}

PixelFeatures extract_pixel_features(const BoundingBox& box_t, const BoundingBox& box_prev,
                                     const CameraModel& cam) {
  const double w = cam.width, h = cam.height;
  PixelFeatures f;
  f.c_x = box_t.center_x() / w;
  f.c_y = box_t.center_y() / h;
  f.dc_x = (box_t.center_x() - box_prev.center_x()) / w;
  f.dc_y = (box_t.center_y() - box_prev.center_y()) / h;
  f.dw = (box_t.width() - box_prev.width()) / w;
  f.dh = (box_t.height() - box_prev.height()) / h;
  return f;
}

}  // namespace p2c
