#pragma once

#include "p2c/randomization.hpp"
#include "p2c/types.hpp"

#include <optional>

namespace p2c {

struct CameraModel {
  double fx = 465.6;
  double fy = 465.6;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  Vec3 position = Vec3::Zero();        // camera origin in world
  Quat orientation = Quat::Identity(); // camera-to-world rotation

  // x right, y down, z forward (optical axis).
  Vec3 world_to_camera(const Vec3& p_world) const {
    return orientation.conjugate() * (p_world - position);
  }

  void validate() const;

  // Camera looking at `target` from `position`, image x horizontal.
  static CameraModel look_at(const Vec3& position, const Vec3& target, int width = 640,
                             int height = 480, double hfov_deg = 69.0);
};

struct BoundingBox {
  double u_min = 0, v_min = 0, u_max = 0, v_max = 0;

  double center_x() const { return 0.5 * (u_min + u_max); }
  double center_y() const { return 0.5 * (v_min + v_max); }
  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
};

// z_pixel of the 6-D feature vector, normalized by image dimensions.
struct PixelFeatures {
  double c_x = 0, c_y = 0;
  double dc_x = 0, dc_y = 0;
  double dw = 0, dh = 0;

  Eigen::Matrix<double, 6, 1> vector() const {
    Eigen::Matrix<double, 6, 1> v;
    v << c_x, c_y, dc_x, dc_y, dw, dh;
    return v;
  }
};

inline constexpr double kMinCameraDepth = 1e-6;

struct BehindCameraError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Pinhole projection; throws BehindCameraError when depth <= kMinCameraDepth.
Eigen::Vector2d project_point(const CameraModel& cam, const Vec3& p_world);

// Min/max over the 8 projected corners of the oriented box, clipped to the
// image rectangle. nullopt when every corner is behind the camera
// (tracking-lost; the env substitutes the last valid box).
std::optional<BoundingBox> object_bounding_box(const CameraModel& cam, const ObjectState& obj);

// Training-time corner perturbation, uniform in [-max_px, +max_px].
BoundingBox perturb_box(Rng& rng, const BoundingBox& box, const CameraModel& cam,
                        double max_px = 5.0);

PixelFeatures extract_pixel_features(const BoundingBox& box_t, const BoundingBox& box_prev,
                                     const CameraModel& cam);

}  // namespace p2c
