#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace primscene {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Camera coordinates follow the OpenGL/Nerfstudio convention: the camera looks
// along local -z with +y up, and poses map camera (or object) space to world.
// Pixel origin is the top-left corner and v grows downward.
inline constexpr double kNearEpsilon = 1e-6;

/// Rigid transform (rotation then translation).
struct Pose {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static Pose identity() { return {}; }
    static Pose from_matrix(const Mat4& m);

    Mat4 matrix() const;
    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    Vec3 rotate(const Vec3& v) const { return rotation * v; }
};

/// a ∘ b: applies b first, then a.
Pose compose(const Pose& a, const Pose& b);
Pose invert(const Pose& p);

/// Largest elementwise deviation of RᵀR from identity.
double orthonormality_drift(const Mat3& r);
bool is_rotation(const Mat3& r, double tol = 1e-6);
/// SVD projection onto SO(3); assumes det(r) > 0.
Mat3 nearest_rotation(const Mat3& r);
double geodesic_angle(const Mat3& a, const Mat3& b);
/// |t1 - t2| + weight * geodesic_angle(R1, R2).
double pose_distance(const Pose& a, const Pose& b, double rotation_weight = 1.0);
/// Intrinsic XYZ Euler angles in degrees.
Mat3 rotation_from_euler_deg(double rx, double ry, double rz);

struct CameraIntrinsics {
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 1;
    int height = 1;

    void validate() const;
    /// Same field of view, resampled to a new image size.
    CameraIntrinsics resized(int new_width, int new_height) const;

    bool operator==(const CameraIntrinsics&) const = default;
};

struct CameraView {
    CameraIntrinsics intrinsics;
    Pose pose;  // camera-to-world

    Vec3 position() const { return pose.translation; }
    Vec3 forward() const { return -pose.rotation.col(2); }
    Vec3 to_camera(const Vec3& p_world) const;
};

std::optional<Vec2> project_point(const CameraView& view, const Vec3& p_world);
/// Inverse of project_point at the given -z depth.
Vec3 unproject(const CameraView& view, const Vec2& pixel, double depth);

Pose look_at_pose(const Vec3& eye, const Vec3& target, const Vec3& up_hint);

enum class PrimitiveKind { Box, Sphere, Cylinder };

std::string_view to_string(PrimitiveKind kind);
PrimitiveKind parse_primitive_kind(std::string_view text);

/// User-placed proxy shape. scale holds half-extents for a box, radii for a
/// sphere, and (radius x, half-height, radius z) for a y-axis cylinder, so
/// scale is always the half-extent of the local bounding box.
struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Box;
    Pose pose;
    Vec3 scale = Vec3::Ones();

    void validate() const;
};

using Triangle = std::array<std::uint32_t, 3>;

struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<Vec3> normals;
    std::vector<Triangle> triangles;
    std::vector<Vec3> vertex_colors;
};

struct Aabb {
    Vec3 min = Vec3::Constant(std::numeric_limits<double>::infinity());
    Vec3 max = Vec3::Constant(-std::numeric_limits<double>::infinity());

    void extend(const Vec3& p) {
        min = min.cwiseMin(p);
        max = max.cwiseMax(p);
    }
    Vec3 center() const { return 0.5 * (min + max); }
    Vec3 extent() const { return max - min; }
    bool contains(const Aabb& other, double tol = 0.0) const;
};

/// Throws InvalidMesh naming the first violated invariant.
void validate_mesh(const TriMesh& mesh);
Aabb bounding_box(const TriMesh& mesh);
double surface_area(const TriMesh& mesh);
TriMesh transformed(const TriMesh& mesh, const Pose& pose);

/// Watertight world-space mesh of a primitive. Sphere: UV sphere with
/// 4*level longitudes and 2*level latitude bands. Box: each face split into
/// level x level quads (12*level^2 triangles). Cylinder: 4*level radial
/// segments plus fan caps.
TriMesh tessellate_primitive(const Primitive& prim, int level);

}  // namespace primscene
