#include "primscene/geometry.hpp"

#include "primscene/error.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace primscene {

Pose Pose::from_matrix(const Mat4& m) {
    Pose p;
    p.rotation = m.topLeftCorner<3, 3>();
    p.translation = m.topRightCorner<3, 1>();
    return p;
}

Mat4 Pose::matrix() const {
    Mat4 m = Mat4::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

Pose compose(const Pose& a, const Pose& b) {
    return {a.rotation * b.rotation, a.rotation * b.translation + a.translation};
}

Pose invert(const Pose& p) {
    const Mat3 rt = p.rotation.transpose();
    return {rt, -(rt * p.translation)};
}

double orthonormality_drift(const Mat3& r) {
    return (r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff();
}

bool is_rotation(const Mat3& r, double tol) {
    return r.allFinite() && orthonormality_drift(r) <= tol && r.determinant() > 0.0;
}

Mat3 nearest_rotation(const Mat3& r) {
    Eigen::JacobiSVD<Mat3> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    const Mat3 v = svd.matrixV();
    if ((u * v.transpose()).determinant() < 0.0) {
        u.col(2) *= -1.0;
    }
    return u * v.transpose();
}

double geodesic_angle(const Mat3& a, const Mat3& b) {
    const double c = 0.5 * ((a.transpose() * b).trace() - 1.0);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

double pose_distance(const Pose& a, const Pose& b, double rotation_weight) {
    return (a.translation - b.translation).norm() + rotation_weight * geodesic_angle(a.rotation, b.rotation);
}

Mat3 rotation_from_euler_deg(double rx, double ry, double rz) {
    constexpr double deg = std::numbers::pi / 180.0;
    return (Eigen::AngleAxisd(rx * deg, Vec3::UnitX()) * Eigen::AngleAxisd(ry * deg, Vec3::UnitY()) *
            Eigen::AngleAxisd(rz * deg, Vec3::UnitZ()))
        .toRotationMatrix();
}

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) {
        throw Error(ErrorCode::InvalidRequest, "focal lengths must be positive");
    }
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::InvalidRequest, "image dimensions must be positive");
    }
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
        throw Error(ErrorCode::InvalidRequest, "principal point outside the image");
    }
}

CameraIntrinsics CameraIntrinsics::resized(int new_width, int new_height) const {
    const double sx = static_cast<double>(new_width) / width;
    const double sy = static_cast<double>(new_height) / height;
    return {fx * sx, fy * sy, cx * sx, cy * sy, new_width, new_height};
}

Vec3 CameraView::to_camera(const Vec3& p_world) const {
    return pose.rotation.transpose() * (p_world - pose.translation);
}

std::optional<Vec2> project_point(const CameraView& view, const Vec3& p_world) {
    const Vec3 pc = view.to_camera(p_world);
    if (pc.z() >= -kNearEpsilon) {
        return std::nullopt;
    }
    const auto& k = view.intrinsics;
    const double inv = 1.0 / -pc.z();
    return Vec2(k.cx + k.fx * pc.x() * inv, k.cy - k.fy * pc.y() * inv);
}

Vec3 unproject(const CameraView& view, const Vec2& pixel, double depth) {
    const auto& k = view.intrinsics;
    const Vec3 pc((pixel.x() - k.cx) / k.fx * depth, -(pixel.y() - k.cy) / k.fy * depth, -depth);
    return view.pose.apply(pc);
}

Pose look_at_pose(const Vec3& eye, const Vec3& target, const Vec3& up_hint) {
    const Vec3 dir = target - eye;
    if (dir.norm() <= 1e-9) {
        throw Error(ErrorCode::DegenerateDirection, "eye and target coincide");
    }
    const Vec3 forward = dir.normalized();
    const Vec3 side = forward.cross(up_hint);
    if (up_hint.norm() <= 0.0 || side.norm() <= 1e-6 * up_hint.norm()) {
        throw Error(ErrorCode::DegenerateDirection, "up hint is parallel to the viewing direction");
    }
    const Vec3 right = side.normalized();
    const Vec3 up = right.cross(forward);
    Pose p;
    p.rotation.col(0) = right;
    p.rotation.col(1) = up;
    p.rotation.col(2) = -forward;
    p.translation = eye;
    return p;
}

std::string_view to_string(PrimitiveKind kind) {
    switch (kind) {
        case PrimitiveKind::Box: return "box";
        case PrimitiveKind::Sphere: return "sphere";
        case PrimitiveKind::Cylinder: return "cylinder";
    }
    return "box";
}

PrimitiveKind parse_primitive_kind(std::string_view text) {
    if (text == "box") return PrimitiveKind::Box;
    if (text == "sphere") return PrimitiveKind::Sphere;
    if (text == "cylinder") return PrimitiveKind::Cylinder;
    throw Error(ErrorCode::ParseError, "unknown primitive kind '" + std::string(text) + "'");
}

void Primitive::validate() const {
    if (!scale.allFinite() || (scale.array() <= 0.0).any()) {
        throw Error(ErrorCode::DegeneratePrimitive, "primitive scale components must be positive");
    }
    if (!is_rotation(pose.rotation, 1e-6)) {
        throw Error(ErrorCode::NonOrthonormalRotation, "primitive pose rotation is not a rotation");
    }
}

bool Aabb::contains(const Aabb& other, double tol) const {
    return (other.min.array() >= min.array() - tol).all() && (other.max.array() <= max.array() + tol).all();
}

void validate_mesh(const TriMesh& mesh) {
    const auto n = mesh.vertices.size();
    if (n < 4) {
        throw Error(ErrorCode::InvalidMesh, "mesh has " + std::to_string(n) + " vertices, need at least 4");
    }
    if (mesh.triangles.size() < 4) {
        throw Error(ErrorCode::InvalidMesh,
                    "mesh has " + std::to_string(mesh.triangles.size()) + " triangles, need at least 4");
    }
    if (mesh.normals.size() != n || mesh.vertex_colors.size() != n) {
        throw Error(ErrorCode::InvalidMesh, "normal/color count does not match vertex count");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!mesh.vertices[i].allFinite()) {
            throw Error(ErrorCode::InvalidMesh, "vertex " + std::to_string(i) + " is not finite");
        }
        if (!mesh.normals[i].allFinite() || std::abs(mesh.normals[i].norm() - 1.0) > 1e-4) {
            throw Error(ErrorCode::InvalidMesh, "normal " + std::to_string(i) + " is not unit length");
        }
        const Vec3& c = mesh.vertex_colors[i];
        if (!c.allFinite() || (c.array() < 0.0).any() || (c.array() > 1.0).any()) {
            throw Error(ErrorCode::InvalidMesh, "vertex color " + std::to_string(i) + " outside [0,1]");
        }
    }
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        for (auto idx : mesh.triangles[t]) {
            if (idx >= n) {
                throw Error(ErrorCode::InvalidMesh, "triangle " + std::to_string(t) + " references vertex " +
                                                        std::to_string(idx) + " of " + std::to_string(n));
            }
        }
    }
}

Aabb bounding_box(const TriMesh& mesh) {
    Aabb box;
    for (const auto& v : mesh.vertices) {
        box.extend(v);
    }
    return box;
}

double surface_area(const TriMesh& mesh) {
    double area = 0.0;
    for (const auto& t : mesh.triangles) {
        const Vec3& a = mesh.vertices[t[0]];
        area += 0.5 * (mesh.vertices[t[1]] - a).cross(mesh.vertices[t[2]] - a).norm();
    }
    return area;
}

TriMesh transformed(const TriMesh& mesh, const Pose& pose) {
    TriMesh out = mesh;
    for (auto& v : out.vertices) {
        v = pose.apply(v);
    }
    for (auto& n : out.normals) {
        n = pose.rotate(n).normalized();
    }
    return out;
}

namespace {

const Vec3 kMidGray(0.5, 0.5, 0.5);

class MeshBuilder {
public:
    std::uint32_t vertex(const Vec3& p, const Vec3& n) {
        mesh_.vertices.push_back(p);
        mesh_.normals.push_back(n.normalized());
        mesh_.vertex_colors.push_back(kMidGray);
        return static_cast<std::uint32_t>(mesh_.vertices.size() - 1);
    }
    void triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c) { mesh_.triangles.push_back({a, b, c}); }
    void quad(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
        triangle(a, b, c);
        triangle(a, c, d);
    }
    TriMesh take() { return std::move(mesh_); }

private:
    TriMesh mesh_;
};

// Unit shapes below live in the primitive's local frame with the scale already
// applied; normals of the scaled shape are computed analytically.

TriMesh sphere_local(const Vec3& radii, int level) {
    const int lon = 4 * level;
    const int lat = 2 * level;
    MeshBuilder b;
    auto surface = [&](double theta, double phi) {
        // theta: polar angle from +y, phi: azimuth around y.
        const Vec3 unit(std::sin(theta) * std::cos(phi), std::cos(theta), std::sin(theta) * std::sin(phi));
        const Vec3 p = unit.cwiseProduct(radii);
        const Vec3 n = unit.cwiseQuotient(radii);
        return b.vertex(p, n);
    };
    const auto top = b.vertex(Vec3(0, radii.y(), 0), Vec3::UnitY());
    std::vector<std::uint32_t> rings;
    rings.reserve(static_cast<std::size_t>((lat - 1) * lon));
    for (int i = 1; i < lat; ++i) {
        const double theta = std::numbers::pi * i / lat;
        for (int j = 0; j < lon; ++j) {
            rings.push_back(surface(theta, 2.0 * std::numbers::pi * j / lon));
        }
    }
    const auto bottom = b.vertex(Vec3(0, -radii.y(), 0), -Vec3::UnitY());
    auto ring = [&](int i, int j) { return rings[static_cast<std::size_t>(i * lon + (j % lon))]; };
    for (int j = 0; j < lon; ++j) {
        b.triangle(top, ring(0, j + 1), ring(0, j));
    }
    for (int i = 0; i + 1 < lat - 1; ++i) {
        for (int j = 0; j < lon; ++j) {
            b.quad(ring(i, j), ring(i, j + 1), ring(i + 1, j + 1), ring(i + 1, j));
        }
    }
    for (int j = 0; j < lon; ++j) {
        b.triangle(bottom, ring(lat - 2, j), ring(lat - 2, j + 1));
    }
    return b.take();
}

TriMesh box_local(const Vec3& half, int level) {
    MeshBuilder b;
    for (int axis = 0; axis < 3; ++axis) {
        for (double sign : {1.0, -1.0}) {
            const int u_axis = (axis + 1) % 3;
            const int v_axis = (axis + 2) % 3;
            Vec3 normal = Vec3::Zero();
            normal[axis] = sign;
            std::vector<std::uint32_t> grid;
            grid.reserve(static_cast<std::size_t>((level + 1) * (level + 1)));
            for (int i = 0; i <= level; ++i) {
                for (int j = 0; j <= level; ++j) {
                    Vec3 p;
                    p[axis] = sign * half[axis];
                    p[u_axis] = half[u_axis] * (-1.0 + 2.0 * i / level);
                    p[v_axis] = half[v_axis] * (-1.0 + 2.0 * j / level);
                    grid.push_back(b.vertex(p, normal));
                }
            }
            auto at = [&](int i, int j) { return grid[static_cast<std::size_t>(i * (level + 1) + j)]; };
            for (int i = 0; i < level; ++i) {
                for (int j = 0; j < level; ++j) {
                    if (sign > 0) {
                        b.quad(at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                    } else {
                        b.quad(at(i, j), at(i, j + 1), at(i + 1, j + 1), at(i + 1, j));
                    }
                }
            }
        }
    }
    return b.take();
}

TriMesh cylinder_local(const Vec3& scale, int level) {
    const int segments = 4 * level;
    MeshBuilder b;
    const double h = scale.y();
    std::vector<std::uint32_t> side_top, side_bottom, cap_top, cap_bottom;
    for (int j = 0; j < segments; ++j) {
        const double phi = 2.0 * std::numbers::pi * j / segments;
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        const Vec3 rim(scale.x() * c, 0.0, scale.z() * s);
        const Vec3 n(c / scale.x(), 0.0, s / scale.z());
        side_top.push_back(b.vertex(rim + Vec3(0, h, 0), n));
        side_bottom.push_back(b.vertex(rim - Vec3(0, h, 0), n));
        cap_top.push_back(b.vertex(rim + Vec3(0, h, 0), Vec3::UnitY()));
        cap_bottom.push_back(b.vertex(rim - Vec3(0, h, 0), -Vec3::UnitY()));
    }
    const auto top_center = b.vertex(Vec3(0, h, 0), Vec3::UnitY());
    const auto bottom_center = b.vertex(Vec3(0, -h, 0), -Vec3::UnitY());
    for (int j = 0; j < segments; ++j) {
        const auto k = static_cast<std::size_t>(j);
        const auto k1 = static_cast<std::size_t>((j + 1) % segments);
        b.quad(side_bottom[k], side_top[k], side_top[k1], side_bottom[k1]);
        b.triangle(top_center, cap_top[k1], cap_top[k]);
        b.triangle(bottom_center, cap_bottom[k], cap_bottom[k1]);
    }
    return b.take();
}

}  // namespace

TriMesh tessellate_primitive(const Primitive& prim, int level) {
    if (level < 1) {
        throw Error(ErrorCode::InvalidRequest, "tessellation level must be >= 1");
    }
    prim.validate();
    TriMesh local;
    switch (prim.kind) {
        case PrimitiveKind::Box: local = box_local(prim.scale, level); break;
        case PrimitiveKind::Sphere: local = sphere_local(prim.scale, level); break;
        case PrimitiveKind::Cylinder: local = cylinder_local(prim.scale, level); break;
    }
    return transformed(local, prim.pose);
}

}  // namespace primscene
