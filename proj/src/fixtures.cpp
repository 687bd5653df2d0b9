#include "primscene/fixtures.hpp"

#include "primscene/raster.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace primscene {
namespace {

TriMesh painted_box(const Vec3& center, const Vec3& half, int level, const Vec3& tint) {
    Primitive box{PrimitiveKind::Box, {Mat3::Identity(), center}, half};
    TriMesh mesh = tessellate_primitive(box, level);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& p = mesh.vertices[i];
        const double wave = 0.5 + 0.5 * std::sin(2.1 * p.x() + 1.3 * p.y()) * std::cos(1.7 * p.z() - 0.4 * p.y());
        const Vec3 c = tint * (0.7 + 0.3 * wave);
        mesh.vertex_colors[i] = c.cwiseMax(0.0).cwiseMin(1.0);
    }
    return mesh;
}

double unit(std::mt19937& rng) {
    return static_cast<double>(rng()) / 4294967296.0;
}

}  // namespace

std::vector<TriMesh> synth_room_meshes() {
    std::vector<TriMesh> meshes;
    meshes.push_back(painted_box({0.0, 1.4, 0.0}, {3.0, 1.4, 3.0}, 12, {0.85, 0.78, 0.66}));
    meshes.push_back(painted_box({-2.2, 0.9, 2.4}, {0.5, 0.9, 0.3}, 4, {0.35, 0.55, 0.75}));
    meshes.push_back(painted_box({2.0, 0.38, -2.0}, {0.6, 0.38, 0.4}, 4, {0.7, 0.4, 0.3}));
    return meshes;
}

NerfDataset synth_room_dataset(const SynthOptions& options) {
    NerfDataset ds;
    ds.intrinsics = {options.focal, options.focal, options.width / 2.0, options.height / 2.0, options.width,
                     options.height};
    ds.intrinsics.validate();
    const auto room = synth_room_meshes();
    std::mt19937 rng(options.seed);
    const int digits = std::max(5, static_cast<int>(std::to_string(options.frames).size()));
    for (int i = 0; i < options.frames; ++i) {
        const double t = static_cast<double>(i) / std::max(1, options.frames);
        const double azimuth = 2.0 * std::numbers::pi * 3.0 * t + 0.05 * (unit(rng) - 0.5);
        const double radius = 1.9 + 0.4 * unit(rng);
        const double height = 1.1 + 0.6 * unit(rng);
        const Vec3 eye(radius * std::sin(azimuth), height, radius * std::cos(azimuth));
        const Vec3 target(0.3 * (unit(rng) - 0.5), 0.6 + 0.3 * unit(rng), 0.3 * (unit(rng) - 0.5));
        const CameraView view{ds.intrinsics, look_at_pose(eye, target, Vec3::UnitY())};
        const RenderOutput r = render_meshes(view, std::span<const TriMesh>(room), 0.01, 100.0, options.render_workers);
        std::string name = std::to_string(i);
        name.insert(0, static_cast<std::size_t>(digits) - name.size(), '0');
        ds.frames.push_back({"images/frame_" + name + ".png", view.pose, std::make_shared<const Rgb8Image>(quantize(r.color))});
    }
    return ds;
}

std::vector<ObjectSpec> demo_objects(InsertStrategy strategy) {
    auto at = [](double x, double y, double z, double yaw) {
        return Pose{rotation_from_euler_deg(0.0, yaw, 0.0), Vec3(x, y, z)};
    };
    return {
        {"sofa", {PrimitiveKind::Box, at(0.0, 0.45, 0.0, 0.0), {0.9, 0.45, 0.4}}, "a mid-century green velvet sofa",
         strategy},
        {"lamp", {PrimitiveKind::Cylinder, at(0.9, 0.7, 0.2, 0.0), {0.15, 0.7, 0.15}}, "a brass floor lamp",
         strategy},
        {"bed", {PrimitiveKind::Box, at(-1.2, 0.35, -1.0, 30.0), {0.8, 0.35, 1.0}}, "a wooden bed with white linen",
         strategy},
    };
}

}  // namespace primscene
