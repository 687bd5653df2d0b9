#include "primscene/backends.hpp"

#include "primscene/encoding.hpp"
#include "primscene/error.hpp"

#include <cmath>
#include <limits>

namespace primscene {
namespace {

void require_rgb(const RgbImage& image, const char* what) {
    if (image.empty() || image.channels() != 3) {
        throw Error(ErrorCode::InvalidRequest, std::string(what) + " must be a non-empty RGB image");
    }
}

void check_rgb_response(const RgbImage& out, int width, int height, const char* what) {
    if (!out.same_size(width, height) || out.channels() != 3) {
        throw Error(ErrorCode::DimensionViolation, std::string(what) + " returned " + std::to_string(out.width()) +
                                                       "x" + std::to_string(out.height()) + "x" +
                                                       std::to_string(out.channels()) + ", expected " +
                                                       std::to_string(width) + "x" + std::to_string(height) + "x3");
    }
    for (float v : out.data()) {
        if (!(v >= 0.0f && v <= 1.0f)) {
            throw Error(ErrorCode::InvalidResponse, std::string(what) + " returned pixel values outside [0,1]");
        }
    }
}

template <typename T>
T& require_backend(const std::shared_ptr<T>& ptr, const char* what) {
    if (!ptr) {
        throw Error(ErrorCode::BackendUnreachable, std::string(what) + " backend is not configured");
    }
    return *ptr;
}

}  // namespace

void StylizeRequest::validate() const {
    require_rgb(image, "stylize image");
    if (prompt.empty()) {
        throw Error(ErrorCode::InvalidRequest, "stylize prompt is empty");
    }
}

void MeshGenRequest::validate() const {
    require_rgb(image, "mesh generation image");
}

void GridEditRequest::validate() const {
    layout.validate();
    const int gw = layout.cols * layout.tile_w;
    const int gh = layout.rows * layout.tile_h;
    if (!color_grid.same_size(gw, gh) || color_grid.channels() != 3 || !depth_grid.same_size(gw, gh) ||
        depth_grid.channels() != 1 || !mask_grid.same_size(gw, gh) || mask_grid.channels() != 1) {
        throw Error(ErrorCode::InvalidRequest, "grid images are inconsistent with the layout");
    }
}

void RenderSceneRequest::validate() const {
    try {
        view.intrinsics.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidRequest, "render view: " + e.detail());
    }
    if (!is_rotation(view.pose.rotation, 1e-6) || !view.pose.translation.allFinite()) {
        throw Error(ErrorCode::InvalidRequest, "render view pose is not rigid");
    }
}

Backends Backends::mock() {
    return {std::make_shared<MockStylizer>(), std::make_shared<MockMeshGenerator>(),
            std::make_shared<MockGridEditor>(), std::make_shared<MockSceneRenderer>()};
}

RgbImage Backends::stylize(const StylizeRequest& req) const {
    req.validate();
    RgbImage out = require_backend(stylizer, "stylizer").stylize(req);
    check_rgb_response(out, req.image.width(), req.image.height(), "stylizer");
    return out;
}

TriMesh Backends::generate_mesh(const MeshGenRequest& req) const {
    req.validate();
    TriMesh mesh = require_backend(mesh_generator, "mesh generator").generate_mesh(req);
    validate_mesh(mesh);
    const Aabb unit{Vec3::Constant(-0.5), Vec3::Constant(0.5)};
    if (!unit.contains(bounding_box(mesh), 1e-9)) {
        throw Error(ErrorCode::InvalidMesh, "generated mesh exceeds the unit bounding box");
    }
    return mesh;
}

RgbImage Backends::edit_grid(const GridEditRequest& req) const {
    req.validate();
    RgbImage out = require_backend(grid_editor, "grid editor").edit_grid(req);
    check_rgb_response(out, req.color_grid.width(), req.color_grid.height(), "grid editor");
    return out;
}

RgbImage Backends::render_scene(const RenderSceneRequest& req, const NerfDataset& ds) const {
    req.validate();
    if (ds.empty()) {
        throw Error(ErrorCode::EmptyDataset, "scene render needs at least one frame");
    }
    RgbImage out = require_backend(scene_renderer, "scene renderer").render_scene(req, ds);
    check_rgb_response(out, req.view.intrinsics.width, req.view.intrinsics.height, "scene renderer");
    return out;
}

std::array<float, 3> prompt_gains(const std::string& prompt) {
    const std::uint64_t h = fnv1a64(prompt);
    std::array<float, 3> gains{};
    for (int c = 0; c < 3; ++c) {
        const auto byte = static_cast<float>((h >> (8 * c)) & 0xFFu);
        gains[static_cast<std::size_t>(c)] = 0.5f + 0.5f * byte / 255.0f;
    }
    return gains;
}

RgbImage MockStylizer::stylize(const StylizeRequest& req) {
    const auto gains = prompt_gains(req.prompt);
    RgbImage out = req.image;
    auto px = out.data();
    for (std::size_t i = 0; i < px.size(); ++i) {
        px[i] *= gains[i % 3];
    }
    return out;
}

TriMesh MockMeshGenerator::generate_mesh(const MeshGenRequest& req) {
    Vec3 sum = Vec3::Zero();
    const auto px = req.image.data();
    for (std::size_t i = 0; i < px.size(); i += 3) {
        sum += Vec3(px[i], px[i + 1], px[i + 2]);
    }
    const Vec3 mean = sum / static_cast<double>(req.image.pixel_count());
    TriMesh mesh = tessellate_primitive({PrimitiveKind::Sphere, Pose::identity(), Vec3::Constant(0.5)}, 32);
    for (auto& c : mesh.vertex_colors) {
        c = mean.cwiseMax(0.0).cwiseMin(1.0);
    }
    return mesh;
}

RgbImage MockGridEditor::edit_grid(const GridEditRequest& req) {
    return req.color_grid;
}

std::size_t nearest_frame(const NerfDataset& ds, const Pose& pose, double rotation_weight) {
    if (ds.empty()) {
        throw Error(ErrorCode::EmptyDataset, "dataset has no frames");
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const double d = pose_distance(ds.frames[i].transform, pose, rotation_weight);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

RgbImage MockSceneRenderer::render_scene(const RenderSceneRequest& req, const NerfDataset& ds) {
    const RgbImage image = ds.image(nearest_frame(ds, req.view.pose, rotation_weight_));
    return resize_bilinear(image, req.view.intrinsics.width, req.view.intrinsics.height);
}

}  // namespace primscene
