#pragma once

#include "primscene/backends.hpp"
#include "primscene/error.hpp"

#include <atomic>
#include <limits>
#include <string>
#include <vector>

namespace testing {

enum class Target { Stylizer, MeshGenerator, GridEditor, SceneRenderer };

struct FaultPattern {
    std::string name;
    Target target;
    primscene::ErrorCode expected;
};

/// Twenty ways a backend can break its response contract.
inline std::vector<FaultPattern> fault_patterns() {
    using primscene::ErrorCode;
    return {
        {"stylize-wider", Target::Stylizer, ErrorCode::DimensionViolation},
        {"stylize-shorter", Target::Stylizer, ErrorCode::DimensionViolation},
        {"stylize-gray", Target::Stylizer, ErrorCode::DimensionViolation},
        {"stylize-empty", Target::Stylizer, ErrorCode::DimensionViolation},
        {"stylize-nan", Target::Stylizer, ErrorCode::InvalidResponse},
        {"stylize-overexposed", Target::Stylizer, ErrorCode::InvalidResponse},
        {"stylize-negative", Target::Stylizer, ErrorCode::InvalidResponse},
        {"mesh-bad-index", Target::MeshGenerator, ErrorCode::InvalidMesh},
        {"mesh-long-normals", Target::MeshGenerator, ErrorCode::InvalidMesh},
        {"mesh-too-small", Target::MeshGenerator, ErrorCode::InvalidMesh},
        {"mesh-color-range", Target::MeshGenerator, ErrorCode::InvalidMesh},
        {"mesh-outside-unit-box", Target::MeshGenerator, ErrorCode::InvalidMesh},
        {"mesh-missing-normals", Target::MeshGenerator, ErrorCode::InvalidMesh},
        {"mesh-nan-vertex", Target::MeshGenerator, ErrorCode::InvalidMesh},
        {"mesh-empty", Target::MeshGenerator, ErrorCode::InvalidMesh},
        {"grid-narrow", Target::GridEditor, ErrorCode::DimensionViolation},
        {"grid-missing-row", Target::GridEditor, ErrorCode::DimensionViolation},
        {"grid-out-of-range", Target::GridEditor, ErrorCode::InvalidResponse},
        {"render-wrong-size", Target::SceneRenderer, ErrorCode::DimensionViolation},
        {"render-nan", Target::SceneRenderer, ErrorCode::InvalidResponse},
    };
}

/// Wraps the mocks and corrupts responses of the targeted service from call
/// number `first_bad` (0-based) on.
class FaultyBackend final : public primscene::Stylizer,
                            public primscene::MeshGenerator,
                            public primscene::GridEditor,
                            public primscene::SceneRenderer {
public:
    FaultyBackend(FaultPattern pattern, int first_bad) : pattern_(std::move(pattern)), first_bad_(first_bad) {}

    static primscene::Backends make(const FaultPattern& pattern, int first_bad) {
        auto f = std::make_shared<FaultyBackend>(pattern, first_bad);
        return {f, f, f, f};
    }

    primscene::RgbImage stylize(const primscene::StylizeRequest& req) override {
        auto out = base_.stylizer->stylize(req);
        return hit(Target::Stylizer) ? corrupt_image(out) : out;
    }
    primscene::TriMesh generate_mesh(const primscene::MeshGenRequest& req) override {
        auto mesh = base_.mesh_generator->generate_mesh(req);
        return hit(Target::MeshGenerator) ? corrupt_mesh(mesh) : mesh;
    }
    primscene::RgbImage edit_grid(const primscene::GridEditRequest& req) override {
        auto out = base_.grid_editor->edit_grid(req);
        if (!hit(Target::GridEditor)) return out;
        if (pattern_.name == "grid-narrow") return primscene::RgbImage(out.width() - 1, out.height(), 3, 0.5f);
        if (pattern_.name == "grid-missing-row") {
            return primscene::RgbImage(out.width(), out.height() - req.layout.tile_h, 3, 0.5f);
        }
        out.data()[7] = 2.0f;
        return out;
    }
    bool wants_blank_precomposite() const override { return true; }
    primscene::RgbImage render_scene(const primscene::RenderSceneRequest& req, const primscene::NerfDataset& ds) override {
        auto out = base_.scene_renderer->render_scene(req, ds);
        if (!hit(Target::SceneRenderer)) return out;
        if (pattern_.name == "render-wrong-size") return primscene::RgbImage(out.width() / 2, out.height(), 3, 0.5f);
        out.data()[0] = std::numeric_limits<float>::quiet_NaN();
        return out;
    }

private:
    bool hit(Target t) {
        if (t != pattern_.target) return false;
        return calls_++ >= first_bad_;
    }

    primscene::RgbImage corrupt_image(primscene::RgbImage img) const {
        const auto& n = pattern_.name;
        if (n == "stylize-wider") return primscene::RgbImage(img.width() + 1, img.height(), 3, 0.5f);
        if (n == "stylize-shorter") return primscene::RgbImage(img.width(), img.height() - 1, 3, 0.5f);
        if (n == "stylize-gray") return primscene::RgbImage(img.width(), img.height(), 1, 0.5f);
        if (n == "stylize-empty") return {};
        if (n == "stylize-nan") img.data()[img.data().size() / 2] = std::numeric_limits<float>::quiet_NaN();
        if (n == "stylize-overexposed") img.data()[0] = 1.01f;
        if (n == "stylize-negative") img.data()[4] = -0.2f;
        return img;
    }

    primscene::TriMesh corrupt_mesh(primscene::TriMesh m) const {
        const auto& n = pattern_.name;
        if (n == "mesh-bad-index") m.triangles[3][2] = static_cast<std::uint32_t>(m.vertices.size() + 5);
        if (n == "mesh-long-normals") m.normals[10] *= 1.5;
        if (n == "mesh-too-small") {
            m.vertices.resize(3);
            m.normals.resize(3);
            m.vertex_colors.resize(3);
            m.triangles = {{0, 1, 2}};
        }
        if (n == "mesh-color-range") m.vertex_colors[0] = primscene::Vec3(1.2, 0, 0);
        if (n == "mesh-outside-unit-box") {
            for (auto& v : m.vertices) v *= 1.5;
        }
        if (n == "mesh-missing-normals") m.normals.pop_back();
        if (n == "mesh-nan-vertex") m.vertices[1].x() = std::numeric_limits<double>::quiet_NaN();
        if (n == "mesh-empty") m = {};
        return m;
    }

    primscene::Backends base_ = primscene::Backends::mock();
    FaultPattern pattern_;
    int first_bad_;
    std::atomic<int> calls_{0};
};

}  // namespace testing
