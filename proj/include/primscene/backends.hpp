#pragma once

#include "primscene/dataset.hpp"
#include "primscene/geometry.hpp"
#include "primscene/image.hpp"
#include "primscene/refgrid.hpp"

#include <array>
#include <memory>
#include <string>

namespace primscene {

struct StylizeRequest {
    RgbImage image;
    std::string prompt;

    void validate() const;
};

struct MeshGenRequest {
    RgbImage image;

    void validate() const;
};

struct GridEditRequest {
    RgbImage color_grid;
    DepthImage depth_grid;
    MaskImage mask_grid;
    std::string prompt;
    GridLayout layout;

    void validate() const;
};

struct RenderSceneRequest {
    CameraView view;

    void validate() const;
};

// Service interfaces. Implementations may be in-process mocks or remote
// clients; either way callers go through Backends, which checks requests
// before dispatch and responses before use.

class Stylizer {
public:
    virtual ~Stylizer() = default;
    virtual RgbImage stylize(const StylizeRequest& req) = 0;
};

class MeshGenerator {
public:
    virtual ~MeshGenerator() = default;
    /// Object-local mesh inside [-0.5, 0.5]^3.
    virtual TriMesh generate_mesh(const MeshGenRequest& req) = 0;
};

class GridEditor {
public:
    virtual ~GridEditor() = default;
    virtual RgbImage edit_grid(const GridEditRequest& req) = 0;
    /// Mock editors cannot generate content, so the pipeline writes the
    /// expected blank-slot composite into the request for them.
    virtual bool wants_blank_precomposite() const { return false; }
};

class SceneRenderer {
public:
    virtual ~SceneRenderer() = default;
    virtual RgbImage render_scene(const RenderSceneRequest& req, const NerfDataset& ds) = 0;
};

struct Backends {
    std::shared_ptr<Stylizer> stylizer;
    std::shared_ptr<MeshGenerator> mesh_generator;
    std::shared_ptr<GridEditor> grid_editor;
    std::shared_ptr<SceneRenderer> scene_renderer;

    static Backends mock();

    RgbImage stylize(const StylizeRequest& req) const;
    TriMesh generate_mesh(const MeshGenRequest& req) const;
    RgbImage edit_grid(const GridEditRequest& req) const;
    RgbImage render_scene(const RenderSceneRequest& req, const NerfDataset& ds) const;
};

/// Per-channel gains in [0.5, 1.0] taken from bytes 0-2 (least significant
/// first) of the prompt's 64-bit FNV-1a hash.
std::array<float, 3> prompt_gains(const std::string& prompt);

class MockStylizer final : public Stylizer {
public:
    RgbImage stylize(const StylizeRequest& req) override;
};

/// Level-32 sphere of radius 0.5 colored with the image's mean RGB.
class MockMeshGenerator final : public MeshGenerator {
public:
    TriMesh generate_mesh(const MeshGenRequest& req) override;
};

/// Identity over the whole grid; see GridEditor::wants_blank_precomposite.
class MockGridEditor final : public GridEditor {
public:
    RgbImage edit_grid(const GridEditRequest& req) override;
    bool wants_blank_precomposite() const override { return true; }
};

/// Returns the image of the frame nearest to the requested view under
/// pose_distance (lowest index on ties), resized to the view if needed.
class MockSceneRenderer final : public SceneRenderer {
public:
    explicit MockSceneRenderer(double rotation_weight = 1.0) : rotation_weight_(rotation_weight) {}
    RgbImage render_scene(const RenderSceneRequest& req, const NerfDataset& ds) override;

private:
    double rotation_weight_;
};

std::size_t nearest_frame(const NerfDataset& ds, const Pose& pose, double rotation_weight = 1.0);

}  // namespace primscene
