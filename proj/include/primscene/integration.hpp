#pragma once

#include "primscene/backends.hpp"
#include "primscene/dataset.hpp"
#include "primscene/geometry.hpp"
#include "primscene/refgrid.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace primscene {

enum class InsertStrategy { AddNewImages, ModifyExisting };

std::string_view to_string(InsertStrategy strategy);
InsertStrategy parse_strategy(std::string_view text);

struct ObjectSpec {
    std::string name;
    Primitive primitive;
    std::string prompt;
    InsertStrategy strategy = InsertStrategy::AddNewImages;

    void validate() const;
};

struct InsertedObject {
    ObjectSpec spec;
    TriMesh mesh;  // world coordinates
    double bound_radius = 0.0;
    Vec3 centroid = Vec3::Zero();
};

/// Ledger of inserted objects. Every later condition render includes all of
/// these meshes, so prior objects keep their depth and mask.
struct SceneState {
    std::vector<InsertedObject> inserted;
    std::size_t base_dataset_size = 0;

    static SceneState for_dataset(const NerfDataset& ds) { return {{}, ds.size()}; }
    std::vector<const TriMesh*> meshes() const;
    bool contains(const std::string& name) const;
};

struct ReportRow {
    std::string name;
    double stylize_seconds = 0.0;
    double meshgen_seconds = 0.0;
    double integrate_minutes = 0.0;
    double total_minutes = 0.0;
};

struct PipelineReport {
    std::vector<ReportRow> rows;

    static constexpr const char* kCsvHeader =
        "Object,Primitive-Stylization (s),Mesh Generation (s),SIGNeRF (min),Total (min)";
    std::string to_csv() const;
    static PipelineReport from_csv(std::string_view text);
};

struct PipelineOptions {
    GridLayout grid;
    RingOptions ring;
    double near = 0.01;
    double far = 100.0;
    int primitive_level = 16;
    int render_workers = 0;
    int backend_concurrency = 2;
    double rotation_weight = 1.0;
};

enum class Stage { Stylize, GenerateMesh, BuildGrids, EditGrid, UpdateDataset, Done };

std::string_view to_string(Stage stage);

using StageCallback = std::function<void(Stage)>;

struct InsertResult {
    SceneState scene;
    NerfDataset dataset;
    ReportRow row;
    RgbImage stylized;
    ReferenceGrid grid;  // condition grid as sent to the editor (views at tile size)
    std::vector<std::size_t> modified_frames;
    std::vector<std::string> warnings;
};

/// Uniformly scales and centers a mesh from [-0.5,0.5]^3 into the
/// primitive's local box, then applies the primitive pose.
TriMesh place_mesh(const TriMesh& mesh_local, const Primitive& prim);

/// Frames whose frustum may intersect the sphere (plane test, conservative:
/// never drops a frame that sees any part of the sphere).
std::vector<std::size_t> frustum_frames(const NerfDataset& ds, const Vec3& centroid, double bound_radius, double near,
                                        double far);

/// Smallest sphere around the bounding-box center that holds every vertex.
std::pair<Vec3, double> bounding_sphere(const TriMesh& mesh);

InsertResult insert_object(const SceneState& scene, const NerfDataset& ds, const ObjectSpec& spec,
                           const Backends& backends, const PipelineOptions& options,
                           const StageCallback& on_stage = {});

struct RunResult {
    SceneState scene;
    NerfDataset dataset;
    PipelineReport report;
};

struct RunCallbacks {
    std::function<void(std::size_t object_index, Stage stage)> on_stage;
    /// Invoked after each successful object, before the next starts.
    std::function<void(std::size_t object_index, const InsertResult& result)> on_object_done;
};

/// Folds insert_object over specs in order; the first failure propagates and
/// objects already reported through on_object_done stay persisted.
RunResult insert_objects(SceneState scene, NerfDataset ds, std::span<const ObjectSpec> specs,
                         const Backends& backends, const PipelineOptions& options, const RunCallbacks& callbacks = {});

}  // namespace primscene
