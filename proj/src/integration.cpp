#include "primscene/integration.hpp"

#include "primscene/error.hpp"
#include "primscene/raster.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace primscene {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Runs fn(i) for i in [0, n) on up to `workers` threads. Results go into
// caller-owned slots, so completion order never matters. The first exception
// is rethrown after all workers stop.
template <typename F>
void bounded_for(std::size_t n, int workers, F&& fn) {
    workers = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = n;
                    }
                }
            });
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

std::vector<const TriMesh*> with_mesh(const SceneState& scene, const TriMesh& mesh) {
    auto meshes = scene.meshes();
    meshes.push_back(&mesh);
    return meshes;
}

CameraView at_tile_size(const CameraView& view, const GridLayout& layout) {
    return {view.intrinsics.resized(layout.tile_w, layout.tile_h), view.pose};
}

}  // namespace

std::string_view to_string(InsertStrategy strategy) {
    return strategy == InsertStrategy::AddNewImages ? "add_new_images" : "modify_existing";
}

InsertStrategy parse_strategy(std::string_view text) {
    if (text == "add_new_images" || text == "add") return InsertStrategy::AddNewImages;
    if (text == "modify_existing" || text == "modify") return InsertStrategy::ModifyExisting;
    throw Error(ErrorCode::ParseError, "unknown strategy '" + std::string(text) + "'");
}

std::string_view to_string(Stage stage) {
    switch (stage) {
        case Stage::Stylize: return "stylize";
        case Stage::GenerateMesh: return "generate_mesh";
        case Stage::BuildGrids: return "build_grids";
        case Stage::EditGrid: return "edit_grid";
        case Stage::UpdateDataset: return "update_dataset";
        case Stage::Done: return "done";
    }
    return "done";
}

void ObjectSpec::validate() const {
    if (name.empty()) {
        throw Error(ErrorCode::InvalidRequest, "object name is empty");
    }
    if (prompt.empty()) {
        throw Error(ErrorCode::InvalidRequest, "object '" + name + "' has an empty prompt");
    }
    primitive.validate();
}

std::vector<const TriMesh*> SceneState::meshes() const {
    std::vector<const TriMesh*> out;
    out.reserve(inserted.size() + 1);
    for (const auto& obj : inserted) {
        out.push_back(&obj.mesh);
    }
    return out;
}

bool SceneState::contains(const std::string& name) const {
    return std::any_of(inserted.begin(), inserted.end(), [&](const auto& o) { return o.spec.name == name; });
}

std::string PipelineReport::to_csv() const {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    out << std::fixed;
    for (const auto& r : rows) {
        out << r.name << ',' << std::setprecision(3) << r.stylize_seconds << ',' << r.meshgen_seconds << ','
            << std::setprecision(4) << r.integrate_minutes << ',' << r.total_minutes << '\n';
    }
    return out.str();
}

PipelineReport PipelineReport::from_csv(std::string_view text) {
    PipelineReport report;
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw Error(ErrorCode::ParseError, "report CSV header mismatch");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream fields(line);
        ReportRow row;
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(fields, cell, ',')) cells.push_back(cell);
        if (cells.size() != 5) {
            throw Error(ErrorCode::ParseError, "report CSV row needs 5 columns: " + line);
        }
        try {
            row = {cells[0], std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3]), std::stod(cells[4])};
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError, "report CSV row has a non-numeric value: " + line);
        }
        report.rows.push_back(row);
    }
    return report;
}

TriMesh place_mesh(const TriMesh& mesh_local, const Primitive& prim) {
    if (!prim.scale.allFinite() || (prim.scale.array() <= 0.0).any()) {
        throw Error(ErrorCode::DegeneratePrimitive, "primitive bounding box has zero volume");
    }
    const Aabb box = bounding_box(mesh_local);
    if (!Aabb{Vec3::Constant(-0.5), Vec3::Constant(0.5)}.contains(box, 1e-9)) {
        throw Error(ErrorCode::InvalidMesh, "mesh to place is not inside [-0.5,0.5]^3");
    }
    const Vec3 extent = box.extent();
    double k = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        if (extent[i] > 1e-12) {
            k = std::min(k, 2.0 * prim.scale[i] / extent[i]);
        }
    }
    if (!std::isfinite(k)) {
        throw Error(ErrorCode::InvalidMesh, "mesh to place has an empty bounding box");
    }
    const Vec3 center = box.center();
    TriMesh out = mesh_local;
    for (auto& v : out.vertices) {
        v = prim.pose.apply(k * (v - center));
    }
    for (auto& n : out.normals) {
        n = prim.pose.rotate(n).normalized();
    }
    return out;
}

std::pair<Vec3, double> bounding_sphere(const TriMesh& mesh) {
    const Vec3 c = bounding_box(mesh).center();
    double r = 0.0;
    for (const auto& v : mesh.vertices) {
        r = std::max(r, (v - c).norm());
    }
    return {c, r};
}

std::vector<std::size_t> frustum_frames(const NerfDataset& ds, const Vec3& centroid, double bound_radius, double near,
                                        double far) {
    if (!(bound_radius > 0.0)) {
        throw Error(ErrorCode::InvalidRequest, "bounding radius must be positive");
    }
    const auto& k = ds.intrinsics;
    // Side planes through the camera center, as x/(-z) and y/(-z) limits.
    const double left = (0.0 - k.cx) / k.fx;
    const double right = (k.width - k.cx) / k.fx;
    const double top = k.cy / k.fy;
    const double bottom = -(k.height - k.cy) / k.fy;
    const std::array<Vec3, 4> normals = {Vec3(1, 0, left).normalized(), Vec3(-1, 0, -right).normalized(),
                                         Vec3(0, 1, bottom).normalized(), Vec3(0, -1, -top).normalized()};
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const Vec3 c = ds.view(i).to_camera(centroid);
        bool inside = (-c.z() - near >= -bound_radius) && (c.z() + far >= -bound_radius);
        for (const auto& n : normals) {
            inside = inside && n.dot(c) >= -bound_radius;
        }
        if (inside) {
            out.push_back(i);
        }
    }
    return out;
}

InsertResult insert_object(const SceneState& scene, const NerfDataset& ds, const ObjectSpec& spec,
                           const Backends& backends, const PipelineOptions& options, const StageCallback& on_stage) {
    spec.validate();
    options.grid.validate();
    if (scene.contains(spec.name)) {
        throw Error(ErrorCode::InvalidRequest, "object '" + spec.name + "' is already in the scene");
    }
    if (ds.empty()) {
        throw Error(ErrorCode::EmptyDataset, "cannot insert into a dataset without frames");
    }
    auto stage = [&](Stage s) {
        if (on_stage) on_stage(s);
    };
    const auto t_start = Clock::now();
    const auto& layout = options.grid;
    const int object_index = static_cast<int>(scene.inserted.size()) + 1;
    const std::size_t original_frames = scene.base_dataset_size ? scene.base_dataset_size : ds.size();

    InsertResult result;
    result.row.name = spec.name;

    // (1) Render the primitive from the dataset camera closest to a camera
    // aimed at it, over the scene background, and stylize that view.
    stage(Stage::Stylize);
    const TriMesh proxy = tessellate_primitive(spec.primitive, options.primitive_level);
    const auto [proxy_center, proxy_radius] = bounding_sphere(proxy);
    const CameraView aim =
        select_reference_cameras(proxy_center, proxy_radius, 1, ds.intrinsics, options.ring).front();
    const CameraView source_view = ds.view(nearest_frame(ds, aim.pose, options.rotation_weight));
    const RgbImage background = backends.render_scene({source_view}, ds);
    const TriMesh* proxy_ptr = &proxy;
    const RenderOutput proxy_render = render_meshes(source_view, std::span(&proxy_ptr, 1), options.near, options.far,
                                                    options.render_workers);
    result.stylized = backends.stylize({composite_over(background, proxy_render), spec.prompt});
    result.row.stylize_seconds = seconds_since(t_start);

    // (2) Image-to-3D.
    stage(Stage::GenerateMesh);
    const auto t_mesh = Clock::now();
    const TriMesh local = backends.generate_mesh({result.stylized});
    result.row.meshgen_seconds = seconds_since(t_mesh);
    const auto t_integrate = Clock::now();

    // (3) Placement and reference ring.
    stage(Stage::BuildGrids);
    TriMesh world = place_mesh(local, spec.primitive);
    const auto [centroid, radius] = bounding_sphere(world);
    const auto meshes = with_mesh(scene, world);
    const auto ref_views =
        select_reference_cameras(centroid, radius, layout.slots() - 1, ds.intrinsics, options.ring);

    // (4) Condition tiles: every mesh in the ledger plus the new one, over the
    // scene background at tile resolution.
    std::vector<RenderOutput> tiles(ref_views.size());
    std::vector<CameraView> tile_views(ref_views.size());
    for (std::size_t i = 0; i < ref_views.size(); ++i) {
        tile_views[i] = at_tile_size(ref_views[i], layout);
        RenderOutput cond = render_meshes(tile_views[i], meshes, options.near, options.far, options.render_workers);
        const RgbImage bg = resize_bilinear(backends.render_scene({ref_views[i]}, ds), layout.tile_w, layout.tile_h);
        cond.color = composite_over(bg, cond);
        tiles[i] = std::move(cond);
    }
    result.grid = assemble_grid(tiles, layout.blank_index, layout.rows, layout.cols, tile_views);
    const GridEditRequest base_request{result.grid.color_grid, result.grid.depth_grid, result.grid.mask_grid,
                                       spec.prompt, layout};

    NerfDataset updated = ds;
    if (spec.strategy == InsertStrategy::AddNewImages) {
        stage(Stage::EditGrid);
        const RgbImage edited = backends.edit_grid(base_request);
        stage(Stage::UpdateDataset);
        std::vector<NewFrame> frames;
        frames.reserve(ref_views.size());
        for (std::size_t i = 0; i < ref_views.size(); ++i) {
            const RgbImage tile = extract_tile(edited, layout, slot_of_tile(layout, static_cast<int>(i)));
            frames.push_back(
                {ref_views[i], resize_bicubic(tile, ds.intrinsics.width, ds.intrinsics.height)});
        }
        updated = add_frames(ds, frames, object_index);
    } else {
        // Frames added for earlier objects are never re-edited.
        std::vector<std::size_t> candidates;
        for (auto f : frustum_frames(ds, centroid, radius, options.near, options.far)) {
            if (f < original_frames) candidates.push_back(f);
        }
        if (candidates.empty()) {
            const std::string msg = "object '" + spec.name + "' is outside every original camera frustum; no frames modified";
            spdlog::warn("{}", msg);
            result.warnings.push_back(msg);
        }
        stage(Stage::EditGrid);
        const bool precomposite = backends.grid_editor && backends.grid_editor->wants_blank_precomposite();
        std::vector<std::optional<RgbImage>> replaced(candidates.size());
        bounded_for(candidates.size(), options.backend_concurrency, [&](std::size_t j) {
            const std::size_t f = candidates[j];
            const CameraView view = ds.view(f);
            const RenderOutput full = render_meshes(view, meshes, options.near, options.far, 1);
            if (popcount(full.mask) == 0) {
                return;
            }
            const CameraView tile_view = at_tile_size(view, layout);
            const RenderOutput cond = render_meshes(tile_view, meshes, options.near, options.far, 1);
            const RgbImage frame_image = ds.image(f);
            GridEditRequest req = base_request;
            paste_tile(req.depth_grid, layout, layout.blank_index, cond.depth);
            paste_tile(req.mask_grid, layout, layout.blank_index, cond.mask);
            if (precomposite) {
                const RgbImage small = resize_bilinear(frame_image, layout.tile_w, layout.tile_h);
                paste_tile(req.color_grid, layout, layout.blank_index, composite_over(small, cond));
            }
            const RgbImage edited = backends.edit_grid(req);
            const RgbImage blank = extract_tile(edited, layout, layout.blank_index);
            const RenderOutput paste{resize_bicubic(blank, ds.intrinsics.width, ds.intrinsics.height), full.depth,
                                     full.mask};
            replaced[j] = composite_over(frame_image, paste);
        });
        stage(Stage::UpdateDataset);
        for (std::size_t j = 0; j < candidates.size(); ++j) {
            if (replaced[j]) {
                updated = replace_frame_image(updated, candidates[j], *replaced[j]);
                result.modified_frames.push_back(candidates[j]);
            }
        }
    }

    result.scene = scene;
    if (result.scene.base_dataset_size == 0) {
        result.scene.base_dataset_size = original_frames;
    }
    result.scene.inserted.push_back({spec, std::move(world), radius, centroid});
    result.dataset = std::move(updated);
    result.row.integrate_minutes = seconds_since(t_integrate) / 60.0;
    result.row.total_minutes = std::max(seconds_since(t_start) / 60.0, result.row.integrate_minutes);
    stage(Stage::Done);
    return result;
}

RunResult insert_objects(SceneState scene, NerfDataset ds, std::span<const ObjectSpec> specs,
                         const Backends& backends, const PipelineOptions& options, const RunCallbacks& callbacks) {
    if (specs.empty()) {
        throw Error(ErrorCode::InvalidRequest, "no objects queued");
    }
    std::unordered_set<std::string> names;
    for (const auto& obj : scene.inserted) {
        names.insert(obj.spec.name);
    }
    for (const auto& spec : specs) {
        spec.validate();
        if (!names.insert(spec.name).second) {
            throw Error(ErrorCode::InvalidRequest, "duplicate object name '" + spec.name + "'");
        }
    }
    if (scene.base_dataset_size == 0) {
        scene.base_dataset_size = ds.size();
    }
    RunResult run;
    for (std::size_t i = 0; i < specs.size(); ++i) {
        StageCallback on_stage;
        if (callbacks.on_stage) {
            on_stage = [&, i](Stage s) { callbacks.on_stage(i, s); };
        }
        InsertResult step = insert_object(scene, ds, specs[i], backends, options, on_stage);
        if (callbacks.on_object_done) {
            callbacks.on_object_done(i, step);
        }
        run.report.rows.push_back(step.row);
        scene = std::move(step.scene);
        ds = std::move(step.dataset);
    }
    run.scene = std::move(scene);
    run.dataset = std::move(ds);
    return run;
}

}  // namespace primscene
