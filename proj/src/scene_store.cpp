#include "primscene/scene_store.hpp"

#include "primscene/encoding.hpp"
#include "primscene/error.hpp"
#include "primscene/mesh_io.hpp"
#include "primscene/raster.hpp"
#include "primscene/refgrid.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

using nlohmann::json;
namespace fs = std::filesystem;

namespace primscene {
namespace {

json vec_json(const Vec3& v) {
    return json::array({v.x(), v.y(), v.z()});
}

Vec3 vec_from(const json& v, const char* name) {
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
        throw Error(ErrorCode::InvalidRequest, std::string("'") + name + "' must be an array of 3 numbers");
    }
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

const json& member(const json& obj, const char* name) {
    if (!obj.is_object() || !obj.contains(name)) {
        throw Error(ErrorCode::InvalidRequest, std::string("missing field '") + name + "'");
    }
    return obj.at(name);
}

std::string string_member(const json& obj, const char* name) {
    const json& v = member(obj, name);
    if (!v.is_string()) {
        throw Error(ErrorCode::InvalidRequest, std::string("'") + name + "' must be a string");
    }
    return v.get<std::string>();
}

bool valid_name(const std::string& name) {
    return !name.empty() && name.size() <= 64 && std::all_of(name.begin(), name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    });
}

json parse_json_file(const fs::path& path) {
    const Bytes bytes = read_file(path);
    try {
        return json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
    }
}

void write_json(const fs::path& path, const json& value) {
    write_file(path, value.dump(2) + "\n");
}

std::string mesh_file(std::size_t ledger_index, const std::string& name) {
    return "meshes/obj" + std::to_string(ledger_index + 1) + "_" + name + ".obj";
}

}  // namespace

json spec_to_json(const ObjectSpec& spec) {
    const Mat3& r = spec.primitive.pose.rotation;
    json rotation = json::array();
    for (int i = 0; i < 3; ++i) {
        rotation.push_back(json::array({r(i, 0), r(i, 1), r(i, 2)}));
    }
    return {{"name", spec.name},
            {"kind", to_string(spec.primitive.kind)},
            {"translation", vec_json(spec.primitive.pose.translation)},
            {"rotation", rotation},
            {"scale", vec_json(spec.primitive.scale)},
            {"prompt", spec.prompt},
            {"strategy", to_string(spec.strategy)}};
}

ObjectSpec spec_from_json(const json& value) {
    if (!value.is_object()) {
        throw Error(ErrorCode::InvalidRequest, "object spec must be a JSON object");
    }
    ObjectSpec spec;
    spec.name = string_member(value, "name");
    if (!valid_name(spec.name)) {
        throw Error(ErrorCode::InvalidRequest, "object name must be 1-64 characters of [A-Za-z0-9_-]");
    }
    try {
        spec.primitive.kind = parse_primitive_kind(string_member(value, "kind"));
        if (value.contains("strategy")) {
            spec.strategy = parse_strategy(string_member(value, "strategy"));
        }
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidRequest, e.detail());
    }
    spec.primitive.pose.translation = vec_from(member(value, "translation"), "translation");
    if (value.contains("rotation")) {
        const json& rows = value.at("rotation");
        if (!rows.is_array() || rows.size() != 3) {
            throw Error(ErrorCode::InvalidRequest, "'rotation' must be a 3x3 row-major array");
        }
        for (int i = 0; i < 3; ++i) {
            spec.primitive.pose.rotation.row(i) = vec_from(rows[static_cast<std::size_t>(i)], "rotation").transpose();
        }
        if (!is_rotation(spec.primitive.pose.rotation)) {
            throw Error(ErrorCode::InvalidRequest, "'rotation' is not a proper rotation matrix");
        }
    }
    spec.primitive.scale = vec_from(member(value, "scale"), "scale");
    spec.prompt = string_member(value, "prompt");
    try {
        spec.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::InvalidRequest, e.detail());
    }
    return spec;
}

std::string_view to_string(JobStatus status) {
    switch (status) {
        case JobStatus::Idle: return "idle";
        case JobStatus::Running: return "running";
        case JobStatus::Done: return "done";
        case JobStatus::Failed: return "failed";
    }
    return "idle";
}

JobStatus parse_job_status(std::string_view text) {
    for (auto s : {JobStatus::Idle, JobStatus::Running, JobStatus::Done, JobStatus::Failed}) {
        if (to_string(s) == text) return s;
    }
    throw Error(ErrorCode::ParseError, "unknown job status '" + std::string(text) + "'");
}

json JobState::to_json() const {
    json rows = json::array();
    for (const auto& r : timings) {
        rows.push_back({{"name", r.name},
                        {"stylize_seconds", r.stylize_seconds},
                        {"meshgen_seconds", r.meshgen_seconds},
                        {"integrate_minutes", r.integrate_minutes},
                        {"total_minutes", r.total_minutes}});
    }
    json out = {{"status", to_string(status)},
                {"object_index", object_index},
                {"object_count", object_count},
                {"object", object_name},
                {"stage", stage ? json(to_string(*stage)) : json(nullptr)},
                {"progress", progress},
                {"artifacts", artifacts},
                {"timings", rows}};
    if (status == JobStatus::Failed) {
        out["error"] = {{"code", error_code}, {"message", error_message}};
    }
    return out;
}

JobState JobState::from_json(const json& value) {
    try {
        JobState job;
        job.status = parse_job_status(value.at("status").get<std::string>());
        job.object_index = value.at("object_index").get<std::size_t>();
        job.object_count = value.at("object_count").get<std::size_t>();
        job.object_name = value.at("object").get<std::string>();
        if (!value.at("stage").is_null()) {
            const auto text = value.at("stage").get<std::string>();
            for (auto s : {Stage::Stylize, Stage::GenerateMesh, Stage::BuildGrids, Stage::EditGrid,
                           Stage::UpdateDataset, Stage::Done}) {
                if (to_string(s) == text) job.stage = s;
            }
        }
        job.progress = value.at("progress").get<double>();
        job.artifacts = value.at("artifacts").get<std::vector<std::string>>();
        for (const auto& r : value.at("timings")) {
            job.timings.push_back({r.at("name").get<std::string>(), r.at("stylize_seconds").get<double>(),
                                   r.at("meshgen_seconds").get<double>(), r.at("integrate_minutes").get<double>(),
                                   r.at("total_minutes").get<double>()});
        }
        if (value.contains("error")) {
            job.error_code = value.at("error").at("code").get<std::string>();
            job.error_message = value.at("error").at("message").get<std::string>();
        }
        return job;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("job.json: ") + e.what());
    }
}

SceneDir SceneDir::create(const fs::path& root, const fs::path& dataset) {
    if (fs::exists(root / "scene.json")) {
        throw Error(ErrorCode::Conflict, root.string() + " already holds a scene");
    }
    const fs::path ds_path = fs::absolute(dataset).lexically_normal();
    load_dataset(ds_path);
    std::error_code ec;
    fs::create_directories(root, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, "cannot create " + root.string() + ": " + ec.message());
    }
    write_json(root / "scene.json", {{"dataset", ds_path.string()}, {"objects", json::array()}});
    return SceneDir(root);
}

bool SceneDir::exists() const {
    return fs::is_regular_file(root_ / "scene.json");
}

json SceneDir::read_scene_json() const {
    if (!exists()) {
        throw Error(ErrorCode::NotFound, "no scene at " + root_.string());
    }
    return parse_json_file(root_ / "scene.json");
}

fs::path SceneDir::dataset_path() const {
    const json scene = read_scene_json();
    fs::path p = scene.value("dataset", "");
    return p.is_absolute() ? p : root_ / p;
}

std::vector<ObjectSpec> SceneDir::queued() const {
    const json scene = read_scene_json();
    std::vector<ObjectSpec> out;
    for (const auto& v : scene.value("objects", json::array())) {
        out.push_back(spec_from_json(v));
    }
    return out;
}

void SceneDir::save_queued(const std::vector<ObjectSpec>& specs) const {
    json scene = read_scene_json();
    json objects = json::array();
    for (const auto& s : specs) {
        objects.push_back(spec_to_json(s));
    }
    scene["objects"] = objects;
    write_json(root_ / "scene.json", scene);
}

SceneState SceneDir::load_state() const {
    SceneState state;
    const fs::path path = root_ / "state.json";
    if (!fs::exists(path)) {
        return state;
    }
    const json doc = parse_json_file(path);
    try {
        state.base_dataset_size = doc.at("base_dataset_size").get<std::size_t>();
        for (const auto& entry : doc.at("inserted")) {
            InsertedObject obj;
            obj.spec = spec_from_json(entry.at("spec"));
            const Bytes mesh = read_file(root_ / entry.at("mesh").get<std::string>());
            obj.mesh = parse_obj(std::string_view(reinterpret_cast<const char*>(mesh.data()), mesh.size()));
            obj.centroid = vec_from(entry.at("centroid"), "centroid");
            obj.bound_radius = entry.at("bound_radius").get<double>();
            state.inserted.push_back(std::move(obj));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("state.json: ") + e.what());
    }
    return state;
}

void SceneDir::save_state(const SceneState& state) const {
    json inserted = json::array();
    for (std::size_t i = 0; i < state.inserted.size(); ++i) {
        const auto& obj = state.inserted[i];
        const std::string mesh = mesh_file(i, obj.spec.name);
        if (!fs::exists(root_ / mesh)) {
            write_file(root_ / mesh, write_obj(obj.mesh));
        }
        inserted.push_back({{"spec", spec_to_json(obj.spec)},
                            {"mesh", mesh},
                            {"centroid", vec_json(obj.centroid)},
                            {"bound_radius", obj.bound_radius}});
    }
    write_json(root_ / "state.json", {{"base_dataset_size", state.base_dataset_size}, {"inserted", inserted}});
}

NerfDataset SceneDir::current_dataset(const SceneState& state) const {
    if (!state.inserted.empty()) {
        return load_dataset(output_dir());
    }
    return load_dataset(dataset_path());
}

void SceneDir::publish_dataset(const NerfDataset& ds) const {
    const fs::path staging = root_ / "output.next";
    const fs::path retired = root_ / "output.old";
    std::error_code ec;
    fs::remove_all(staging, ec);
    fs::remove_all(retired, ec);
    save_dataset(ds, staging);
    if (fs::exists(output_dir())) {
        fs::rename(output_dir(), retired, ec);
        if (ec) throw Error(ErrorCode::IoError, "cannot retire old output: " + ec.message());
    }
    fs::rename(staging, output_dir(), ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot publish output: " + ec.message());
    fs::remove_all(retired, ec);
}

JobState SceneDir::load_job() const {
    const fs::path path = root_ / "job.json";
    if (!fs::exists(path)) {
        return {};
    }
    return JobState::from_json(parse_json_file(path));
}

void SceneDir::save_job(const JobState& job) const {
    write_json(root_ / "job.json", job.to_json());
}

std::optional<PipelineReport> SceneDir::load_report() const {
    const fs::path path = root_ / "report.csv";
    if (!fs::exists(path)) {
        return std::nullopt;
    }
    const Bytes bytes = read_file(path);
    return PipelineReport::from_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

void SceneDir::save_report(const PipelineReport& report) const {
    write_file(root_ / "report.csv", report.to_csv());
}

std::vector<ObjectSpec> pending_objects(const std::vector<ObjectSpec>& queued, const SceneState& state) {
    std::vector<ObjectSpec> out;
    for (const auto& spec : queued) {
        if (!state.contains(spec.name)) out.push_back(spec);
    }
    return out;
}

PipelineReport run_scene(const SceneDir& dir, const Backends& backends, const PipelineOptions& options,
                         const SceneRunHooks& hooks) {
    SceneState state = dir.load_state();
    const auto pending = pending_objects(dir.queued(), state);
    if (pending.empty()) {
        throw Error(ErrorCode::InvalidRequest, "no objects queued");
    }
    NerfDataset ds = dir.current_dataset(state);
    if (state.base_dataset_size == 0) {
        state.base_dataset_size = ds.size();
    }
    PipelineReport report = dir.load_report().value_or(PipelineReport{});

    JobState job;
    job.status = JobStatus::Running;
    job.object_count = pending.size();
    auto publish = [&] {
        dir.save_job(job);
        if (hooks.on_progress) hooks.on_progress(job);
    };
    publish();

    RunCallbacks callbacks;
    callbacks.on_stage = [&](std::size_t i, Stage stage) {
        job.object_index = i;
        job.object_name = pending[i].name;
        job.stage = stage;
        job.progress = (static_cast<double>(i) + static_cast<double>(stage) / 5.0) / static_cast<double>(pending.size());
        publish();
    };
    callbacks.on_object_done = [&](std::size_t, const InsertResult& result) {
        const std::string name = result.scene.inserted.back().spec.name;
        const fs::path art = fs::path("artifacts") / name;
        write_file(dir.root() / art / "stylized.png", encode_png(quantize(result.stylized)));
        save_grid(result.grid, dir.root() / art / "grid");
        auto published = std::make_shared<const NerfDataset>(result.dataset);
        dir.publish_dataset(*published);
        dir.save_state(result.scene);
        report.rows.push_back(result.row);
        dir.save_report(report);
        job.timings.push_back(result.row);
        job.artifacts.push_back((art / "stylized.png").generic_string());
        job.artifacts.push_back((art / "grid").generic_string());
        job.artifacts.push_back(mesh_file(result.scene.inserted.size() - 1, name));
        publish();
        if (hooks.on_dataset) hooks.on_dataset(std::move(published));
    };

    try {
        insert_objects(state, std::move(ds), pending, backends, options, callbacks);
    } catch (const Error& e) {
        job.status = JobStatus::Failed;
        job.error_code = std::string(to_string(e.code()));
        job.error_message = e.detail();
        publish();
        throw;
    } catch (const std::exception& e) {
        job.status = JobStatus::Failed;
        job.error_code = std::string(to_string(ErrorCode::Internal));
        job.error_message = e.what();
        publish();
        throw Error(ErrorCode::Internal, e.what());
    }
    job.status = JobStatus::Done;
    job.stage = Stage::Done;
    job.progress = 1.0;
    publish();
    return report;
}

RgbImage preview_frame(const NerfDataset& ds, const std::vector<ObjectSpec>& pending, std::size_t index,
                       const PipelineOptions& options) {
    if (index >= ds.size()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "frame " + std::to_string(index) + " out of range (dataset has " + std::to_string(ds.size()) + ")");
    }
    std::vector<TriMesh> proxies;
    proxies.reserve(pending.size());
    for (const auto& spec : pending) {
        proxies.push_back(tessellate_primitive(spec.primitive, options.primitive_level));
    }
    const RenderOutput overlay =
        render_meshes(ds.view(index), std::span<const TriMesh>(proxies), options.near, options.far, options.render_workers);
    return composite_over(ds.image(index), overlay);
}

}  // namespace primscene
