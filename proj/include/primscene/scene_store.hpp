#pragma once

#include "primscene/dataset.hpp"
#include "primscene/integration.hpp"

#include "json.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace primscene {

nlohmann::json spec_to_json(const ObjectSpec& spec);
/// Throws InvalidRequest naming the bad field.
ObjectSpec spec_from_json(const nlohmann::json& value);

enum class JobStatus { Idle, Running, Done, Failed };

std::string_view to_string(JobStatus status);
JobStatus parse_job_status(std::string_view text);

/// Persisted progress of the current run (job.json), enough to resume after
/// a crash: completed objects are already in state.json and output/.
struct JobState {
    JobStatus status = JobStatus::Idle;
    std::size_t object_index = 0;  // position among the objects of this run
    std::size_t object_count = 0;
    std::string object_name;
    std::optional<Stage> stage;
    double progress = 0.0;  // [0, 1]
    std::vector<std::string> artifacts;  // scene-relative paths
    std::vector<ReportRow> timings;
    std::string error_code;
    std::string error_message;

    nlohmann::json to_json() const;
    static JobState from_json(const nlohmann::json& value);
};

/// On-disk scene:
///   scene.json   base dataset path and queued object specs
///   state.json   ledger of inserted objects (meshes in meshes/*.obj)
///   output/      current dataset, replaced as a whole after each object
///   artifacts/   stylized view and condition grid per object
///   job.json     JobState
///   report.csv   timing table
class SceneDir {
public:
    explicit SceneDir(std::filesystem::path root) : root_(std::move(root)) {}

    /// Creates the directory layout for a base dataset; the dataset is
    /// loaded once to check it.
    static SceneDir create(const std::filesystem::path& root, const std::filesystem::path& dataset);

    const std::filesystem::path& root() const { return root_; }
    std::filesystem::path output_dir() const { return root_ / "output"; }
    bool exists() const;

    std::filesystem::path dataset_path() const;
    std::vector<ObjectSpec> queued() const;
    void save_queued(const std::vector<ObjectSpec>& specs) const;

    SceneState load_state() const;
    void save_state(const SceneState& state) const;

    /// output/ when at least one object is inserted, else the base dataset.
    NerfDataset current_dataset(const SceneState& state) const;
    void publish_dataset(const NerfDataset& ds) const;

    JobState load_job() const;
    void save_job(const JobState& job) const;

    std::optional<PipelineReport> load_report() const;
    void save_report(const PipelineReport& report) const;

private:
    nlohmann::json read_scene_json() const;
    std::filesystem::path root_;
};

struct SceneRunHooks {
    std::function<void(const JobState&)> on_progress;
    /// Published dataset after every completed object.
    std::function<void(std::shared_ptr<const NerfDataset>)> on_dataset;
};

/// Runs every queued object that is not yet in the ledger, persisting after
/// each one. Throws InvalidRequest("no objects queued") when nothing is
/// pending; pipeline errors are recorded in job.json and rethrown.
PipelineReport run_scene(const SceneDir& dir, const Backends& backends, const PipelineOptions& options,
                         const SceneRunHooks& hooks = {});

/// Frame `index` of the current dataset with every queued but not yet
/// inserted primitive drawn over it.
RgbImage preview_frame(const NerfDataset& ds, const std::vector<ObjectSpec>& pending, std::size_t index,
                       const PipelineOptions& options);

std::vector<ObjectSpec> pending_objects(const std::vector<ObjectSpec>& queued, const SceneState& state);

}  // namespace primscene
