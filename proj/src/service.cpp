#include "primscene/service.hpp"

#include "primscene/encoding.hpp"
#include "primscene/error.hpp"
#include "primscene/wire.hpp"

#include "httplib.h"
#include <spdlog/spdlog.h>

#include <condition_variable>
#include <csignal>
#include <thread>

using nlohmann::json;
namespace fs = std::filesystem;

namespace primscene {

struct SceneSession {
    explicit SceneSession(SceneDir d) : dir(std::move(d)) {}

    SceneDir dir;
    std::mutex mutex;
    std::condition_variable settled;
    JobStatus status = JobStatus::Idle;
    JobState job;
    std::shared_ptr<const NerfDataset> dataset;
    std::jthread worker;

    // Callers hold `mutex`.
    std::shared_ptr<const NerfDataset> current_dataset() {
        if (!dataset) {
            dataset = std::make_shared<const NerfDataset>(dir.current_dataset(dir.load_state()));
        }
        return dataset;
    }
    void require_not_running() const {
        if (status == JobStatus::Running) {
            throw Error(ErrorCode::Conflict, "a run is in progress on this scene");
        }
    }
};

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <typename F>
auto guarded(F&& f) {
    return [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const Error& e) {
            send_json(res, wire::error_body(to_string(e.code()), e.detail()), http_status(e.code()));
        } catch (const json::exception& e) {
            send_json(res, wire::error_body("parse-error", e.what()), 422);
        } catch (const std::exception& e) {
            send_json(res, wire::error_body("internal", e.what()), 500);
        }
    };
}

json view_json(const NerfDataset& ds) {
    json frames = json::array();
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const json v = wire::encode_view(ds.view(i));
        frames.push_back({{"index", i}, {"file_path", ds.frames[i].file_path}, {"transform_matrix", v["transform_matrix"]}});
    }
    json intr = wire::encode_view(CameraView{ds.intrinsics, Pose::identity()});
    intr.erase("transform_matrix");
    return {{"intrinsics", intr}, {"frames", frames}};
}

JobStatus initial_status(const SceneDir& dir) {
    JobState job;
    try {
        job = dir.load_job();
    } catch (const Error& e) {
        spdlog::warn("{}: unreadable job.json ({}), treating scene as idle", dir.root().string(), e.what());
        return JobStatus::Idle;
    }
    // A run still marked running belongs to a previous process that died.
    return job.status == JobStatus::Running ? JobStatus::Failed : job.status;
}

}  // namespace

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound:
        case ErrorCode::IndexOutOfRange:
            return 404;
        case ErrorCode::Conflict:
            return 409;
        case ErrorCode::InvalidRequest:
        case ErrorCode::ParseError:
        case ErrorCode::DegeneratePrimitive:
            return 422;
        default:
            return 500;
    }
}

Service::Service(fs::path scenes_root, Config config, Backends backends)
    : root_(std::move(scenes_root)), config_(std::move(config)), backends_(std::move(backends)) {}

Service::~Service() {
    std::lock_guard lock(sessions_mutex_);
    for (auto& [id, s] : sessions_) {
        std::jthread worker;
        {
            std::lock_guard session_lock(s->mutex);
            worker = std::move(s->worker);
        }
    }
}

std::shared_ptr<SceneSession> Service::session(const std::string& id) {
    std::lock_guard lock(sessions_mutex_);
    if (auto it = sessions_.find(id); it != sessions_.end()) {
        return it->second;
    }
    SceneDir dir(root_ / id);
    if (id.empty() || id.find_first_of("/\\") != std::string::npos || id[0] == '.' || !dir.exists()) {
        throw Error(ErrorCode::NotFound, "unknown scene '" + id + "'");
    }
    auto s = std::make_shared<SceneSession>(dir);
    s->status = initial_status(dir);
    if (s->status != JobStatus::Idle) {
        s->job = dir.load_job();
        s->job.status = s->status;
    }
    sessions_.emplace(id, s);
    return s;
}

JobStatus Service::wait_until_settled(const std::string& scene_id) {
    auto s = session(scene_id);
    std::unique_lock lock(s->mutex);
    s->settled.wait(lock, [&] { return s->status != JobStatus::Running; });
    return s->status;
}

void Service::mount(httplib::Server& server) {
    server.Get("/scenes", guarded([this](const httplib::Request&, httplib::Response& res) {
        std::error_code ec;
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(root_, ec)) {
            if (SceneDir(entry.path()).exists()) names.push_back(entry.path().filename().string());
        }
        std::sort(names.begin(), names.end());
        send_json(res, {{"scenes", names}});
    }));

    server.Get(R"(/scenes/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        std::lock_guard lock(s->mutex);
        const SceneState state = s->dir.load_state();
        json objects = json::array();
        for (const auto& spec : s->dir.queued()) {
            objects.push_back(spec_to_json(spec));
        }
        json inserted = json::array();
        for (const auto& obj : state.inserted) {
            inserted.push_back({{"name", obj.spec.name},
                                {"centroid", {obj.centroid.x(), obj.centroid.y(), obj.centroid.z()}},
                                {"bound_radius", obj.bound_radius}});
        }
        send_json(res, {{"id", std::string(req.matches[1])},
                        {"dataset", s->dir.dataset_path().string()},
                        {"status", to_string(s->status)},
                        {"stage", s->job.stage && s->status == JobStatus::Running ? json(to_string(*s->job.stage))
                                                                                  : json(nullptr)},
                        {"objects", objects},
                        {"inserted", inserted},
                        {"base_dataset_size", state.base_dataset_size}});
    }));

    server.Get(R"(/scenes/([^/]+)/frames)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        std::shared_ptr<const NerfDataset> ds;
        {
            std::lock_guard lock(s->mutex);
            ds = s->current_dataset();
        }
        send_json(res, view_json(*ds));
    }));

    server.Post(R"(/scenes/([^/]+)/objects)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        const ObjectSpec spec = spec_from_json(json::parse(req.body));
        std::lock_guard lock(s->mutex);
        s->require_not_running();
        auto queued = s->dir.queued();
        if (std::any_of(queued.begin(), queued.end(), [&](const auto& q) { return q.name == spec.name; })) {
            throw Error(ErrorCode::InvalidRequest, "object '" + spec.name + "' already exists in this scene");
        }
        queued.push_back(spec);
        s->dir.save_queued(queued);
        s->status = JobStatus::Idle;
        send_json(res, spec_to_json(spec), 201);
    }));

    server.Delete(R"(/scenes/([^/]+)/objects/([^/]+))",
                  guarded([this](const httplib::Request& req, httplib::Response& res) {
                      auto s = session(req.matches[1]);
                      const std::string name = req.matches[2];
                      std::lock_guard lock(s->mutex);
                      s->require_not_running();
                      if (s->dir.load_state().contains(name)) {
                          throw Error(ErrorCode::Conflict, "object '" + name + "' is already integrated");
                      }
                      auto queued = s->dir.queued();
                      const auto it = std::find_if(queued.begin(), queued.end(), [&](const auto& q) { return q.name == name; });
                      if (it == queued.end()) {
                          throw Error(ErrorCode::NotFound, "unknown object '" + name + "'");
                      }
                      queued.erase(it);
                      s->dir.save_queued(queued);
                      s->status = JobStatus::Idle;
                      res.status = 204;
                  }));

    server.Post(R"(/scenes/([^/]+)/reset)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        std::lock_guard lock(s->mutex);
        s->require_not_running();
        s->status = JobStatus::Idle;
        send_json(res, {{"status", to_string(s->status)}});
    }));

    server.Post(R"(/scenes/([^/]+)/run)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        std::lock_guard lock(s->mutex);
        if (s->status != JobStatus::Idle) {
            throw Error(ErrorCode::Conflict, "scene is " + std::string(to_string(s->status)) + ", not idle");
        }
        if (pending_objects(s->dir.queued(), s->dir.load_state()).empty()) {
            throw Error(ErrorCode::InvalidRequest, "no objects queued");
        }
        s->status = JobStatus::Running;
        s->job = JobState{};
        s->job.status = JobStatus::Running;
        s->worker = std::jthread([this, s] {
            SceneRunHooks hooks;
            hooks.on_progress = [s](const JobState& job) {
                std::lock_guard l(s->mutex);
                s->job = job;
            };
            hooks.on_dataset = [s](std::shared_ptr<const NerfDataset> ds) {
                std::lock_guard l(s->mutex);
                s->dataset = std::move(ds);
            };
            JobStatus final_status = JobStatus::Done;
            try {
                run_scene(s->dir, backends_, config_.pipeline(), hooks);
            } catch (const std::exception& e) {
                spdlog::warn("run on {} failed: {}", s->dir.root().string(), e.what());
                final_status = JobStatus::Failed;
            }
            std::lock_guard l(s->mutex);
            s->status = final_status;
            s->job.status = final_status;
            s->settled.notify_all();
        });
        send_json(res, {{"status", "running"}}, 202);
    }));

    server.Get(R"(/scenes/([^/]+)/jobs/current)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        std::lock_guard lock(s->mutex);
        json body = s->job.to_json();
        body["status"] = to_string(s->status);
        send_json(res, body);
    }));

    server.Get(R"(/scenes/([^/]+)/preview)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        if (!req.has_param("view")) {
            throw Error(ErrorCode::InvalidRequest, "missing query parameter 'view'");
        }
        const std::string text = req.get_param_value("view");
        std::size_t used = 0;
        long long view = -1;
        try {
            view = std::stoll(text, &used);
        } catch (const std::exception&) {
        }
        if (used != text.size() || view < 0) {
            throw Error(ErrorCode::InvalidRequest, "view must be a non-negative integer");
        }
        std::shared_ptr<const NerfDataset> ds;
        std::vector<ObjectSpec> pending;
        {
            std::lock_guard lock(s->mutex);
            ds = s->current_dataset();
            pending = pending_objects(s->dir.queued(), s->dir.load_state());
        }
        const RgbImage image = preview_frame(*ds, pending, static_cast<std::size_t>(view), config_.pipeline());
        const Bytes png = encode_png(quantize(image));
        res.set_content(std::string(png.begin(), png.end()), "image/png");
    }));

    server.Get(R"(/scenes/([^/]+)/report)", guarded([this](const httplib::Request& req, httplib::Response& res) {
        auto s = session(req.matches[1]);
        std::optional<PipelineReport> report;
        {
            std::lock_guard lock(s->mutex);
            report = s->dir.load_report();
        }
        if (!report) {
            throw Error(ErrorCode::NotFound, "no report yet");
        }
        res.set_content(report->to_csv(), "text/csv");
    }));
}

namespace {
httplib::Server* g_server = nullptr;
extern "C" void stop_server(int) {
    if (g_server) g_server->stop();
}
}  // namespace

int serve(const fs::path& scenes_root, const Config& config) {
    if (!fs::is_directory(scenes_root)) {
        throw Error(ErrorCode::InvalidConfig, "scenes root " + scenes_root.string() + " is not a directory");
    }
    httplib::Server server;
    Service service(scenes_root, config, make_backends(config.endpoints, config.client()));
    service.mount(server);
    g_server = &server;
    std::signal(SIGINT, stop_server);
    std::signal(SIGTERM, stop_server);
    spdlog::info("serving {} on {}:{}", scenes_root.string(), config.host, config.port);
    const bool ok = server.listen(config.host, config.port);
    g_server = nullptr;
    if (!ok) {
        spdlog::error("cannot listen on {}:{}", config.host, config.port);
    }
    return ok ? 0 : 2;
}

}  // namespace primscene
