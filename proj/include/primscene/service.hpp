#pragma once

#include "primscene/config.hpp"
#include "primscene/scene_store.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>

namespace httplib {
class Server;
}

namespace primscene {

struct SceneSession;

/// Scenes are the subdirectories of `scenes_root` that hold a scene.json;
/// the directory name is the scene id. One run at a time per scene, executed
/// on a worker thread owned by the scene's session.
class Service {
public:
    Service(std::filesystem::path scenes_root, Config config, Backends backends);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    void mount(httplib::Server& server);

    /// Blocks until the scene has no run in flight. Returns its status.
    JobStatus wait_until_settled(const std::string& scene_id);

private:
    std::shared_ptr<SceneSession> session(const std::string& id);

    std::filesystem::path root_;
    Config config_;
    Backends backends_;
    std::mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<SceneSession>> sessions_;
};

/// HTTP status for an error raised while serving a request.
int http_status(ErrorCode code);

/// Serves until SIGINT/SIGTERM. Returns the process exit code.
int serve(const std::filesystem::path& scenes_root, const Config& config);

}  // namespace primscene
