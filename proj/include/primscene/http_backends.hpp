#pragma once

#include "primscene/backends.hpp"

#include "json.hpp"

#include <memory>
#include <semaphore>
#include <string>

namespace httplib {
class Server;
}

namespace primscene {

struct RetryPolicy {
    int retries = 3;                  // after the first attempt
    double initial_backoff_s = 1.0;   // doubled after every failed attempt
};

struct HttpClientOptions {
    RetryPolicy retry;
    double timeout_s = 300.0;
    int max_in_flight = 2;
};

/// POSTs JSON to one backend service. Transport failures, 5xx and 429 are
/// retried; 4xx fails immediately. Safe to share across threads; at most
/// max_in_flight requests are outstanding at once.
class HttpBackendClient {
public:
    HttpBackendClient(std::string base_url, HttpClientOptions options);

    nlohmann::json post(const std::string& path, const nlohmann::json& body);
    const std::string& base_url() const { return base_url_; }

private:
    std::string base_url_;
    HttpClientOptions options_;
    std::counting_semaphore<1024> slots_;
};

class HttpStylizer final : public Stylizer {
public:
    explicit HttpStylizer(std::shared_ptr<HttpBackendClient> client) : client_(std::move(client)) {}
    RgbImage stylize(const StylizeRequest& req) override;

private:
    std::shared_ptr<HttpBackendClient> client_;
};

class HttpMeshGenerator final : public MeshGenerator {
public:
    explicit HttpMeshGenerator(std::shared_ptr<HttpBackendClient> client) : client_(std::move(client)) {}
    TriMesh generate_mesh(const MeshGenRequest& req) override;

private:
    std::shared_ptr<HttpBackendClient> client_;
};

class HttpGridEditor final : public GridEditor {
public:
    explicit HttpGridEditor(std::shared_ptr<HttpBackendClient> client) : client_(std::move(client)) {}
    RgbImage edit_grid(const GridEditRequest& req) override;

private:
    std::shared_ptr<HttpBackendClient> client_;
};

class HttpSceneRenderer final : public SceneRenderer {
public:
    explicit HttpSceneRenderer(std::shared_ptr<HttpBackendClient> client) : client_(std::move(client)) {}
    /// The remote renderer owns its scene; the dataset argument is unused.
    RgbImage render_scene(const RenderSceneRequest& req, const NerfDataset& ds) override;

private:
    std::shared_ptr<HttpBackendClient> client_;
};

struct BackendEndpoints {
    std::string stylizer = "mock";
    std::string mesh_generator = "mock";
    std::string grid_editor = "mock";
    std::string scene_renderer = "mock";
};

/// "mock" selects the in-process mock, anything else is a base URL.
Backends make_backends(const BackendEndpoints& endpoints, const HttpClientOptions& options);

/// Serves POST /stylize, /generate_mesh, /edit_grid and /render_scene from
/// the given implementations. render_scene answers from `scene`.
void mount_backend_routes(httplib::Server& server, Backends impls, std::shared_ptr<const NerfDataset> scene);

}  // namespace primscene
