#include "primscene/http_backends.hpp"

#include "primscene/error.hpp"
#include "primscene/wire.hpp"

#include "httplib.h"
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <thread>

using nlohmann::json;

namespace primscene {
namespace {

class SlotGuard {
public:
    explicit SlotGuard(std::counting_semaphore<1024>& sem) : sem_(sem) { sem_.acquire(); }
    ~SlotGuard() { sem_.release(); }
    SlotGuard(const SlotGuard&) = delete;
    SlotGuard& operator=(const SlotGuard&) = delete;

private:
    std::counting_semaphore<1024>& sem_;
};

std::string error_message(const httplib::Result& res) {
    try {
        const json body = json::parse(res->body);
        return body.at("error").at("code").get<std::string>() + ": " +
               body.at("error").at("message").get<std::string>();
    } catch (const json::exception&) {
        return res->body.substr(0, 200);
    }
}

// Response decoding failures are the backend's fault, not ours.
template <typename F>
auto decode_response(const char* what, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) {
            throw Error(ErrorCode::InvalidResponse, std::string(what) + ": " + e.detail());
        }
        throw;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidResponse, std::string(what) + ": " + e.what());
    }
}

}  // namespace

HttpBackendClient::HttpBackendClient(std::string base_url, HttpClientOptions options)
    : base_url_(std::move(base_url)), options_(options), slots_(std::max(1, options.max_in_flight)) {
    while (!base_url_.empty() && base_url_.back() == '/') {
        base_url_.pop_back();
    }
}

json HttpBackendClient::post(const std::string& path, const json& body) {
    SlotGuard slot(slots_);
    const std::string payload = body.dump();
    const auto secs = static_cast<time_t>(options_.timeout_s);
    const auto usecs = static_cast<time_t>((options_.timeout_s - std::floor(options_.timeout_s)) * 1e6);

    std::string last_failure;
    double backoff = options_.retry.initial_backoff_s;
    for (int attempt = 0; attempt <= options_.retry.retries; ++attempt) {
        if (attempt > 0) {
            spdlog::warn("{}{} failed ({}); retry {} in {:.2f}s", base_url_, path, last_failure, attempt, backoff);
            std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
            backoff *= 2.0;
        }
        httplib::Client client(base_url_);
        client.set_connection_timeout(secs, usecs);
        client.set_read_timeout(secs, usecs);
        client.set_write_timeout(secs, usecs);
        auto res = client.Post(path, payload, "application/json");
        if (!res) {
            last_failure = httplib::to_string(res.error());
            continue;
        }
        if (res->status == 200) {
            try {
                return json::parse(res->body);
            } catch (const json::parse_error& e) {
                throw Error(ErrorCode::InvalidResponse, base_url_ + path + ": malformed JSON: " + e.what());
            }
        }
        if (res->status >= 500 || res->status == 429) {
            last_failure = "HTTP " + std::to_string(res->status) + " " + error_message(res);
            continue;
        }
        throw Error(ErrorCode::InvalidRequest,
                    base_url_ + path + " rejected the request: HTTP " + std::to_string(res->status) + " " + error_message(res));
    }
    throw Error(ErrorCode::BackendUnreachable, base_url_ + path + " after " + std::to_string(options_.retry.retries + 1) +
                                                   " attempts: " + last_failure);
}

RgbImage HttpStylizer::stylize(const StylizeRequest& req) {
    const json res = client_->post("/stylize", wire::to_json(req));
    return decode_response("stylizer", [&] { return wire::image_from_response(res); });
}

TriMesh HttpMeshGenerator::generate_mesh(const MeshGenRequest& req) {
    const json res = client_->post("/generate_mesh", wire::to_json(req));
    try {
        return decode_response("mesh generator", [&] { return wire::mesh_from_response(res); });
    } catch (const Error& e) {
        if (e.code() == ErrorCode::InvalidResponse) {
            throw Error(ErrorCode::InvalidMesh, e.detail());
        }
        throw;
    }
}

RgbImage HttpGridEditor::edit_grid(const GridEditRequest& req) {
    const json res = client_->post("/edit_grid", wire::to_json(req));
    return decode_response("grid editor", [&] { return wire::image_from_response(res); });
}

RgbImage HttpSceneRenderer::render_scene(const RenderSceneRequest& req, const NerfDataset&) {
    const json res = client_->post("/render_scene", wire::to_json(req));
    return decode_response("scene renderer", [&] { return wire::image_from_response(res); });
}

Backends make_backends(const BackendEndpoints& endpoints, const HttpClientOptions& options) {
    Backends mocks = Backends::mock();
    auto client = [&](const std::string& url) { return std::make_shared<HttpBackendClient>(url, options); };
    Backends out;
    out.stylizer = endpoints.stylizer == "mock" ? mocks.stylizer
                                                : std::make_shared<HttpStylizer>(client(endpoints.stylizer));
    out.mesh_generator = endpoints.mesh_generator == "mock"
                             ? mocks.mesh_generator
                             : std::make_shared<HttpMeshGenerator>(client(endpoints.mesh_generator));
    out.grid_editor = endpoints.grid_editor == "mock" ? mocks.grid_editor
                                                      : std::make_shared<HttpGridEditor>(client(endpoints.grid_editor));
    out.scene_renderer = endpoints.scene_renderer == "mock"
                             ? mocks.scene_renderer
                             : std::make_shared<HttpSceneRenderer>(client(endpoints.scene_renderer));
    return out;
}

namespace {

template <typename F>
void handle(httplib::Server& server, const char* path, F&& f) {
    server.Post(path, [f = std::forward<F>(f)](const httplib::Request& req, httplib::Response& res) {
        try {
            const json body = json::parse(req.body);
            res.set_content(f(body).dump(), "application/json");
        } catch (const json::exception& e) {
            res.status = 400;
            res.set_content(wire::error_body("parse-error", e.what()).dump(), "application/json");
        } catch (const Error& e) {
            const bool client_fault = e.code() == ErrorCode::ParseError || e.code() == ErrorCode::InvalidRequest;
            res.status = client_fault ? 400 : 500;
            res.set_content(wire::error_body(to_string(e.code()), e.detail()).dump(), "application/json");
        }
    });
}

}  // namespace

void mount_backend_routes(httplib::Server& server, Backends impls, std::shared_ptr<const NerfDataset> scene) {
    auto b = std::make_shared<Backends>(std::move(impls));
    handle(server, "/stylize", [b](const json& body) { return wire::image_response(b->stylize(wire::stylize_request(body))); });
    handle(server, "/generate_mesh",
           [b](const json& body) { return wire::mesh_response(b->generate_mesh(wire::mesh_request(body))); });
    handle(server, "/edit_grid",
           [b](const json& body) { return wire::image_response(b->edit_grid(wire::grid_request(body))); });
    handle(server, "/render_scene", [b, scene](const json& body) {
        if (!scene) {
            throw Error(ErrorCode::EmptyDataset, "no scene loaded");
        }
        return wire::image_response(b->render_scene(wire::render_request(body), *scene));
    });
}

}  // namespace primscene
