#pragma once

#include "primscene/http_backends.hpp"
#include "primscene/integration.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

namespace primscene {

struct Config {
    BackendEndpoints endpoints;
    GridLayout grid;
    RingOptions ring;
    int render_workers = 4;
    int backend_concurrency = 2;
    RetryPolicy retry;
    double timeout_s = 300.0;
    double near = 0.01;
    double far = 100.0;
    int primitive_level = 16;
    std::string host = "127.0.0.1";
    int port = 8080;

    void validate() const;
    PipelineOptions pipeline() const;
    HttpClientOptions client() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads std::getenv.
std::optional<std::string> process_env(const std::string& name);

/// Field names are the JSON keys; environment variables are PRIMSCENE_ plus
/// the upper-cased key (PRIMSCENE_GRID_ROWS, PRIMSCENE_STYLIZER, ...) and win
/// over the file. Unknown keys and out-of-range values throw InvalidConfig.
Config parse_config(std::string_view json_text, const EnvLookup& env = process_env);
Config load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);
std::string dump_config(const Config& config);

}  // namespace primscene
