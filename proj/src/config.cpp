#include "primscene/config.hpp"

#include "primscene/encoding.hpp"
#include "primscene/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <variant>
#include <vector>

using nlohmann::json;

namespace primscene {
namespace {

using FieldRef = std::variant<std::string*, int*, double*>;

std::vector<std::pair<std::string, FieldRef>> fields(Config& c) {
    return {
        {"stylizer", &c.endpoints.stylizer},
        {"mesh_generator", &c.endpoints.mesh_generator},
        {"grid_editor", &c.endpoints.grid_editor},
        {"scene_renderer", &c.endpoints.scene_renderer},
        {"grid_rows", &c.grid.rows},
        {"grid_cols", &c.grid.cols},
        {"blank_index", &c.grid.blank_index},
        {"tile_w", &c.grid.tile_w},
        {"tile_h", &c.grid.tile_h},
        {"ring_radius_multiplier", &c.ring.radius_multiplier},
        {"elevation_deg", &c.ring.elevation_deg},
        {"render_workers", &c.render_workers},
        {"backend_concurrency", &c.backend_concurrency},
        {"retries", &c.retry.retries},
        {"initial_backoff_s", &c.retry.initial_backoff_s},
        {"timeout_s", &c.timeout_s},
        {"near", &c.near},
        {"far", &c.far},
        {"primitive_level", &c.primitive_level},
        {"host", &c.host},
        {"port", &c.port},
    };
}

std::string env_name(const std::string& key) {
    std::string out = "PRIMSCENE_";
    for (char ch : key) {
        out += static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    return out;
}

void assign_json(const std::string& key, FieldRef ref, const json& v) {
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be a string");
            } else if constexpr (std::is_same_v<T, int>) {
                if (!v.is_number_integer()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be an integer");
            } else {
                if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, "'" + key + "' must be a number");
            }
            *p = v.get<T>();
        },
        ref);
}

void assign_text(const std::string& key, FieldRef ref, const std::string& text) {
    std::visit(
        [&](auto* p) {
            using T = std::remove_pointer_t<decltype(p)>;
            if constexpr (std::is_same_v<T, std::string>) {
                *p = text;
            } else {
                std::size_t used = 0;
                try {
                    if constexpr (std::is_same_v<T, int>) {
                        *p = std::stoi(text, &used);
                    } else {
                        *p = std::stod(text, &used);
                    }
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used == 0 || used != text.size()) {
                    throw Error(ErrorCode::InvalidConfig, env_name(key) + "='" + text + "' is not a valid number");
                }
            }
        },
        ref);
}

}  // namespace

void Config::validate() const {
    auto positive = [](const char* name, double v) {
        if (!(v > 0.0)) {
            throw Error(ErrorCode::InvalidConfig, std::string(name) + " must be positive");
        }
    };
    positive("tile_w", grid.tile_w);
    positive("tile_h", grid.tile_h);
    positive("grid_rows", grid.rows);
    positive("grid_cols", grid.cols);
    positive("ring_radius_multiplier", ring.radius_multiplier);
    positive("elevation_deg", ring.elevation_deg);
    positive("render_workers", render_workers);
    positive("backend_concurrency", backend_concurrency);
    if (retry.retries < 0) {
        throw Error(ErrorCode::InvalidConfig, "retries must not be negative");
    }
    positive("initial_backoff_s", retry.initial_backoff_s);
    positive("timeout_s", timeout_s);
    positive("near", near);
    positive("far", far);
    positive("primitive_level", primitive_level);
    positive("port", port);
    grid.validate();
    if (ring.elevation_deg >= 90.0) {
        throw Error(ErrorCode::InvalidConfig, "elevation_deg must be below 90");
    }
    if (far <= near) {
        throw Error(ErrorCode::InvalidConfig, "far must exceed near");
    }
    if (port > 65535) {
        throw Error(ErrorCode::InvalidConfig, "port out of range");
    }
    for (const auto* url : {&endpoints.stylizer, &endpoints.mesh_generator, &endpoints.grid_editor,
                            &endpoints.scene_renderer}) {
        if (*url != "mock" && url->rfind("http://", 0) != 0 && url->rfind("https://", 0) != 0) {
            throw Error(ErrorCode::InvalidConfig, "backend endpoint '" + *url + "' is neither 'mock' nor an http URL");
        }
    }
}

PipelineOptions Config::pipeline() const {
    PipelineOptions p;
    p.grid = grid;
    p.ring = ring;
    p.near = near;
    p.far = far;
    p.primitive_level = primitive_level;
    p.render_workers = render_workers;
    p.backend_concurrency = backend_concurrency;
    return p;
}

HttpClientOptions Config::client() const {
    return {retry, timeout_s, backend_concurrency};
}

std::optional<std::string> process_env(const std::string& name) {
    if (const char* v = std::getenv(name.c_str())) {
        return std::string(v);
    }
    return std::nullopt;
}

Config parse_config(std::string_view json_text, const EnvLookup& env) {
    Config config;
    auto table = fields(config);
    if (!json_text.empty()) {
        json doc;
        try {
            doc = json::parse(json_text);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
        }
        if (!doc.is_object()) {
            throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
        }
        for (const auto& [key, value] : doc.items()) {
            auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == key; });
            if (it == table.end()) {
                throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
            }
            assign_json(key, it->second, value);
        }
    }
    if (env) {
        for (const auto& [key, ref] : table) {
            if (auto v = env(env_name(key))) {
                assign_text(key, ref, *v);
            }
        }
    }
    config.validate();
    return config;
}

Config load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    std::string text;
    if (file) {
        try {
            const Bytes bytes = read_file(*file);
            text.assign(bytes.begin(), bytes.end());
        } catch (const Error& e) {
            throw Error(ErrorCode::InvalidConfig, "cannot read config: " + e.detail());
        }
    }
    return parse_config(text, env);
}

std::string dump_config(const Config& config) {
    Config copy = config;
    json doc = json::object();
    for (const auto& [key, ref] : fields(copy)) {
        std::visit([&, k = key](auto* p) { doc[k] = *p; }, ref);
    }
    return doc.dump(2);
}

}  // namespace primscene
