#pragma once

#include "primscene/backends.hpp"

#include "json.hpp"

namespace primscene::wire {

// JSON bodies exchanged with backend services. Images travel as base64 PNG
// (8-bit RGB, 8-bit mask, 16-bit depth with a depth_scale field); meshes as
// base64 OBJ with per-vertex colors, or GLB from real backends.

nlohmann::json encode_image(const RgbImage& image);
RgbImage decode_image(const nlohmann::json& value, const char* field);

nlohmann::json encode_view(const CameraView& view);
CameraView decode_view(const nlohmann::json& value);

nlohmann::json to_json(const StylizeRequest& req);
nlohmann::json to_json(const MeshGenRequest& req);
nlohmann::json to_json(const GridEditRequest& req);
nlohmann::json to_json(const RenderSceneRequest& req);

StylizeRequest stylize_request(const nlohmann::json& body);
MeshGenRequest mesh_request(const nlohmann::json& body);
GridEditRequest grid_request(const nlohmann::json& body);
RenderSceneRequest render_request(const nlohmann::json& body);

nlohmann::json image_response(const RgbImage& image);
nlohmann::json mesh_response(const TriMesh& mesh);
RgbImage image_from_response(const nlohmann::json& body);
TriMesh mesh_from_response(const nlohmann::json& body);

nlohmann::json error_body(std::string_view code, std::string_view message);

}  // namespace primscene::wire
