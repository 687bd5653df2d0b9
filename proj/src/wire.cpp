#include "primscene/wire.hpp"

#include "primscene/encoding.hpp"
#include "primscene/error.hpp"
#include "primscene/mesh_io.hpp"

using nlohmann::json;

namespace primscene::wire {
namespace {

const json& field(const json& body, const char* name) {
    if (!body.is_object() || !body.contains(name)) {
        throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
    }
    return body.at(name);
}

std::string string_field(const json& body, const char* name) {
    const json& v = field(body, name);
    if (!v.is_string()) {
        throw Error(ErrorCode::ParseError, std::string("field '") + name + "' must be a string");
    }
    return v.get<std::string>();
}

int int_field(const json& body, const char* name) {
    const json& v = field(body, name);
    if (!v.is_number_integer()) {
        throw Error(ErrorCode::ParseError, std::string("field '") + name + "' must be an integer");
    }
    return v.get<int>();
}

Bytes decode_payload(const json& body, const char* name) {
    try {
        return base64_decode(string_field(body, name));
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, std::string("field '") + name + "': " + e.detail());
    }
}

}  // namespace

json encode_image(const RgbImage& image) {
    return base64_encode(encode_png(quantize(image)));
}

RgbImage decode_image(const json& value, const char* name) {
    if (!value.is_string()) {
        throw Error(ErrorCode::ParseError, std::string("field '") + name + "' must be a base64 PNG string");
    }
    try {
        return to_float(decode_png_rgb(base64_decode(value.get<std::string>())));
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, std::string("field '") + name + "': " + e.detail());
    }
}

json encode_view(const CameraView& view) {
    const auto& k = view.intrinsics;
    const Mat4 m = view.pose.matrix();
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
        rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
    }
    return {{"fl_x", k.fx}, {"fl_y", k.fy}, {"cx", k.cx}, {"cy", k.cy},
            {"w", k.width}, {"h", k.height}, {"transform_matrix", rows}};
}

CameraView decode_view(const json& value) {
    try {
        CameraView v;
        v.intrinsics = {value.at("fl_x").get<double>(), value.at("fl_y").get<double>(), value.at("cx").get<double>(),
                        value.at("cy").get<double>(),   value.at("w").get<int>(),       value.at("h").get<int>()};
        Mat4 m;
        const json& rows = value.at("transform_matrix");
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) {
                m(r, c) = rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
            }
        }
        v.pose = Pose::from_matrix(m);
        return v;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("view: ") + e.what());
    }
}

json to_json(const StylizeRequest& req) {
    return {{"image", encode_image(req.image)}, {"prompt", req.prompt}};
}

json to_json(const MeshGenRequest& req) {
    return {{"image", encode_image(req.image)}};
}

json to_json(const GridEditRequest& req) {
    const auto depth = encode_depth(req.depth_grid);
    const auto& l = req.layout;
    return {{"color_grid", encode_image(req.color_grid)},
            {"depth_grid", base64_encode(encode_png(depth.pixels))},
            {"depth_scale", depth.max_depth},
            {"mask_grid", base64_encode(encode_mask_png(req.mask_grid))},
            {"prompt", req.prompt},
            {"rows", l.rows},
            {"cols", l.cols},
            {"blank_index", l.blank_index},
            {"tile_w", l.tile_w},
            {"tile_h", l.tile_h}};
}

json to_json(const RenderSceneRequest& req) {
    return {{"view", encode_view(req.view)}};
}

StylizeRequest stylize_request(const json& body) {
    return {decode_image(field(body, "image"), "image"), string_field(body, "prompt")};
}

MeshGenRequest mesh_request(const json& body) {
    return {decode_image(field(body, "image"), "image")};
}

GridEditRequest grid_request(const json& body) {
    GridEditRequest req;
    req.color_grid = decode_image(field(body, "color_grid"), "color_grid");
    const json& scale = field(body, "depth_scale");
    if (!scale.is_number()) {
        throw Error(ErrorCode::ParseError, "field 'depth_scale' must be a number");
    }
    try {
        req.depth_grid = decode_depth({decode_png_gray16(decode_payload(body, "depth_grid")), scale.get<double>()});
        req.mask_grid = decode_mask_png(decode_payload(body, "mask_grid"));
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, e.detail());
    }
    req.prompt = string_field(body, "prompt");
    req.layout = {int_field(body, "rows"), int_field(body, "cols"), int_field(body, "blank_index"),
                  int_field(body, "tile_w"), int_field(body, "tile_h")};
    return req;
}

RenderSceneRequest render_request(const json& body) {
    return {decode_view(field(body, "view"))};
}

json image_response(const RgbImage& image) {
    return {{"image", encode_image(image)}};
}

json mesh_response(const TriMesh& mesh) {
    const std::string obj = write_obj(mesh);
    return {{"mesh", base64_encode(std::span(reinterpret_cast<const std::uint8_t*>(obj.data()), obj.size()))},
            {"format", "obj"}};
}

RgbImage image_from_response(const json& body) {
    return decode_image(field(body, "image"), "image");
}

TriMesh mesh_from_response(const json& body) {
    const Bytes payload = decode_payload(body, "mesh");
    return parse_mesh_payload(payload);
}

json error_body(std::string_view code, std::string_view message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

}  // namespace primscene::wire
