#include "primscene/refgrid.hpp"

#include "primscene/encoding.hpp"
#include "primscene/error.hpp"

#include "json.hpp"

#include <cmath>
#include <numbers>

namespace fs = std::filesystem;
using nlohmann::json;

namespace primscene {

void GridLayout::validate() const {
    if (rows <= 0 || cols <= 0 || tile_w <= 0 || tile_h <= 0) {
        throw Error(ErrorCode::InvalidConfig, "grid rows, cols and tile size must be positive");
    }
    if (rows * cols < 2) {
        throw Error(ErrorCode::InvalidConfig, "grid needs at least two slots");
    }
    if (blank_index < 0 || blank_index >= rows * cols) {
        throw Error(ErrorCode::InvalidConfig, "blank index " + std::to_string(blank_index) + " outside the grid");
    }
}

std::vector<CameraView> select_reference_cameras(const Vec3& centroid, double bound_radius, int count,
                                                 const CameraIntrinsics& intrinsics, const RingOptions& ring) {
    if (!(bound_radius > 0.0) || count < 1) {
        throw Error(ErrorCode::InvalidRequest, "reference ring needs a positive radius and at least one camera");
    }
    const double radius = ring.radius_multiplier * bound_radius;
    const double elevation = ring.elevation_deg * std::numbers::pi / 180.0;
    std::vector<CameraView> views;
    views.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const double azimuth = 2.0 * std::numbers::pi * k / count;
        const Vec3 offset(std::cos(elevation) * std::sin(azimuth), std::sin(elevation),
                          std::cos(elevation) * std::cos(azimuth));
        views.push_back({intrinsics, look_at_pose(centroid + radius * offset, centroid, Vec3::UnitY())});
    }
    return views;
}

int slot_of_tile(const GridLayout& layout, int tile_index) {
    return tile_index < layout.blank_index ? tile_index : tile_index + 1;
}

ReferenceGrid assemble_grid(std::span<const RenderOutput> tiles, int blank_index, int rows, int cols,
                            std::vector<CameraView> views) {
    if (tiles.empty()) {
        throw Error(ErrorCode::TileCountMismatch, "no tiles");
    }
    GridLayout layout{rows, cols, blank_index, tiles.front().width(), tiles.front().height()};
    layout.validate();
    if (static_cast<int>(tiles.size()) != layout.slots() - 1) {
        throw Error(ErrorCode::TileCountMismatch, "expected " + std::to_string(layout.slots() - 1) + " tiles, got " +
                                                      std::to_string(tiles.size()));
    }
    for (const auto& t : tiles) {
        if (!t.mask.same_size(layout.tile_w, layout.tile_h) || !t.color.same_size(layout.tile_w, layout.tile_h) ||
            !t.depth.same_size(layout.tile_w, layout.tile_h)) {
            throw Error(ErrorCode::TileDimensionMismatch, "tiles must share one size");
        }
    }
    if (!views.empty() && views.size() != tiles.size()) {
        throw Error(ErrorCode::TileCountMismatch, "one view per tile required");
    }

    const int gw = cols * layout.tile_w;
    const int gh = rows * layout.tile_h;
    ReferenceGrid grid{layout, RgbImage(gw, gh, 3, kBlankGray), DepthImage(gw, gh, 1), MaskImage(gw, gh, 1),
                       std::move(views)};
    for (std::size_t i = 0; i < tiles.size(); ++i) {
        const int slot = slot_of_tile(layout, static_cast<int>(i));
        paste_tile(grid.color_grid, layout, slot, tiles[i].color);
        paste_tile(grid.depth_grid, layout, slot, tiles[i].depth);
        paste_tile(grid.mask_grid, layout, slot, tiles[i].mask);
    }
    return grid;
}

namespace {

json view_json(const CameraView& v) {
    const auto& k = v.intrinsics;
    json m = json::array();
    const Mat4 t = v.pose.matrix();
    for (int r = 0; r < 4; ++r) {
        m.push_back(json::array({t(r, 0), t(r, 1), t(r, 2), t(r, 3)}));
    }
    return {{"fl_x", k.fx}, {"fl_y", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"w", k.width}, {"h", k.height},
            {"transform_matrix", m}};
}

CameraView view_from_json(const json& j) {
    CameraView v;
    v.intrinsics = {j.at("fl_x").get<double>(), j.at("fl_y").get<double>(), j.at("cx").get<double>(),
                    j.at("cy").get<double>(),   j.at("w").get<int>(),       j.at("h").get<int>()};
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            m(r, c) = j.at("transform_matrix").at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    v.pose = Pose::from_matrix(m);
    return v;
}

}  // namespace

void save_grid(const ReferenceGrid& grid, const fs::path& dir) {
    const auto depth = encode_depth(grid.depth_grid);
    write_file(dir / "color.png", encode_png(quantize(grid.color_grid)));
    write_file(dir / "mask.png", encode_mask_png(grid.mask_grid));
    write_file(dir / "depth.png", encode_png(depth.pixels));
    const auto& l = grid.layout;
    json views = json::array();
    for (std::size_t i = 0; i < grid.views.size(); ++i) {
        json v = view_json(grid.views[i]);
        v["slot"] = slot_of_tile(l, static_cast<int>(i));
        views.push_back(std::move(v));
    }
    const json meta = {{"rows", l.rows},     {"cols", l.cols},     {"blank_index", l.blank_index},
                       {"tile_w", l.tile_w}, {"tile_h", l.tile_h}, {"depth_scale", depth.max_depth},
                       {"views", views}};
    write_file(dir / "grid.json", meta.dump(2));
}

ReferenceGrid load_grid(const fs::path& dir) {
    ReferenceGrid grid;
    try {
        const Bytes meta_bytes = read_file(dir / "grid.json");
        const json meta = json::parse(meta_bytes.begin(), meta_bytes.end());
        grid.layout = {meta.at("rows").get<int>(), meta.at("cols").get<int>(), meta.at("blank_index").get<int>(),
                       meta.at("tile_w").get<int>(), meta.at("tile_h").get<int>()};
        for (const auto& v : meta.at("views")) {
            grid.views.push_back(view_from_json(v));
        }
        grid.layout.validate();
        grid.color_grid = to_float(decode_png_rgb(read_file(dir / "color.png")));
        grid.mask_grid = decode_mask_png(read_file(dir / "mask.png"));
        grid.depth_grid =
            decode_depth({decode_png_gray16(read_file(dir / "depth.png")), meta.at("depth_scale").get<double>()});
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, (dir / "grid.json").string() + ": " + e.what());
    }
    const int gw = grid.layout.cols * grid.layout.tile_w;
    const int gh = grid.layout.rows * grid.layout.tile_h;
    if (!grid.color_grid.same_size(gw, gh) || !grid.mask_grid.same_size(gw, gh) || !grid.depth_grid.same_size(gw, gh)) {
        throw Error(ErrorCode::DimensionMismatch, "grid images do not match grid.json layout");
    }
    return grid;
}

}  // namespace primscene
