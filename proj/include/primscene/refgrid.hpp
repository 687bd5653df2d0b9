#pragma once

#include "primscene/geometry.hpp"
#include "primscene/image.hpp"
#include "primscene/raster.hpp"

#include <algorithm>
#include <filesystem>
#include <span>
#include <vector>

namespace primscene {

struct GridLayout {
    int rows = 3;
    int cols = 3;
    int blank_index = 4;
    int tile_w = 256;
    int tile_h = 256;

    int slots() const { return rows * cols; }
    void validate() const;
    bool operator==(const GridLayout&) const = default;
};

/// Tiled condition images with one blank slot. views[i] belongs to the i-th
/// non-blank slot in row-major order.
struct ReferenceGrid {
    GridLayout layout;
    RgbImage color_grid;
    DepthImage depth_grid;
    MaskImage mask_grid;
    std::vector<CameraView> views;
};

struct RingOptions {
    double radius_multiplier = 2.5;
    double elevation_deg = 20.0;
};

/// Cameras on a horizontal ring around `centroid` at radius_multiplier *
/// bound_radius, lifted by the elevation angle, azimuth k * 360/count
/// measured from +z toward +x, each looking at the centroid with world-y up.
std::vector<CameraView> select_reference_cameras(const Vec3& centroid, double bound_radius, int count,
                                                 const CameraIntrinsics& intrinsics, const RingOptions& ring = {});

/// Slot index (row-major, counting the blank) of the i-th non-blank tile.
int slot_of_tile(const GridLayout& layout, int tile_index);

/// Places tiles row-major around the blank slot, which gets mid-gray color
/// and zero depth/mask. Tile size comes from the tiles themselves.
ReferenceGrid assemble_grid(std::span<const RenderOutput> tiles, int blank_index, int rows, int cols,
                            std::vector<CameraView> views = {});

template <typename T>
std::vector<Image<T>> split_grid(const Image<T>& grid, int rows, int cols, int tile_w, int tile_h);

template <typename T>
Image<T> extract_tile(const Image<T>& grid, const GridLayout& layout, int slot);

template <typename T>
void paste_tile(Image<T>& grid, const GridLayout& layout, int slot, const Image<T>& tile);

/// Three PNGs plus grid.json (layout, per-slot camera poses, depth scale).
void save_grid(const ReferenceGrid& grid, const std::filesystem::path& dir);
ReferenceGrid load_grid(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------

template <typename T>
std::vector<Image<T>> split_grid(const Image<T>& grid, int rows, int cols, int tile_w, int tile_h) {
    if (rows <= 0 || cols <= 0 || tile_w <= 0 || tile_h <= 0 || grid.width() != cols * tile_w ||
        grid.height() != rows * tile_h) {
        throw Error(ErrorCode::DimensionMismatch,
                    "grid " + std::to_string(grid.width()) + "x" + std::to_string(grid.height()) + " is not " +
                        std::to_string(rows) + "x" + std::to_string(cols) + " tiles of " + std::to_string(tile_w) +
                        "x" + std::to_string(tile_h));
    }
    std::vector<Image<T>> tiles;
    tiles.reserve(static_cast<std::size_t>(rows * cols));
    const int ch = grid.channels();
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            Image<T> tile(tile_w, tile_h, ch);
            for (int y = 0; y < tile_h; ++y) {
                const T* src = &grid.at(c * tile_w, r * tile_h + y);
                std::copy(src, src + static_cast<std::ptrdiff_t>(tile_w) * ch, &tile.at(0, y));
            }
            tiles.push_back(std::move(tile));
        }
    }
    return tiles;
}

template <typename T>
Image<T> extract_tile(const Image<T>& grid, const GridLayout& layout, int slot) {
    Image<T> tile(layout.tile_w, layout.tile_h, grid.channels());
    const int x0 = (slot % layout.cols) * layout.tile_w;
    const int y0 = (slot / layout.cols) * layout.tile_h;
    for (int y = 0; y < layout.tile_h; ++y) {
        const T* src = &grid.at(x0, y0 + y);
        std::copy(src, src + static_cast<std::ptrdiff_t>(layout.tile_w) * grid.channels(), &tile.at(0, y));
    }
    return tile;
}

template <typename T>
void paste_tile(Image<T>& grid, const GridLayout& layout, int slot, const Image<T>& tile) {
    if (!tile.same_size(layout.tile_w, layout.tile_h) || tile.channels() != grid.channels()) {
        throw Error(ErrorCode::TileDimensionMismatch, "tile does not match the grid layout");
    }
    const int x0 = (slot % layout.cols) * layout.tile_w;
    const int y0 = (slot / layout.cols) * layout.tile_h;
    for (int y = 0; y < layout.tile_h; ++y) {
        const T* src = &tile.at(0, y);
        std::copy(src, src + static_cast<std::ptrdiff_t>(layout.tile_w) * grid.channels(), &grid.at(x0, y0 + y));
    }
}

}  // namespace primscene
