#pragma once

#include "primscene/geometry.hpp"
#include "primscene/image.hpp"

#include <span>
#include <vector>

namespace primscene {

/// Condition images for one view. depth holds the -z distance of the nearest
/// surface and is 0 exactly where mask is 0.
struct RenderOutput {
    RgbImage color;
    DepthImage depth;
    MaskImage mask;

    int width() const { return mask.width(); }
    int height() const { return mask.height(); }
    bool operator==(const RenderOutput&) const = default;
};

/// Z-buffered, perspective-correct rasterization with flat headlight shading.
/// Equal depths resolve to the lower mesh index, then the lower triangle index,
/// independent of `workers` (0 = hardware concurrency).
RenderOutput render_meshes(const CameraView& view, std::span<const TriMesh* const> meshes, double near, double far,
                           int workers = 0);
RenderOutput render_meshes(const CameraView& view, std::span<const TriMesh> meshes, double near, double far,
                           int workers = 0);

RenderOutput empty_render(int width, int height);

RgbImage composite_over(const RgbImage& base, const RenderOutput& overlay);

std::size_t popcount(const MaskImage& mask);

}  // namespace primscene
