#include "doctest.h"
#include "support.hpp"

#include "primscene/error.hpp"
#include "primscene/refgrid.hpp"

using namespace primscene;

namespace {

RenderOutput random_tile(std::mt19937& rng, int w, int h) {
    RenderOutput t = empty_render(w, h);
    std::uniform_real_distribution<float> u(0, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool hit = rng() & 1;
            t.mask.at(x, y) = hit;
            t.depth.at(x, y) = hit ? 0.1f + 5 * u(rng) : 0.0f;
            for (int c = 0; c < 3; ++c) t.color.at(x, y, c) = u(rng);
        }
    }
    return t;
}

}  // namespace

TEST_SUITE("refgrid") {

TEST_CASE("ring cameras") {
    const CameraIntrinsics k{200, 200, 128, 96, 256, 192};
    const auto views = select_reference_cameras(Vec3::Zero(), 1.0, 8, k);
    REQUIRE(views.size() == 8);
    for (const auto& v : views) {
        CHECK(std::abs(v.pose.translation.norm() - 2.5) < 1e-6);
        CHECK(v.intrinsics == k);
        const auto uv = project_point(v, Vec3::Zero());
        REQUIRE(uv);
        CHECK((*uv - Vec2(128, 96)).norm() < 1e-4);
    }
    const auto one = select_reference_cameras(Vec3(1, 2, 3), 0.4, 1, k);
    REQUIRE(one.size() == 1);
    // Azimuth 0 sits on +z, lifted by the elevation.
    const Vec3 off = one[0].pose.translation - Vec3(1, 2, 3);
    CHECK(off.x() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(off.z() > 0);
    CHECK(std::atan2(off.y(), off.z()) == doctest::Approx(20.0 * std::numbers::pi / 180));
}

TEST_CASE("grid shape and blank slot") {
    std::mt19937 rng(2);
    std::vector<RenderOutput> tiles;
    for (int i = 0; i < 8; ++i) tiles.push_back(random_tile(rng, 256, 256));
    const ReferenceGrid g = assemble_grid(tiles, 4, 3, 3);
    CHECK(g.color_grid.width() == 768);
    CHECK(g.mask_grid.height() == 768);
    const GridLayout layout{3, 3, 4, 256, 256};
    const MaskImage mask = extract_tile(g.mask_grid, layout, 4);
    const DepthImage depth = extract_tile(g.depth_grid, layout, 4);
    const RgbImage color = extract_tile(g.color_grid, layout, 4);
    for (auto m : mask.data()) REQUIRE(m == 0);
    for (auto d : depth.data()) REQUIRE(d == 0.0f);
    for (auto c : color.data()) REQUIRE(c == kBlankGray);
}

TEST_CASE("assemble and split are exact inverses") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const int rows = 1 + static_cast<int>(rng() % 4), cols = 2 + static_cast<int>(rng() % 3);
        const int w = 3 + static_cast<int>(rng() % 20), h = 3 + static_cast<int>(rng() % 20);
        const int blank = static_cast<int>(rng() % static_cast<unsigned>(rows * cols));
        std::vector<RenderOutput> tiles;
        for (int i = 0; i < rows * cols - 1; ++i) tiles.push_back(random_tile(rng, w, h));
        const ReferenceGrid g = assemble_grid(tiles, blank, rows, cols);
        const auto colors = split_grid(g.color_grid, rows, cols, w, h);
        const auto depths = split_grid(g.depth_grid, rows, cols, w, h);
        const auto masks = split_grid(g.mask_grid, rows, cols, w, h);
        REQUIRE(colors.size() == static_cast<std::size_t>(rows * cols));
        const GridLayout layout{rows, cols, blank, w, h};
        for (int i = 0; i < rows * cols - 1; ++i) {
            const auto slot = static_cast<std::size_t>(slot_of_tile(layout, i));
            CHECK(colors[slot] == tiles[static_cast<std::size_t>(i)].color);
            CHECK(depths[slot] == tiles[static_cast<std::size_t>(i)].depth);
            CHECK(masks[slot] == tiles[static_cast<std::size_t>(i)].mask);
        }
        // Channel coherence over the whole grid.
        for (std::size_t p = 0; p < g.mask_grid.data().size(); ++p) {
            REQUIRE((g.mask_grid.data()[p] == 1) == (g.depth_grid.data()[p] > 0));
        }
    }
}

TEST_CASE("grid errors") {
    std::mt19937 rng(4);
    std::vector<RenderOutput> tiles;
    for (int i = 0; i < 7; ++i) tiles.push_back(random_tile(rng, 8, 8));
    try {
        assemble_grid(tiles, 4, 3, 3);
        FAIL("expected tile-count-mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TileCountMismatch);
    }
    tiles.push_back(random_tile(rng, 8, 9));
    try {
        assemble_grid(tiles, 4, 3, 3);
        FAIL("expected tile-dimension-mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TileDimensionMismatch);
    }
    CHECK(split_grid(RgbImage(768, 768, 3), 3, 3, 256, 256).size() == 9);
    try {
        split_grid(RgbImage(769, 768, 3), 3, 3, 256, 256);
        FAIL("expected dimension-mismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("grid persistence") {
    std::mt19937 rng(6);
    std::vector<RenderOutput> tiles;
    for (int i = 0; i < 8; ++i) tiles.push_back(random_tile(rng, 16, 12));
    const CameraIntrinsics k{20, 20, 8, 6, 16, 12};
    const ReferenceGrid g = assemble_grid(tiles, 4, 3, 3, select_reference_cameras(Vec3::Zero(), 1, 8, k));
    testing::TempDir dir("grid");
    save_grid(g, dir.path());
    const ReferenceGrid back = load_grid(dir.path());
    CHECK(back.layout == g.layout);
    CHECK(back.mask_grid == g.mask_grid);
    CHECK(back.color_grid == to_float(quantize(g.color_grid)));
    REQUIRE(back.views.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
        CHECK((back.views[i].pose.matrix() - g.views[i].pose.matrix()).cwiseAbs().maxCoeff() < 1e-12);
    }
    float max_depth = 0;
    for (float d : g.depth_grid.data()) max_depth = std::max(max_depth, d);
    for (std::size_t p = 0; p < g.depth_grid.data().size(); ++p) {
        CHECK(std::abs(back.depth_grid.data()[p] - g.depth_grid.data()[p]) <= max_depth / 65535.0 + 1e-6);
    }
}

}
