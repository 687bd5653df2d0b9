#include "doctest.h"
#include "support.hpp"

#include "primscene/error.hpp"
#include "primscene/raster.hpp"

using namespace primscene;

namespace {

CameraView front_view(int size, double f) {
    return {{f, f, size / 2.0, size / 2.0, size, size}, look_at_pose({0, 0, 3}, {0, 0, 0}, {0, 1, 0})};
}

TriMesh quad_at(double z, const Vec3& color) {
    TriMesh m = tessellate_primitive({PrimitiveKind::Box, Pose{Mat3::Identity(), Vec3(0, 0, z)}, Vec3(1, 1, 1e-3)}, 1);
    for (auto& c : m.vertex_colors) c = color;
    return m;
}

TriMesh random_sphere(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1, 1), s(0.2, 0.8);
    Primitive p{PrimitiveKind::Sphere, {rotation_from_euler_deg(30 * u(rng), 40 * u(rng), 0), Vec3(u(rng), u(rng), u(rng))},
                Vec3(s(rng), s(rng), s(rng))};
    TriMesh m = tessellate_primitive(p, 6);
    for (auto& c : m.vertex_colors) c = Vec3(0.5 + 0.5 * u(rng), 0.5, 0.2);
    return m;
}

}  // namespace

TEST_SUITE("raster") {

TEST_CASE("sphere center depth matches ray-sphere intersection") {
    const CameraView v = front_view(256, 200);
    const TriMesh sphere = tessellate_primitive({PrimitiveKind::Sphere, Pose::identity(), Vec3::Ones()}, 64);
    const RenderOutput r = render_meshes(v, std::span(&sphere, 1), 0.01, 100);
    // Pixel (128,128) center sits half a pixel off axis; trace that exact ray.
    const Vec3 dir = (unproject(v, Vec2(128.5, 128.5), 1.0) - v.position()).normalized();
    const auto t = oracle::ray_sphere(testing::v3(v.position()), testing::v3(dir), {0, 0, 0}, 1.0);
    REQUIRE(t);
    const double expected_z = *t * dir.dot(v.forward());
    CHECK(std::abs(r.depth.at(128, 128) - expected_z) < 5e-3);
    CHECK(std::abs(r.depth.at(128, 128) - 2.0) < 5e-3);
}

TEST_CASE("silhouette area matches the projected disk") {
    const CameraView v = front_view(256, 200);
    const TriMesh sphere = tessellate_primitive({PrimitiveKind::Sphere, Pose::identity(), Vec3::Ones()}, 64);
    const RenderOutput r = render_meshes(v, std::span(&sphere, 1), 0.01, 100);
    const double expect = oracle::projected_disk_area(200, 1, 3);
    CHECK(std::abs(static_cast<double>(popcount(r.mask)) - expect) / expect < 0.02);
}

TEST_CASE("empty scene renders nothing") {
    const RenderOutput r = render_meshes(front_view(32, 30), std::span<const TriMesh>{}, 0.1, 10);
    CHECK(popcount(r.mask) == 0);
    for (float d : r.depth.data()) CHECK(d == 0.0f);
}

TEST_CASE("coplanar tie goes to the lower mesh index") {
    const std::vector<TriMesh> quads = {quad_at(0, {1, 0, 0}), quad_at(0, {0, 0, 1})};
    const CameraView v = front_view(64, 60);
    const RenderOutput r = render_meshes(v, std::span<const TriMesh>(quads), 0.1, 10);
    const RenderOutput only0 = render_meshes(v, std::span<const TriMesh>(quads.data(), 1), 0.1, 10);
    CHECK(popcount(r.mask) > 0);
    CHECK(r.color == only0.color);
}

TEST_CASE("nearer surface wins") {
    const std::vector<TriMesh> quads = {quad_at(-0.5, {1, 0, 0}), quad_at(0.5, {0, 1, 0})};
    const RenderOutput r = render_meshes(front_view(64, 60), std::span<const TriMesh>(quads), 0.1, 10);
    CHECK(r.color.at(32, 32, 1) > 0.0f);
    CHECK(r.color.at(32, 32, 0) == 0.0f);
}

TEST_CASE("clip range must be ordered and positive") {
    const CameraView v = front_view(8, 8);
    CHECK_THROWS_AS(render_meshes(v, std::span<const TriMesh>{}, 1.0, 1.0), Error);
    CHECK_THROWS_AS(render_meshes(v, std::span<const TriMesh>{}, 0.0, 1.0), Error);
}

TEST_CASE("geometry straddling the near plane is clipped, not dropped") {
    // A floor passing under the camera: part of it is behind the camera.
    TriMesh floor = tessellate_primitive({PrimitiveKind::Box, Pose{Mat3::Identity(), Vec3(0, -1, 0)}, Vec3(20, 1e-3, 20)}, 1);
    const CameraView v = front_view(64, 40);
    const RenderOutput r = render_meshes(v, std::span(&floor, 1), 0.1, 100);
    CHECK(popcount(r.mask) > 0);
    for (int y = 0; y < 64; ++y) {
        for (int x = 0; x < 64; ++x) {
            const float d = r.depth.at(x, y);
            CHECK((r.mask.at(x, y) == 1) == (d > 0.0f));
            if (d > 0) CHECK((d > 0.1f && d < 100.0f));
        }
    }
}

TEST_CASE("randomized scenes keep mask and depth coherent and deterministic across workers") {
    std::mt19937 rng(3);
    for (int trial = 0; trial < 6; ++trial) {
        std::vector<TriMesh> meshes;
        for (int i = 0; i < 4; ++i) meshes.push_back(random_sphere(rng));
        const CameraView v = front_view(96, 80);
        const RenderOutput a = render_meshes(v, std::span<const TriMesh>(meshes), 0.5, 4.0, 1);
        const RenderOutput b = render_meshes(v, std::span<const TriMesh>(meshes), 0.5, 4.0, 7);
        CHECK(a == b);
        for (int y = 0; y < 96; ++y) {
            for (int x = 0; x < 96; ++x) {
                const float d = a.depth.at(x, y);
                REQUIRE((a.mask.at(x, y) == 1) == (d > 0.0f));
                if (d > 0) REQUIRE((d > 0.5f && d < 4.0f));
                for (int c = 0; c < 3; ++c) REQUIRE((a.color.at(x, y, c) >= 0.0f && a.color.at(x, y, c) <= 1.0f));
            }
        }
    }
}

TEST_CASE("composite_over") {
    RgbImage base(6, 4, 3, 0.25f);
    RenderOutput overlay = empty_render(6, 4);
    for (float& c : overlay.color.data()) c = 0.75f;

    SUBCASE("empty mask keeps the base") {
        CHECK(composite_over(base, overlay) == base);
    }
    SUBCASE("full mask takes the overlay") {
        for (auto& m : overlay.mask.data()) m = 1;
        CHECK(composite_over(base, overlay) == overlay.color);
    }
    SUBCASE("half mask changes exactly the masked pixels") {
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 3; ++x) overlay.mask.at(x, y) = 1;
        const RgbImage out = composite_over(base, overlay);
        std::size_t changed = 0;
        for (int y = 0; y < 4; ++y)
            for (int x = 0; x < 6; ++x)
                if (out.at(x, y, 0) != base.at(x, y, 0)) ++changed;
        CHECK(changed == popcount(overlay.mask));
        CHECK(base.at(0, 0) == 0.25f);
    }
    SUBCASE("size mismatch") {
        CHECK_THROWS_AS(composite_over(RgbImage(5, 4, 3), overlay), Error);
    }
}

}
