#include "primscene/raster.hpp"

#include "primscene/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

namespace primscene {
namespace {

struct ClipVertex {
    Vec3 pos;  // camera space
    Vec3 color;
};

struct ScreenTriangle {
    std::array<Vec2, 3> screen;
    std::array<double, 3> inv_depth;
    std::array<Vec3, 3> color_over_depth;
    double inv_area = 0.0;
    float shade = 0.0f;
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;  // inclusive pixel bounds
};

double edge(const Vec2& a, const Vec2& b, const Vec2& p) {
    return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// Keeps the part of the polygon with z <= -near.
std::vector<ClipVertex> clip_near(const std::array<ClipVertex, 3>& tri, double near) {
    std::vector<ClipVertex> out;
    out.reserve(4);
    for (std::size_t i = 0; i < 3; ++i) {
        const ClipVertex& a = tri[i];
        const ClipVertex& b = tri[(i + 1) % 3];
        const double da = -near - a.pos.z();  // >= 0 inside
        const double db = -near - b.pos.z();
        if (da >= 0.0) {
            out.push_back(a);
        }
        if ((da >= 0.0) != (db >= 0.0)) {
            const double t = da / (da - db);
            out.push_back({a.pos + t * (b.pos - a.pos), a.color + t * (b.color - a.color)});
        }
    }
    return out;
}

class TriangleSetup {
public:
    TriangleSetup(const CameraIntrinsics& k, double near) : k_(k), near_(near) {}

    void add(const std::array<ClipVertex, 3>& tri, std::vector<ScreenTriangle>& out) const {
        const Vec3 n = (tri[1].pos - tri[0].pos).cross(tri[2].pos - tri[0].pos);
        const double len = n.norm();
        if (!(len > 0.0)) {
            return;
        }
        // Headlight along camera forward (0,0,-1); no culling, so use |n.l|.
        const auto shade = static_cast<float>(std::abs(n.z()) / len);
        const auto poly = clip_near(tri, near_);
        for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
            emit({poly[0], poly[i], poly[i + 1]}, shade, out);
        }
    }

private:
    void emit(const std::array<ClipVertex, 3>& tri, float shade, std::vector<ScreenTriangle>& out) const {
        ScreenTriangle st;
        st.shade = shade;
        double umin = std::numeric_limits<double>::infinity(), umax = -umin;
        double vmin = umin, vmax = -umin;
        for (std::size_t i = 0; i < 3; ++i) {
            const Vec3& p = tri[i].pos;
            const double inv = 1.0 / -p.z();
            st.screen[i] = Vec2(k_.cx + k_.fx * p.x() * inv, k_.cy - k_.fy * p.y() * inv);
            st.inv_depth[i] = inv;
            st.color_over_depth[i] = tri[i].color * inv;
            umin = std::min(umin, st.screen[i].x());
            umax = std::max(umax, st.screen[i].x());
            vmin = std::min(vmin, st.screen[i].y());
            vmax = std::max(vmax, st.screen[i].y());
        }
        const double area = edge(st.screen[0], st.screen[1], st.screen[2]);
        if (!std::isfinite(area) || std::abs(area) < 1e-12) {
            return;
        }
        st.inv_area = 1.0 / area;
        // Pixel x is sampled at x + 0.5.
        st.x0 = static_cast<int>(std::max(0.0, std::ceil(umin - 0.5)));
        st.x1 = static_cast<int>(std::min<double>(k_.width - 1, std::floor(umax - 0.5)));
        st.y0 = static_cast<int>(std::max(0.0, std::ceil(vmin - 0.5)));
        st.y1 = static_cast<int>(std::min<double>(k_.height - 1, std::floor(vmax - 0.5)));
        if (st.x0 > st.x1 || st.y0 > st.y1) {
            return;
        }
        out.push_back(st);
    }

    CameraIntrinsics k_;
    double near_;
};

void rasterize_rows(const std::vector<ScreenTriangle>& tris, int row_begin, int row_end, double near, double far,
                    RenderOutput& out) {
    const int width = out.width();
    for (const auto& t : tris) {
        const int y0 = std::max(t.y0, row_begin);
        const int y1 = std::min(t.y1, row_end - 1);
        for (int y = y0; y <= y1; ++y) {
            for (int x = t.x0; x <= t.x1; ++x) {
                const Vec2 p(x + 0.5, y + 0.5);
                const double w0 = edge(t.screen[1], t.screen[2], p) * t.inv_area;
                const double w1 = edge(t.screen[2], t.screen[0], p) * t.inv_area;
                const double w2 = edge(t.screen[0], t.screen[1], p) * t.inv_area;
                if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) {
                    continue;
                }
                const double inv = w0 * t.inv_depth[0] + w1 * t.inv_depth[1] + w2 * t.inv_depth[2];
                const double depth = 1.0 / inv;
                if (!(depth > near) || !(depth < far)) {
                    continue;
                }
                const std::size_t idx = static_cast<std::size_t>(y) * width + x;
                float& zbuf = out.depth.data()[idx];
                // Compare at buffer precision so exact ties keep the earlier mesh.
                if (out.mask.data()[idx] && !(static_cast<float>(depth) < zbuf)) {
                    continue;
                }
                const Vec3 c =
                    (w0 * t.color_over_depth[0] + w1 * t.color_over_depth[1] + w2 * t.color_over_depth[2]) * depth;
                zbuf = static_cast<float>(depth);
                out.mask.data()[idx] = 1;
                for (int ch = 0; ch < 3; ++ch) {
                    out.color.data()[idx * 3 + ch] = std::clamp(static_cast<float>(c[ch]) * t.shade, 0.0f, 1.0f);
                }
            }
        }
    }
}

}  // namespace

RenderOutput empty_render(int width, int height) {
    return {RgbImage(width, height, 3), DepthImage(width, height, 1), MaskImage(width, height, 1)};
}

RenderOutput render_meshes(const CameraView& view, std::span<const TriMesh* const> meshes, double near, double far,
                           int workers) {
    if (!(near > 0.0) || !(near < far)) {
        throw Error(ErrorCode::InvalidClipRange,
                    "near " + std::to_string(near) + " must satisfy 0 < near < far " + std::to_string(far));
    }
    const auto& k = view.intrinsics;
    k.validate();

    const TriangleSetup setup(k, near);
    const Mat3 rt = view.pose.rotation.transpose();
    std::vector<ScreenTriangle> tris;
    for (const TriMesh* mesh : meshes) {
        std::vector<Vec3> cam(mesh->vertices.size());
        for (std::size_t i = 0; i < cam.size(); ++i) {
            cam[i] = rt * (mesh->vertices[i] - view.pose.translation);
        }
        for (const auto& tri : mesh->triangles) {
            setup.add({ClipVertex{cam[tri[0]], mesh->vertex_colors[tri[0]]},
                       ClipVertex{cam[tri[1]], mesh->vertex_colors[tri[1]]},
                       ClipVertex{cam[tri[2]], mesh->vertex_colors[tri[2]]}},
                      tris);
        }
    }

    RenderOutput out = empty_render(k.width, k.height);
    if (workers <= 0) {
        workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    }
    workers = std::min(workers, k.height);
    if (workers == 1) {
        rasterize_rows(tris, 0, k.height, near, far, out);
        return out;
    }
    // Row bands touch disjoint pixels and each walks triangles in submission
    // order, so the result does not depend on the band split.
    {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) {
            const int begin = k.height * w / workers;
            const int end = k.height * (w + 1) / workers;
            pool.emplace_back([&, begin, end] { rasterize_rows(tris, begin, end, near, far, out); });
        }
    }
    return out;
}

RenderOutput render_meshes(const CameraView& view, std::span<const TriMesh> meshes, double near, double far,
                           int workers) {
    std::vector<const TriMesh*> ptrs;
    ptrs.reserve(meshes.size());
    for (const auto& m : meshes) {
        ptrs.push_back(&m);
    }
    return render_meshes(view, std::span<const TriMesh* const>(ptrs), near, far, workers);
}

RgbImage composite_over(const RgbImage& base, const RenderOutput& overlay) {
    require_same_shape(base, overlay.mask, "composite_over");
    RgbImage out = base;
    auto dst = out.data();
    auto src = overlay.color.data();
    auto mask = overlay.mask.data();
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (mask[i]) {
            std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(i * 3), 3, dst.begin() + static_cast<std::ptrdiff_t>(i * 3));
        }
    }
    return out;
}

std::size_t popcount(const MaskImage& mask) {
    return static_cast<std::size_t>(std::count_if(mask.data().begin(), mask.data().end(), [](auto v) { return v != 0; }));
}

}  // namespace primscene
