#pragma once

// Reference computations used only by tests. Each one is written from the
// textbook definition and shares no code with the library under test.

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

struct V3 {
    double x, y, z;
};

inline V3 sub(V3 a, V3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline double dot(V3 a, V3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

/// 64-bit FNV-1a, byte at a time.
inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Mock stylizer gains: byte k (least significant first) -> 0.5 + 0.5 * b / 255.
inline std::array<double, 3> gains(std::string_view prompt) {
    const std::uint64_t h = fnv1a(prompt);
    std::array<double, 3> g{};
    for (int k = 0; k < 3; ++k) {
        g[k] = 0.5 + 0.5 * static_cast<double>((h >> (8 * k)) & 0xff) / 255.0;
    }
    return g;
}

/// Pinhole projection in the -z forward, y up, v down convention for a camera
/// at the origin with identity rotation.
inline std::optional<std::array<double, 2>> pinhole(double fx, double fy, double cx, double cy, V3 p) {
    if (p.z >= -1e-6) return std::nullopt;
    return std::array<double, 2>{cx + fx * p.x / -p.z, cy - fy * p.y / -p.z};
}

/// Distance along the ray to the first sphere hit, or nullopt.
inline std::optional<double> ray_sphere(V3 origin, V3 dir_unit, V3 center, double r) {
    const V3 oc = sub(origin, center);
    const double b = dot(oc, dir_unit);
    const double c = dot(oc, oc) - r * r;
    const double disc = b * b - c;
    if (disc < 0) return std::nullopt;
    const double t = -b - std::sqrt(disc);
    return t > 0 ? std::optional(t) : std::nullopt;
}

/// Area in pixels of the disk a sphere of radius r at distance d projects to
/// on the optical axis: pi * (f * r / sqrt(d^2 - r^2))^2.
inline double projected_disk_area(double f, double r, double d) {
    const double rho = f * r / std::sqrt(d * d - r * r);
    return std::numbers::pi * rho * rho;
}

/// n points on a sphere surface (Fibonacci lattice) plus its center.
inline std::vector<V3> sphere_points(V3 c, double r, int n) {
    std::vector<V3> out{c};
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / n;
        const double rad = std::sqrt(1.0 - y * y);
        const double th = golden * i;
        out.push_back({c.x + r * rad * std::cos(th), c.y + r * y, c.z + r * rad * std::sin(th)});
    }
    return out;
}

/// Camera-to-world rotation R (row-major) and translation t; world point to
/// camera coordinates is R^T (p - t).
struct Cam {
    std::array<double, 9> r;
    V3 t;
    double fx, fy, cx, cy;
    int w, h;
};

inline V3 to_cam(const Cam& cam, V3 p) {
    const V3 d = sub(p, cam.t);
    const auto& r = cam.r;
    return {r[0] * d.x + r[3] * d.y + r[6] * d.z, r[1] * d.x + r[4] * d.y + r[7] * d.z,
            r[2] * d.x + r[5] * d.y + r[8] * d.z};
}

/// True when any sample of the sphere projects inside the image between the
/// clip planes.
inline bool sphere_visible(const Cam& cam, V3 c, double r, double near, double far, int samples = 1000) {
    for (const V3& p : sphere_points(c, r, samples)) {
        const V3 q = to_cam(cam, p);
        if (-q.z <= near || -q.z >= far) continue;
        const auto uv = pinhole(cam.fx, cam.fy, cam.cx, cam.cy, q);
        if (uv && (*uv)[0] >= 0 && (*uv)[0] <= cam.w && (*uv)[1] >= 0 && (*uv)[1] <= cam.h) return true;
    }
    return false;
}

/// Relative path -> file bytes for every regular file under root.
inline std::map<std::string, std::string> tree(const std::filesystem::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        out[std::filesystem::relative(e.path(), root).generic_string()] =
            std::string(std::istreambuf_iterator<char>(in), {});
    }
    return out;
}

}  // namespace oracle
