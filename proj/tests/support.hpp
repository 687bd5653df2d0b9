#pragma once

#include "oracles.hpp"
#include "primscene/dataset.hpp"
#include "primscene/fixtures.hpp"
#include "primscene/geometry.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing {

class TempDir {
public:
    explicit TempDir(const std::string& tag = "t") {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() / ("primscene_" + tag + "_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline oracle::Cam cam_of(const primscene::CameraView& v) {
    oracle::Cam c{};
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) c.r[static_cast<std::size_t>(3 * i + j)] = v.pose.rotation(i, j);
    }
    c.t = {v.pose.translation.x(), v.pose.translation.y(), v.pose.translation.z()};
    c.fx = v.intrinsics.fx;
    c.fy = v.intrinsics.fy;
    c.cx = v.intrinsics.cx;
    c.cy = v.intrinsics.cy;
    c.w = v.intrinsics.width;
    c.h = v.intrinsics.height;
    return c;
}

inline oracle::V3 v3(const primscene::Vec3& v) {
    return {v.x(), v.y(), v.z()};
}

/// Small room capture, cheap enough for unit tests.
inline const primscene::NerfDataset& small_room() {
    static const primscene::NerfDataset ds = [] {
        primscene::SynthOptions o;
        o.frames = 24;
        o.width = 64;
        o.height = 48;
        o.focal = 54.0;
        return primscene::synth_room_dataset(o);
    }();
    return ds;
}

inline primscene::Pose random_pose(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> a(-180.0, 180.0);
    return {primscene::rotation_from_euler_deg(a(rng), a(rng), a(rng)), primscene::Vec3(3 * u(rng), 3 * u(rng), 3 * u(rng))};
}

}  // namespace testing
