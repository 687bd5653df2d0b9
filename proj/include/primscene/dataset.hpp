#pragma once

#include "primscene/geometry.hpp"
#include "primscene/image.hpp"

#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace primscene {

struct FrameRecord {
    std::string file_path;  // relative to the dataset root
    Pose transform;         // camera-to-world
    std::shared_ptr<const Rgb8Image> image;
};

/// A Nerfstudio-style capture held in memory. Frames share image buffers
/// between copies, so mutations that return a new dataset are cheap.
struct NerfDataset {
    CameraIntrinsics intrinsics;
    std::vector<FrameRecord> frames;
    std::filesystem::path root_dir;

    std::size_t size() const { return frames.size(); }
    bool empty() const { return frames.empty(); }
    CameraView view(std::size_t index) const { return {intrinsics, frames.at(index).transform}; }
    RgbImage image(std::size_t index) const { return to_float(*frames.at(index).image); }
};

inline constexpr const char* kTransformsFile = "transforms.json";

/// Accepts a dataset directory or a path to its transforms.json. Rotations
/// drifting by at most 1e-3 are projected back onto SO(3) and reported in
/// `warnings`; anything worse (or a reflection) is rejected.
NerfDataset load_dataset(const std::filesystem::path& path, std::vector<std::string>* warnings = nullptr);

void save_dataset(const NerfDataset& ds, const std::filesystem::path& dir);

struct NewFrame {
    CameraView view;
    RgbImage image;
};

std::string new_frame_path(int object_index, int view_index);

/// Appends frames named images/obj{object_index}_view{K}.png; existing frames
/// are shared untouched.
NerfDataset add_frames(const NerfDataset& ds, std::span<const NewFrame> frames, int object_index);

NerfDataset replace_frame_image(const NerfDataset& ds, std::size_t frame_index, const RgbImage& image);

/// SHA-256 of the frame's 8-bit pixel buffer.
std::string frame_hash(const FrameRecord& frame);

}  // namespace primscene
