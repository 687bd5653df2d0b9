#pragma once

#include "primscene/error.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace primscene {

/// Dense interleaved image, row-major from the top-left pixel.
template <typename T>
class Image {
public:
    using value_type = T;

    Image() = default;
    Image(int width, int height, int channels, T fill = T{})
        : width_(width),
          height_(height),
          channels_(channels),
          data_(static_cast<std::size_t>(width) * height * channels, fill) {}

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

    std::size_t index(int x, int y, int c = 0) const noexcept {
        return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
    }
    T& at(int x, int y, int c = 0) noexcept { return data_[index(x, y, c)]; }
    const T& at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

    std::span<T> data() noexcept { return data_; }
    std::span<const T> data() const noexcept { return data_; }

    template <typename U>
    bool same_shape(const Image<U>& other) const noexcept {
        return width_ == other.width() && height_ == other.height() && channels_ == other.channels();
    }
    bool same_size(int w, int h) const noexcept { return width_ == w && height_ == h; }

    bool operator==(const Image&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 0;
    std::vector<T> data_;
};

using RgbImage = Image<float>;          // 3 channels in [0,1]
using DepthImage = Image<float>;        // 1 channel, -z distance, 0 = empty
using MaskImage = Image<std::uint8_t>;  // 1 channel, 0 or 1
using Rgb8Image = Image<std::uint8_t>;  // 3 channels, what lands on disk
using Gray16Image = Image<std::uint16_t>;

inline constexpr float kBlankGray = 0.5f;

Rgb8Image quantize(const RgbImage& image);
RgbImage to_float(const Rgb8Image& image);

/// Bilinear, used when shrinking dataset-resolution images into grid tiles.
RgbImage resize_bilinear(const RgbImage& image, int width, int height);
/// Bicubic, clamped to [0,1]; used when growing edited tiles back.
RgbImage resize_bicubic(const RgbImage& image, int width, int height);

/// Throws DimensionMismatch naming `what` unless both images share a shape.
template <typename A, typename B>
void require_same_shape(const Image<A>& a, const Image<B>& b, const std::string& what);

// PNG boundary. RGB is 8-bit, masks 8-bit gray (0/255 on disk), depth 16-bit
// gray scaled by a per-image maximum recorded alongside the file.
std::vector<std::uint8_t> encode_png(const Rgb8Image& image);
std::vector<std::uint8_t> encode_png(const Gray16Image& image);
std::vector<std::uint8_t> encode_mask_png(const MaskImage& mask);

Rgb8Image decode_png_rgb(std::span<const std::uint8_t> bytes);
MaskImage decode_mask_png(std::span<const std::uint8_t> bytes);
Gray16Image decode_png_gray16(std::span<const std::uint8_t> bytes);

struct EncodedDepth {
    Gray16Image pixels;
    double max_depth = 0.0;  // depth represented by 65535
};

EncodedDepth encode_depth(const DepthImage& depth);
DepthImage decode_depth(const EncodedDepth& encoded);

template <typename A, typename B>
void require_same_shape(const Image<A>& a, const Image<B>& b, const std::string& what) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorCode::DimensionMismatch, what + ": " + std::to_string(a.width()) + "x" +
                                                      std::to_string(a.height()) + " vs " +
                                                      std::to_string(b.width()) + "x" + std::to_string(b.height()));
    }
}

}  // namespace primscene
