#include "primscene/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include <algorithm>
#include <cmath>

namespace primscene {
namespace {

template <typename T>
cv::Mat wrap(const Image<T>& image, int depth) {
    // OpenCV never writes through this header; const_cast only satisfies its API.
    return cv::Mat(image.height(), image.width(), CV_MAKETYPE(depth, image.channels()),
                   const_cast<T*>(image.data().data()));
}

template <typename T>
Image<T> unwrap(const cv::Mat& mat) {
    Image<T> out(mat.cols, mat.rows, mat.channels());
    cv::Mat dst(mat.rows, mat.cols, mat.type(), out.data().data());
    mat.copyTo(dst);
    return out;
}

RgbImage resize_impl(const RgbImage& image, int width, int height, int interpolation) {
    if (width <= 0 || height <= 0) {
        throw Error(ErrorCode::InvalidRequest, "resize target must be positive");
    }
    if (image.same_size(width, height)) {
        return image;
    }
    cv::Mat out;
    cv::resize(wrap(image, CV_32F), out, cv::Size(width, height), 0, 0, interpolation);
    auto result = unwrap<float>(out);
    for (auto& v : result.data()) {
        v = std::clamp(v, 0.0f, 1.0f);
    }
    return result;
}

std::vector<std::uint8_t> encode(const cv::Mat& mat) {
    std::vector<std::uint8_t> bytes;
    const std::vector<int> params = {cv::IMWRITE_PNG_COMPRESSION, 6};
    if (!cv::imencode(".png", mat, bytes, params)) {
        throw Error(ErrorCode::IoError, "PNG encoding failed");
    }
    return bytes;
}

cv::Mat decode(std::span<const std::uint8_t> bytes, int flags) {
    if (bytes.empty()) {
        throw Error(ErrorCode::ParseError, "empty PNG payload");
    }
    const cv::Mat raw(1, static_cast<int>(bytes.size()), CV_8UC1, const_cast<std::uint8_t*>(bytes.data()));
    cv::Mat mat;
    try {
        mat = cv::imdecode(raw, flags);
    } catch (const cv::Exception& e) {
        throw Error(ErrorCode::ParseError, std::string("PNG decoding failed: ") + e.what());
    }
    if (mat.empty()) {
        throw Error(ErrorCode::ParseError, "PNG decoding failed");
    }
    return mat;
}

}  // namespace

Rgb8Image quantize(const RgbImage& image) {
    Rgb8Image out(image.width(), image.height(), image.channels());
    auto src = image.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<std::uint8_t>(std::lround(std::clamp(src[i], 0.0f, 1.0f) * 255.0f));
    }
    return out;
}

RgbImage to_float(const Rgb8Image& image) {
    RgbImage out(image.width(), image.height(), image.channels());
    auto src = image.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<float>(src[i]) / 255.0f;
    }
    return out;
}

RgbImage resize_bilinear(const RgbImage& image, int width, int height) {
    return resize_impl(image, width, height, cv::INTER_LINEAR);
}

RgbImage resize_bicubic(const RgbImage& image, int width, int height) {
    return resize_impl(image, width, height, cv::INTER_CUBIC);
}

std::vector<std::uint8_t> encode_png(const Rgb8Image& image) {
    if (image.channels() != 3) {
        throw Error(ErrorCode::InvalidRequest, "RGB PNG requires 3 channels");
    }
    cv::Mat bgr;
    cv::cvtColor(wrap(image, CV_8U), bgr, cv::COLOR_RGB2BGR);
    return encode(bgr);
}

std::vector<std::uint8_t> encode_png(const Gray16Image& image) {
    return encode(wrap(image, CV_16U));
}

std::vector<std::uint8_t> encode_mask_png(const MaskImage& mask) {
    MaskImage scaled = mask;
    for (auto& v : scaled.data()) {
        v = v ? 255 : 0;
    }
    return encode(wrap(scaled, CV_8U));
}

Rgb8Image decode_png_rgb(std::span<const std::uint8_t> bytes) {
    cv::Mat bgr = decode(bytes, cv::IMREAD_COLOR);
    if (bgr.depth() != CV_8U) {
        throw Error(ErrorCode::ParseError, "expected an 8-bit PNG");
    }
    cv::Mat rgb;
    cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
    return unwrap<std::uint8_t>(rgb);
}

MaskImage decode_mask_png(std::span<const std::uint8_t> bytes) {
    cv::Mat gray = decode(bytes, cv::IMREAD_GRAYSCALE);
    auto mask = unwrap<std::uint8_t>(gray);
    for (auto& v : mask.data()) {
        v = v >= 128 ? 1 : 0;
    }
    return mask;
}

Gray16Image decode_png_gray16(std::span<const std::uint8_t> bytes) {
    cv::Mat mat = decode(bytes, cv::IMREAD_UNCHANGED);
    if (mat.depth() != CV_16U || mat.channels() != 1) {
        throw Error(ErrorCode::ParseError, "expected a 16-bit grayscale PNG");
    }
    return unwrap<std::uint16_t>(mat);
}

EncodedDepth encode_depth(const DepthImage& depth) {
    EncodedDepth out{Gray16Image(depth.width(), depth.height(), 1), 0.0};
    for (float d : depth.data()) {
        out.max_depth = std::max(out.max_depth, static_cast<double>(d));
    }
    if (out.max_depth <= 0.0) {
        return out;
    }
    auto src = depth.data();
    auto dst = out.pixels.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        // Nonzero depths never quantize to 0, so mask/depth coherence survives the round trip.
        const long q = std::lround(src[i] / out.max_depth * 65535.0);
        dst[i] = src[i] > 0.0f ? static_cast<std::uint16_t>(std::clamp(q, 1L, 65535L)) : 0;
    }
    return out;
}

DepthImage decode_depth(const EncodedDepth& encoded) {
    DepthImage out(encoded.pixels.width(), encoded.pixels.height(), 1);
    auto src = encoded.pixels.data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = static_cast<float>(src[i] / 65535.0 * encoded.max_depth);
    }
    return out;
}

}  // namespace primscene
