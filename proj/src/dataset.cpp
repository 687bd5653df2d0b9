#include "primscene/dataset.hpp"

#include "primscene/encoding.hpp"
#include "primscene/error.hpp"

#include "json.hpp"
#include <spdlog/spdlog.h>

#include <cmath>
#include <fstream>
#include <unordered_set>

namespace fs = std::filesystem;
using nlohmann::json;

namespace primscene {
namespace {

constexpr double kAcceptDrift = 1e-6;
constexpr double kRepairDrift = 1e-3;

double require_number(const json& obj, const char* field, const std::string& where) {
    const auto it = obj.find(field);
    if (it == obj.end()) {
        throw Error(ErrorCode::ParseError, where + ": missing field '" + field + "'");
    }
    if (!it->is_number()) {
        throw Error(ErrorCode::ParseError, where + ": field '" + std::string(field) + "' is not a number");
    }
    return it->get<double>();
}

int require_int(const json& obj, const char* field, const std::string& where) {
    const double v = require_number(obj, field, where);
    if (v != std::floor(v) || v <= 0.0 || v > 1e6) {
        throw Error(ErrorCode::ParseError, where + ": field '" + std::string(field) + "' is not a positive integer");
    }
    return static_cast<int>(v);
}

Mat4 parse_matrix(const json& frame, const std::string& where) {
    const auto it = frame.find("transform_matrix");
    if (it == frame.end()) {
        throw Error(ErrorCode::ParseError, where + ": missing field 'transform_matrix'");
    }
    const json& rows = *it;
    if (!rows.is_array() || rows.size() != 4) {
        throw Error(ErrorCode::ParseError, where + ": 'transform_matrix' must be 4x4");
    }
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
        const json& row = rows[static_cast<std::size_t>(r)];
        if (!row.is_array() || row.size() != 4) {
            throw Error(ErrorCode::ParseError, where + ": 'transform_matrix' row " + std::to_string(r) + " must have 4 entries");
        }
        for (int c = 0; c < 4; ++c) {
            const json& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) {
                throw Error(ErrorCode::ParseError, where + ": 'transform_matrix' entry is not a number");
            }
            m(r, c) = v.get<double>();
        }
    }
    if (!m.allFinite() || (m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-6) {
        throw Error(ErrorCode::ParseError, where + ": 'transform_matrix' is not a finite rigid transform");
    }
    return m;
}

Pose checked_pose(const Mat4& m, const std::string& where, std::vector<std::string>* warnings) {
    Pose pose = Pose::from_matrix(m);
    const double drift = orthonormality_drift(pose.rotation);
    const double det = pose.rotation.determinant();
    if (det <= 0.0) {
        throw Error(ErrorCode::NonOrthonormalRotation, where + ": rotation has determinant " + std::to_string(det));
    }
    if (drift > kRepairDrift) {
        throw Error(ErrorCode::NonOrthonormalRotation, where + ": rotation drift " + std::to_string(drift) +
                                                           " exceeds " + std::to_string(kRepairDrift));
    }
    if (drift > kAcceptDrift) {
        pose.rotation = nearest_rotation(pose.rotation);
        const std::string msg = where + ": re-orthonormalized rotation (drift " + std::to_string(drift) + ")";
        spdlog::warn("{}", msg);
        if (warnings) {
            warnings->push_back(msg);
        }
    }
    return pose;
}

json matrix_json(const Mat4& m) {
    json rows = json::array();
    for (int r = 0; r < 4; ++r) {
        rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2), m(r, 3)}));
    }
    return rows;
}

void require_frame_size(const CameraIntrinsics& k, const RgbImage& image, const std::string& what) {
    if (!image.same_size(k.width, k.height) || image.channels() != 3) {
        throw Error(ErrorCode::DimensionMismatch, what + ": image is " + std::to_string(image.width()) + "x" +
                                                      std::to_string(image.height()) + ", dataset is " +
                                                      std::to_string(k.width) + "x" + std::to_string(k.height));
    }
}

}  // namespace

NerfDataset load_dataset(const fs::path& path, std::vector<std::string>* warnings) {
    const fs::path file = fs::is_directory(path) ? path / kTransformsFile : path;
    const fs::path root = file.parent_path();

    json doc;
    {
        std::ifstream in(file);
        if (!in) {
            throw Error(ErrorCode::IoError, "cannot open " + file.string());
        }
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::ParseError, file.string() + ": " + e.what());
        }
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::ParseError, file.string() + ": top level must be an object");
    }

    NerfDataset ds;
    ds.root_dir = root;
    const std::string top = file.filename().string();
    ds.intrinsics = {require_number(doc, "fl_x", top), require_number(doc, "fl_y", top),
                     require_number(doc, "cx", top),   require_number(doc, "cy", top),
                     require_int(doc, "w", top),       require_int(doc, "h", top)};
    try {
        ds.intrinsics.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, top + ": " + e.detail());
    }

    const auto frames_it = doc.find("frames");
    if (frames_it == doc.end() || !frames_it->is_array()) {
        throw Error(ErrorCode::ParseError, top + ": missing field 'frames'");
    }

    std::unordered_set<std::string> seen;
    std::vector<std::string> missing;
    for (std::size_t i = 0; i < frames_it->size(); ++i) {
        const json& fj = (*frames_it)[i];
        const std::string where = "frames[" + std::to_string(i) + "]";
        if (!fj.is_object()) {
            throw Error(ErrorCode::ParseError, where + ": not an object");
        }
        for (const char* key : {"fl_x", "fl_y", "cx", "cy", "w", "h"}) {
            if (fj.contains(key)) {
                throw Error(ErrorCode::ParseError,
                            where + ": per-frame intrinsics ('" + std::string(key) + "') are not supported");
            }
        }
        const auto fp = fj.find("file_path");
        if (fp == fj.end() || !fp->is_string() || fp->get<std::string>().empty()) {
            throw Error(ErrorCode::ParseError, where + ": missing field 'file_path'");
        }
        FrameRecord frame;
        frame.file_path = fp->get<std::string>();
        if (!seen.insert(frame.file_path).second) {
            throw Error(ErrorCode::ParseError, where + ": duplicate file_path '" + frame.file_path + "'");
        }
        frame.transform = checked_pose(parse_matrix(fj, where), where, warnings);
        if (!fs::is_regular_file(root / frame.file_path)) {
            missing.push_back(frame.file_path);
        }
        ds.frames.push_back(std::move(frame));
    }

    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
            list += (i ? ", " : "") + missing[i];
        }
        if (missing.size() > 20) {
            list += ", ... (" + std::to_string(missing.size()) + " total)";
        }
        throw Error(ErrorCode::MissingImage, std::to_string(missing.size()) + " image(s) missing: " + list);
    }

    for (auto& frame : ds.frames) {
        const Bytes bytes = read_file(root / frame.file_path);
        Rgb8Image image;
        try {
            image = decode_png_rgb(bytes);
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, frame.file_path + ": " + e.detail());
        }
        if (!image.same_size(ds.intrinsics.width, ds.intrinsics.height)) {
            throw Error(ErrorCode::DimensionMismatch,
                        frame.file_path + ": image is " + std::to_string(image.width()) + "x" +
                            std::to_string(image.height()) + ", intrinsics say " + std::to_string(ds.intrinsics.width) +
                            "x" + std::to_string(ds.intrinsics.height));
        }
        frame.image = std::make_shared<const Rgb8Image>(std::move(image));
    }
    return ds;
}

void save_dataset(const NerfDataset& ds, const fs::path& dir) {
    const auto& k = ds.intrinsics;
    json doc;
    doc["camera_angle_x"] = 2.0 * std::atan(k.width / (2.0 * k.fx));
    doc["fl_x"] = k.fx;
    doc["fl_y"] = k.fy;
    doc["cx"] = k.cx;
    doc["cy"] = k.cy;
    doc["w"] = k.width;
    doc["h"] = k.height;
    json frames = json::array();
    for (const auto& frame : ds.frames) {
        frames.push_back({{"file_path", frame.file_path}, {"transform_matrix", matrix_json(frame.transform.matrix())}});
    }
    doc["frames"] = std::move(frames);

    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw Error(ErrorCode::IoError, "cannot create dataset directory " + dir.string() +
                                            (ec ? ": " + ec.message() : std::string()));
    }
    for (const auto& frame : ds.frames) {
        write_file(dir / frame.file_path, encode_png(*frame.image));
    }
    write_file(dir / kTransformsFile, doc.dump(2));
}

std::string new_frame_path(int object_index, int view_index) {
    return "images/obj" + std::to_string(object_index) + "_view" + std::to_string(view_index) + ".png";
}

NerfDataset add_frames(const NerfDataset& ds, std::span<const NewFrame> frames, int object_index) {
    for (const auto& nf : frames) {
        require_frame_size(ds.intrinsics, nf.image, "add_frames");
        if (!(nf.view.intrinsics == ds.intrinsics)) {
            throw Error(ErrorCode::InvalidRequest, "add_frames: new view intrinsics differ from the dataset's");
        }
        if (!is_rotation(nf.view.pose.rotation, 1e-6)) {
            throw Error(ErrorCode::NonOrthonormalRotation, "add_frames: new view pose is not rigid");
        }
    }
    NerfDataset out = ds;
    std::unordered_set<std::string> names;
    for (const auto& f : ds.frames) {
        names.insert(f.file_path);
    }
    for (std::size_t k = 0; k < frames.size(); ++k) {
        FrameRecord rec;
        rec.file_path = new_frame_path(object_index, static_cast<int>(k));
        if (!names.insert(rec.file_path).second) {
            throw Error(ErrorCode::Internal, "generated frame path collides with '" + rec.file_path + "'");
        }
        rec.transform = frames[k].view.pose;
        rec.image = std::make_shared<const Rgb8Image>(quantize(frames[k].image));
        out.frames.push_back(std::move(rec));
    }
    return out;
}

NerfDataset replace_frame_image(const NerfDataset& ds, std::size_t frame_index, const RgbImage& image) {
    if (frame_index >= ds.frames.size()) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "frame " + std::to_string(frame_index) + " of " + std::to_string(ds.frames.size()));
    }
    require_frame_size(ds.intrinsics, image, "replace_frame_image");
    NerfDataset out = ds;
    out.frames[frame_index].image = std::make_shared<const Rgb8Image>(quantize(image));
    return out;
}

std::string frame_hash(const FrameRecord& frame) {
    return sha256_hex(frame.image->data());
}

}  // namespace primscene
