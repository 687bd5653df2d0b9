#include "primscene/mesh_io.hpp"

#include "primscene/error.hpp"

#include "json.hpp"

#include <cmath>
#include <charconv>
#include <cstring>
#include <sstream>

using nlohmann::json;

namespace primscene {
namespace {

void fill_missing_normals(TriMesh& mesh) {
    std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
    for (const auto& t : mesh.triangles) {
        const Vec3 n = (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]);
        for (auto i : t) {
            acc[i] += n;
        }
    }
    mesh.normals.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const double len = acc[i].norm();
        mesh.normals[i] = len > 0.0 ? Vec3(acc[i] / len) : Vec3::UnitY();
    }
}

double parse_double(std::string_view token, std::size_t line) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
        throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line) + ": bad number '" + std::string(token) + "'");
    }
    return v;
}

long parse_index(std::string_view token, std::size_t count, std::size_t line) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || ptr != token.data() + token.size() || v == 0) {
        throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line) + ": bad index '" + std::string(token) + "'");
    }
    const long resolved = v > 0 ? v - 1 : static_cast<long>(count) + v;
    if (resolved < 0 || resolved >= static_cast<long>(count)) {
        throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line) + ": index " + std::string(token) +
                                               " out of range");
    }
    return resolved;
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
        if (i > start) out.push_back(s.substr(start, i - start));
    }
    return out;
}

}  // namespace

std::string write_obj(const TriMesh& mesh) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
        const Vec3& v = mesh.vertices[i];
        const Vec3& c = mesh.vertex_colors[i];
        out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << ' ' << c.x() << ' ' << c.y() << ' ' << c.z() << '\n';
    }
    for (const auto& n : mesh.normals) {
        out << "vn " << n.x() << ' ' << n.y() << ' ' << n.z() << '\n';
    }
    for (const auto& t : mesh.triangles) {
        out << 'f';
        for (auto i : t) {
            out << ' ' << i + 1 << "//" << i + 1;
        }
        out << '\n';
    }
    return out.str();
}

TriMesh parse_obj(std::string_view text) {
    TriMesh mesh;
    std::vector<Vec3> file_normals;
    std::vector<long> normal_of_vertex;
    bool normals_consistent = true;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        const auto tok = split_ws(line);
        if (tok.empty() || tok[0][0] == '#') {
            if (end == text.size()) break;
            continue;
        }
        if (tok[0] == "v") {
            if (tok.size() != 4 && tok.size() != 7) {
                throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line_no) + ": vertex needs 3 or 6 values");
            }
            mesh.vertices.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                       parse_double(tok[3], line_no));
            mesh.vertex_colors.push_back(tok.size() == 7 ? Vec3(parse_double(tok[4], line_no),
                                                                parse_double(tok[5], line_no),
                                                                parse_double(tok[6], line_no))
                                                         : Vec3::Constant(0.5));
            normal_of_vertex.push_back(-1);
        } else if (tok[0] == "vn") {
            if (tok.size() != 4) {
                throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line_no) + ": normal needs 3 values");
            }
            file_normals.emplace_back(parse_double(tok[1], line_no), parse_double(tok[2], line_no),
                                      parse_double(tok[3], line_no));
        } else if (tok[0] == "f") {
            if (tok.size() < 4) {
                throw Error(ErrorCode::ParseError, "OBJ line " + std::to_string(line_no) + ": face needs 3 vertices");
            }
            std::vector<std::uint32_t> poly;
            for (std::size_t k = 1; k < tok.size(); ++k) {
                const std::string_view ref = tok[k];
                const auto slash = ref.find('/');
                const long vi = parse_index(ref.substr(0, slash), mesh.vertices.size(), line_no);
                if (slash != std::string_view::npos) {
                    const auto slash2 = ref.find('/', slash + 1);
                    if (slash2 != std::string_view::npos && slash2 + 1 < ref.size()) {
                        const long ni = parse_index(ref.substr(slash2 + 1), file_normals.size(), line_no);
                        auto& slot = normal_of_vertex[static_cast<std::size_t>(vi)];
                        if (slot >= 0 && slot != ni) normals_consistent = false;
                        slot = ni;
                    }
                }
                poly.push_back(static_cast<std::uint32_t>(vi));
            }
            for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
                mesh.triangles.push_back({poly[0], poly[k], poly[k + 1]});
            }
        }
        // Other record types (o, g, s, usemtl, vt, ...) carry nothing we use.
        if (end == text.size()) break;
    }

    bool have_all = normals_consistent && !file_normals.empty();
    for (long ni : normal_of_vertex) {
        have_all = have_all && ni >= 0;
    }
    if (have_all) {
        mesh.normals.reserve(mesh.vertices.size());
        for (long ni : normal_of_vertex) {
            const Vec3& n = file_normals[static_cast<std::size_t>(ni)];
            const double len = n.norm();
            mesh.normals.push_back(len > 0.0 && std::abs(len - 1.0) > 1e-12 ? Vec3(n / len) : n);
        }
    } else {
        fill_missing_normals(mesh);
    }
    return mesh;
}

namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint32_t v = 0;
    std::memcpy(&v, b.data() + off, 4);  // glTF is little-endian, as is every supported host
    return v;
}

struct AccessorView {
    std::span<const std::uint8_t> data;
    std::size_t count = 0;
    std::size_t components = 0;
    int component_type = 0;
    std::size_t stride = 0;
    bool normalized = false;

    double get(std::size_t i, std::size_t c) const {
        const std::uint8_t* p = data.data() + i * stride;
        switch (component_type) {
            case 5126: {
                float f;
                std::memcpy(&f, p + c * 4, 4);
                return f;
            }
            case 5121: return normalized ? p[c] / 255.0 : p[c];
            case 5123: {
                std::uint16_t u;
                std::memcpy(&u, p + c * 2, 2);
                return normalized ? u / 65535.0 : u;
            }
            case 5125: {
                std::uint32_t u;
                std::memcpy(&u, p + c * 4, 4);
                return u;
            }
            default: throw Error(ErrorCode::ParseError, "GLB: unsupported component type");
        }
    }
};

std::size_t component_size(int type) {
    switch (type) {
        case 5120:
        case 5121: return 1;
        case 5122:
        case 5123: return 2;
        case 5125:
        case 5126: return 4;
        default: throw Error(ErrorCode::ParseError, "GLB: unknown component type " + std::to_string(type));
    }
}

std::size_t component_count(const std::string& type) {
    if (type == "SCALAR") return 1;
    if (type == "VEC2") return 2;
    if (type == "VEC3") return 3;
    if (type == "VEC4") return 4;
    throw Error(ErrorCode::ParseError, "GLB: unsupported accessor type " + type);
}

AccessorView accessor(const json& doc, std::span<const std::uint8_t> bin, std::size_t index) {
    const json& acc = doc.at("accessors").at(index);
    const json& bv = doc.at("bufferViews").at(acc.at("bufferView").get<std::size_t>());
    AccessorView view;
    view.count = acc.at("count").get<std::size_t>();
    view.component_type = acc.at("componentType").get<int>();
    view.components = component_count(acc.at("type").get<std::string>());
    view.normalized = acc.value("normalized", false);
    const std::size_t elem = component_size(view.component_type) * view.components;
    view.stride = bv.value("byteStride", elem);
    const std::size_t offset = bv.value("byteOffset", std::size_t{0}) + acc.value("byteOffset", std::size_t{0});
    const std::size_t needed = view.count == 0 ? 0 : (view.count - 1) * view.stride + elem;
    if (offset + needed > bin.size() || view.stride < elem) {
        throw Error(ErrorCode::ParseError, "GLB: accessor " + std::to_string(index) + " exceeds the binary chunk");
    }
    view.data = bin.subspan(offset, needed);
    return view;
}

}  // namespace

TriMesh parse_glb(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 20 || std::memcmp(bytes.data(), "glTF", 4) != 0) {
        throw Error(ErrorCode::ParseError, "GLB: bad header");
    }
    if (read_u32(bytes, 4) != 2 || read_u32(bytes, 8) > bytes.size()) {
        throw Error(ErrorCode::ParseError, "GLB: unsupported version or truncated file");
    }
    json doc;
    std::span<const std::uint8_t> bin;
    std::size_t off = 12;
    while (off + 8 <= bytes.size()) {
        const std::uint32_t len = read_u32(bytes, off);
        const std::uint32_t type = read_u32(bytes, off + 4);
        if (off + 8 + len > bytes.size()) {
            throw Error(ErrorCode::ParseError, "GLB: truncated chunk");
        }
        const auto chunk = bytes.subspan(off + 8, len);
        if (type == 0x4E4F534Au) {  // JSON
            try {
                doc = json::parse(chunk.begin(), chunk.end());
            } catch (const json::exception& e) {
                throw Error(ErrorCode::ParseError, std::string("GLB: ") + e.what());
            }
        } else if (type == 0x004E4942u) {  // BIN
            bin = chunk;
        }
        off += 8 + len;
    }
    TriMesh mesh;
    try {
        const json& prim = doc.at("meshes").at(0).at("primitives").at(0);
        if (prim.value("mode", 4) != 4) {
            throw Error(ErrorCode::ParseError, "GLB: only triangle primitives are supported");
        }
        const json& attrs = prim.at("attributes");
        const auto pos = accessor(doc, bin, attrs.at("POSITION").get<std::size_t>());
        for (std::size_t i = 0; i < pos.count; ++i) {
            mesh.vertices.emplace_back(pos.get(i, 0), pos.get(i, 1), pos.get(i, 2));
        }
        mesh.vertex_colors.assign(pos.count, Vec3::Constant(0.5));
        if (attrs.contains("COLOR_0")) {
            const auto col = accessor(doc, bin, attrs.at("COLOR_0").get<std::size_t>());
            for (std::size_t i = 0; i < std::min(col.count, pos.count); ++i) {
                mesh.vertex_colors[i] = Vec3(col.get(i, 0), col.get(i, 1), col.get(i, 2));
            }
        }
        if (prim.contains("indices")) {
            const auto idx = accessor(doc, bin, prim.at("indices").get<std::size_t>());
            for (std::size_t i = 0; i + 2 < idx.count; i += 3) {
                mesh.triangles.push_back({static_cast<std::uint32_t>(idx.get(i, 0)),
                                          static_cast<std::uint32_t>(idx.get(i + 1, 0)),
                                          static_cast<std::uint32_t>(idx.get(i + 2, 0))});
            }
        } else {
            for (std::uint32_t i = 0; i + 2 < pos.count; i += 3) {
                mesh.triangles.push_back({i, i + 1, i + 2});
            }
        }
        if (attrs.contains("NORMAL")) {
            const auto nrm = accessor(doc, bin, attrs.at("NORMAL").get<std::size_t>());
            for (std::size_t i = 0; i < std::min(nrm.count, pos.count); ++i) {
                mesh.normals.emplace_back(Vec3(nrm.get(i, 0), nrm.get(i, 1), nrm.get(i, 2)).normalized());
            }
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("GLB: ") + e.what());
    }
    if (mesh.normals.size() != mesh.vertices.size()) {
        mesh.normals.clear();
        for (const auto& t : mesh.triangles) {
            for (auto i : t) {
                if (i >= mesh.vertices.size()) {
                    throw Error(ErrorCode::ParseError, "GLB: index out of range");
                }
            }
        }
        fill_missing_normals(mesh);
    }
    return mesh;
}

TriMesh parse_mesh_payload(std::span<const std::uint8_t> bytes) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), "glTF", 4) == 0) {
        return parse_glb(bytes);
    }
    return parse_obj(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

}  // namespace primscene
