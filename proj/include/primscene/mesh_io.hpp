#pragma once

#include "primscene/encoding.hpp"
#include "primscene/geometry.hpp"

#include <span>
#include <string>
#include <string_view>

namespace primscene {

/// Wavefront OBJ with per-vertex colors ("v x y z r g b") and one normal per
/// vertex ("f a//a b//b c//c").
std::string write_obj(const TriMesh& mesh);

/// Accepts v (with or without colors), vn, and f records in any of the
/// a, a/b, a//c, a/b/c forms; polygons are fan-triangulated. Missing normals
/// are rebuilt from area-weighted face normals, missing colors default to
/// mid-gray. Throws ParseError on malformed records.
TriMesh parse_obj(std::string_view text);

/// Binary glTF: the first primitive of the first mesh (POSITION, optional
/// NORMAL and COLOR_0, optional indices). Node transforms are ignored.
TriMesh parse_glb(std::span<const std::uint8_t> bytes);

/// Dispatches on the GLB magic, otherwise parses OBJ.
TriMesh parse_mesh_payload(std::span<const std::uint8_t> bytes);

}  // namespace primscene
