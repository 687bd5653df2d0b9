#include "primscene/error.hpp"

namespace primscene {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::DegenerateDirection: return "degenerate-direction";
        case ErrorCode::InvalidClipRange: return "invalid-clip-range";
        case ErrorCode::DimensionMismatch: return "dimension-mismatch";
        case ErrorCode::ParseError: return "parse-error";
        case ErrorCode::MissingImage: return "missing-image";
        case ErrorCode::NonOrthonormalRotation: return "non-orthonormal-rotation";
        case ErrorCode::IoError: return "io-error";
        case ErrorCode::IndexOutOfRange: return "index-out-of-range";
        case ErrorCode::TileCountMismatch: return "tile-count-mismatch";
        case ErrorCode::TileDimensionMismatch: return "tile-dimension-mismatch";
        case ErrorCode::InvalidRequest: return "invalid-request";
        case ErrorCode::BackendUnreachable: return "backend-unreachable";
        case ErrorCode::DimensionViolation: return "dimension-violation";
        case ErrorCode::InvalidMesh: return "invalid-mesh";
        case ErrorCode::InvalidResponse: return "invalid-response";
        case ErrorCode::EmptyDataset: return "empty-dataset";
        case ErrorCode::DegeneratePrimitive: return "degenerate-primitive";
        case ErrorCode::InvalidConfig: return "invalid-config";
        case ErrorCode::NotFound: return "not-found";
        case ErrorCode::Conflict: return "conflict";
        case ErrorCode::Internal: return "internal";
    }
    return "internal";
}

}  // namespace primscene
