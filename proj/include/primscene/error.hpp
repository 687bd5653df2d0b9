#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace primscene {

enum class ErrorCode {
    DegenerateDirection,
    InvalidClipRange,
    DimensionMismatch,
    ParseError,
    MissingImage,
    NonOrthonormalRotation,
    IoError,
    IndexOutOfRange,
    TileCountMismatch,
    TileDimensionMismatch,
    InvalidRequest,
    BackendUnreachable,
    DimensionViolation,
    InvalidMesh,
    InvalidResponse,
    EmptyDataset,
    DegeneratePrimitive,
    InvalidConfig,
    NotFound,
    Conflict,
    Internal,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries a code so callers (CLI exit
// codes, HTTP status mapping, fault-injection tests) can branch on it.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace primscene
