#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace primscene {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitPipeline = 2;

/// args excludes the program name. Exit 0 on success, 1 on usage or
/// validation errors, 2 when the pipeline fails after it started.
int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace primscene
