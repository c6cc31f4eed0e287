#pragma once

namespace cylflow {

inline constexpr const char* version_string = "cylflow 0.1.0";

}  // namespace cylflow
