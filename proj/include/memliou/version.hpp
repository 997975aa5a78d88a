#pragma once

namespace memliou {

inline constexpr const char* kArtifactVersion = "0.1.0";

}  // namespace memliou
