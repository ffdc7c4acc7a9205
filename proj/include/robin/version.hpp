#pragma once

namespace robin {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kCheckpointSchemaVersion = 1;

}  // namespace robin
