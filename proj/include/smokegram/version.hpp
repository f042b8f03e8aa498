#pragma once

namespace smokegram {

inline constexpr const char* kToolVersion = "0.1.0";

// Bumped when the on-disk layout of the corresponding artifact changes.
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kKvFormatVersion = 1;
inline constexpr int kManifestFormatVersion = 1;

// Tag written into model headers and dataset sidecars. Windows flatten 20
// samples as interleaved [x1,y1,z1, ..., x20,y20,z20]; a model trained on one
// ordering must not be fed the other.
inline constexpr const char* kFeatureOrder = "interleaved_xyz_v1";

} // namespace smokegram
