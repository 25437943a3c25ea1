#pragma once

#include <filesystem>
#include <string>

#include "isip4d/volume.hpp"

namespace isip4d {

inline constexpr const char* kVolumeFormatVersion = "isip4d-vol/1";

/// Writes `dir/meta.json` and the raw little-endian float32 payload
/// `dir/frames.bin` (frame-major, then z, y, x with x fastest). The
/// directory is created if needed. `field` names the stored quantity.
void write_sequence(const VolumeSequence& seq, const std::filesystem::path& dir,
                    const std::string& field = "tsdf");

/// Reads a sequence written by write_sequence. Throws FormatError naming
/// the offending field or frame on malformed metadata, payload size
/// mismatch, or values outside [-1, 1].
VolumeSequence read_sequence(const std::filesystem::path& dir);

/// Field name stored in a sequence's metadata ("tsdf" when absent).
std::string read_sequence_field(const std::filesystem::path& dir);

}  // namespace isip4d
