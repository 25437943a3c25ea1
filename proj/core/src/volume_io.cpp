#include "isip4d/volume_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace isip4d {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kPayloadName = "frames.bin";

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xFFu) << 24) | ((v & 0xFF00u) << 8) | ((v >> 8) & 0xFF00u) | (v >> 24);
  }
  return v;
}

json read_meta(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  std::ifstream in(meta_path);
  if (!in) throw FormatError("cannot open " + meta_path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(meta_path.string() + ": " + e.what());
  }
}

template <typename T>
T require(const json& meta, const char* key) {
  if (!meta.contains(key)) throw FormatError(std::string("meta.json: missing field '") + key + "'");
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string("meta.json: field '") + key + "' has the wrong type");
  }
}

}  // namespace

void write_sequence(const VolumeSequence& seq, const fs::path& dir, const std::string& field) {
  fs::create_directories(dir);
  const GridSpec& spec = seq.spec();

  json meta;
  meta["version"] = kVolumeFormatVersion;
  meta["field"] = field;
  meta["dims"] = spec.dims;
  meta["voxel_size"] = spec.voxel_size;
  meta["origin"] = spec.origin;
  meta["truncation_tau"] = spec.truncation_tau;
  meta["frame_count"] = seq.frame_count();
  meta["frame_dt"] = seq.frame_dt();
  meta["payload"] = kPayloadName;
  {
    std::ofstream out(dir / "meta.json");
    if (!out) throw std::runtime_error("cannot write " + (dir / "meta.json").string());
    out << meta.dump(2) << '\n';
  }

  std::ofstream out(dir / kPayloadName, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + (dir / kPayloadName).string());
  std::vector<std::uint32_t> words(spec.voxel_count());
  for (const TsdfVolume& frame : seq.frames()) {
    const auto values = frame.data();
    for (std::size_t n = 0; n < values.size(); ++n) {
      words[n] = to_little_endian(std::bit_cast<std::uint32_t>(values[n]));
    }
    out.write(reinterpret_cast<const char*>(words.data()),
              static_cast<std::streamsize>(words.size() * sizeof(std::uint32_t)));
  }
  if (!out) throw std::runtime_error("write failed: " + (dir / kPayloadName).string());
}

std::string read_sequence_field(const fs::path& dir) {
  const json meta = read_meta(dir);
  return meta.value("field", std::string("tsdf"));
}

VolumeSequence read_sequence(const fs::path& dir) {
  const json meta = read_meta(dir);

  const auto version = require<std::string>(meta, "version");
  if (version != kVolumeFormatVersion) {
    throw FormatError("meta.json: unsupported version '" + version + "'");
  }
  GridSpec spec;
  spec.dims = require<std::array<int, 3>>(meta, "dims");
  spec.voxel_size = require<double>(meta, "voxel_size");
  spec.origin = require<std::array<double, 3>>(meta, "origin");
  spec.truncation_tau = require<double>(meta, "truncation_tau");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("meta.json: ") + e.what());
  }
  const int frame_count = require<int>(meta, "frame_count");
  if (frame_count < 1) throw FormatError("meta.json: field 'frame_count' must be >= 1");
  const double frame_dt = meta.value("frame_dt", 1.0 / 30.0);
  const auto payload = meta.value("payload", std::string(kPayloadName));

  const fs::path payload_path = dir / payload;
  std::ifstream in(payload_path, std::ios::binary);
  if (!in) throw FormatError("cannot open payload " + payload_path.string());
  const auto bytes = fs::file_size(payload_path);
  const std::size_t per_frame = spec.voxel_count();
  const std::uintmax_t expected = static_cast<std::uintmax_t>(per_frame) * frame_count * sizeof(float);
  if (bytes != expected) {
    std::ostringstream msg;
    msg << "payload size mismatch: dims " << spec.dims[0] << "x" << spec.dims[1] << "x" << spec.dims[2]
        << " x " << frame_count << " frames needs " << expected / sizeof(float) << " floats, file holds "
        << bytes / sizeof(float) << (bytes % sizeof(float) ? " (plus trailing bytes)" : "");
    throw FormatError(msg.str());
  }

  std::vector<TsdfVolume> frames;
  frames.reserve(static_cast<std::size_t>(frame_count));
  std::vector<std::uint32_t> words(per_frame);
  for (int t = 0; t < frame_count; ++t) {
    in.read(reinterpret_cast<char*>(words.data()), static_cast<std::streamsize>(per_frame * sizeof(std::uint32_t)));
    if (!in) throw FormatError("payload truncated in frame " + std::to_string(t));
    std::vector<float> values(per_frame);
    for (std::size_t n = 0; n < per_frame; ++n) {
      const float v = std::bit_cast<float>(to_little_endian(words[n]));
      if (!(v >= -1.0f && v <= 1.0f)) {
        const Index3 idx = spec.grid_index(n);
        std::ostringstream msg;
        msg << "frame " << t << ": value " << v << " at voxel (" << idx.i << "," << idx.j << "," << idx.k
            << ") outside range [-1, 1]";
        throw FormatError(msg.str());
      }
      values[n] = v;
    }
    frames.emplace_back(spec, std::move(values));
  }
  return VolumeSequence(spec, std::move(frames), frame_dt);
}

}  // namespace isip4d
