#pragma once

#include "strandkit/codec.hpp"
#include "strandkit/density.hpp"
#include "strandkit/groom.hpp"
#include "strandkit/strand.hpp"
#include "strandkit/texture.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace strandkit {

// ---------------------------------------------------------------------------
// Hair files
//
// Little-endian layout:
//   char[4]  "DLHR"
//   u32      version (1)
//   u32      strand count S (> 0)
//   u64      total point count P
//   u32      attribute count A
//   A x { u16 name length, name bytes }
//   u32[S]   points per strand (sum == P)
//   f32[3P]  xyz positions, meters
//   f32[S]   per-strand values, one block per attribute
//
// read_hair also accepts the Yuksel .hair format ("HAIR" magic).
// ---------------------------------------------------------------------------

constexpr std::uint32_t kHairVersion = 1;

struct HairAttribute {
  std::string name;
  std::vector<float> values;  // one per strand
};

struct HairFile {
  std::vector<std::uint32_t> point_counts;
  std::vector<float> points;  // 3 per point
  std::vector<HairAttribute> attributes;

  std::size_t strand_count() const { return point_counts.size(); }
  std::uint64_t total_points() const { return points.size() / 3; }
};

HairFile to_hair_file(const Hairstyle& hair);

// Strands whose point count differs from `points` are resampled by arc length.
// `resampled`, if given, receives how many were.
Hairstyle to_hairstyle(const HairFile& file, int points = kStrandPoints, std::size_t* resampled = nullptr);

std::vector<std::uint8_t> encode_hair(const HairFile& file);
HairFile decode_hair(const std::vector<std::uint8_t>& bytes);
std::uint64_t hair_file_size(const HairFile& file);

void write_hair(const std::string& path, const HairFile& file);
HairFile read_hair(const std::string& path);

// Streams strands to disk without holding the hairstyle in memory. The
// strand and point counts must be declared up front.
class HairWriter {
 public:
  HairWriter(const std::string& path, std::uint32_t strands, std::uint32_t points_per_strand);
  void append(const Hairstyle& batch);
  void close();
  ~HairWriter();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// ---------------------------------------------------------------------------
// Chunked container: "DLCK", u32 version, then chunks of
// { char[4] tag, u64 payload length, payload } until end of file.
// ---------------------------------------------------------------------------

constexpr std::uint32_t kContainerVersion = 1;

struct Chunk {
  std::array<char, 4> tag{};
  std::vector<std::uint8_t> payload;

  std::string tag_string() const { return std::string(tag.begin(), tag.end()); }
};

std::vector<std::uint8_t> encode_container(const std::vector<Chunk>& chunks);
std::vector<Chunk> decode_container(const std::vector<std::uint8_t>& bytes);

// Texture payload: u32 dtype (1 = f32), u32 width, u32 height, u32 channels,
// u8 validity[w*h], f32 data[w*h*channels] texel-major.
Chunk texture_chunk(const ScalpTexture& texture);
ScalpTexture texture_from_chunk(const Chunk& chunk);
// Density payload: same header with channels = 1, then f32 values.
Chunk density_chunk(const DensityMap& density);
DensityMap density_from_chunk(const Chunk& chunk);
// Codec payload: u32 dtype (2 = f64), u32 points, u32 latent dim, then f64
// mean, basis (column-major), scales, variance.
Chunk codec_chunk(const CodecModel& model);
CodecModel codec_from_chunk(const Chunk& chunk);
// Groom parameters as the key-value text format.
Chunk params_chunk(const GroomParams& params);
GroomParams params_from_chunk(const Chunk& chunk);

struct Bundle {
  std::optional<ScalpTexture> texture;
  std::optional<DensityMap> density;
  std::optional<CodecModel> codec;
  std::optional<GroomParams> params;
};

void write_bundle(const std::string& path, const Bundle& bundle);
// Unknown chunk tags are ignored.
Bundle read_bundle(const std::string& path);

// ---------------------------------------------------------------------------
// Dataset manifest: CSV with header seed,params,hair,texture,density. Paths
// are relative to the manifest's directory; "-" marks an absent file.
// ---------------------------------------------------------------------------

struct ManifestRecord {
  std::uint64_t seed = 0;
  std::string params;
  std::string hair;
  std::string texture;
  std::string density;
};

void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records);
std::vector<ManifestRecord> read_manifest(const std::string& path);

// ASCII PLY polylines: vertex positions plus an edge list.
void write_ply(const std::string& path, const Hairstyle& hair);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace strandkit
