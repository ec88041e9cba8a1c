#include "strandkit/io.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace strandkit {

namespace {

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <typename T>
  void le(T v) {
    using U = std::make_unsigned_t<T>;
    auto u = static_cast<U>(v);
    for (std::size_t i = 0; i < sizeof(T); ++i) out_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  ByteReader(const std::uint8_t* data, std::size_t size, std::string what)
      : data_(data), size_(size), what_(std::move(what)) {}

  std::size_t remaining() const { return size_ - pos_; }
  std::size_t position() const { return pos_; }

  void need(std::uint64_t n) const {
    require(n <= remaining(), ErrorCode::truncated,
            what_ + ": truncated at byte " + std::to_string(pos_) + " (need " + std::to_string(n) +
                ", have " + std::to_string(remaining()) + ")");
  }
  const std::uint8_t* take(std::size_t n) {
    need(n);
    const std::uint8_t* p = data_ + pos_;
    pos_ += n;
    return p;
  }
  void skip(std::size_t n) { take(n); }
  template <typename T>
  T le() {
    const std::uint8_t* p = take(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<std::make_unsigned_t<T>>(p[i]) << (8 * i);
    return static_cast<T>(u);
  }
  std::uint8_t u8() { return *take(1); }
  std::uint16_t u16() { return le<std::uint16_t>(); }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

 private:
  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string what_;
};

constexpr char kHairMagic[4] = {'D', 'L', 'H', 'R'};
constexpr char kYukselMagic[4] = {'H', 'A', 'I', 'R'};
constexpr char kContainerMagic[4] = {'D', 'L', 'C', 'K'};

constexpr std::uint32_t kDtypeF32 = 1;
constexpr std::uint32_t kDtypeF64 = 2;

std::array<char, 4> make_tag(const char* s) { return {s[0], s[1], s[2], s[3]}; }

void check_hair(const HairFile& file) {
  require(!file.point_counts.empty(), ErrorCode::invalid_argument, "hair file: no strands");
  require(file.point_counts.size() <= std::numeric_limits<std::uint32_t>::max(), ErrorCode::count_overflow,
          "hair file: too many strands for a u32 count");
  require(file.points.size() % 3 == 0, ErrorCode::sizing, "hair file: point buffer is not xyz triples");
  std::uint64_t total = 0;
  for (auto c : file.point_counts) total += c;
  require(total == file.total_points(), ErrorCode::count_overflow,
          "hair file: point counts sum to " + std::to_string(total) + " but " +
              std::to_string(file.total_points()) + " points are stored");
  for (const auto& a : file.attributes) {
    require(a.name.size() <= std::numeric_limits<std::uint16_t>::max(), ErrorCode::invalid_argument,
            "hair file: attribute name too long");
    require(a.values.size() == file.point_counts.size(), ErrorCode::sizing,
            "hair file: attribute '" + a.name + "' needs one value per strand");
  }
}

void write_hair_header(ByteWriter& w, std::uint32_t strands, std::uint64_t points,
                       const std::vector<HairAttribute>& attributes) {
  w.bytes(kHairMagic, 4);
  w.u32(kHairVersion);
  w.u32(strands);
  w.u64(points);
  w.u32(static_cast<std::uint32_t>(attributes.size()));
  for (const auto& a : attributes) {
    w.u16(static_cast<std::uint16_t>(a.name.size()));
    w.bytes(a.name.data(), a.name.size());
  }
}

HairFile decode_yuksel(ByteReader& r) {
  // 128-byte header; the magic has already been consumed.
  const std::uint32_t hairs = r.u32();
  const std::uint32_t points = r.u32();
  const std::uint32_t flags = r.u32();
  const std::uint32_t default_segments = r.u32();
  r.skip(4 + 4 + 12 + 88);
  require(hairs > 0, ErrorCode::invalid_argument, "hair file: no strands");
  require(flags & 0x2u, ErrorCode::parse, "hair file: .hair file without a point array");

  HairFile file;
  file.point_counts.resize(hairs);
  std::uint64_t total = 0;
  if (flags & 0x1u) {
    r.need(2ull * hairs);
    for (auto& c : file.point_counts) {
      c = static_cast<std::uint32_t>(r.u16()) + 1;
      total += c;
    }
  } else {
    std::fill(file.point_counts.begin(), file.point_counts.end(), default_segments + 1);
    total = static_cast<std::uint64_t>(hairs) * (default_segments + 1ull);
  }
  require(total == points, ErrorCode::count_overflow,
          "hair file: segment counts imply " + std::to_string(total) + " points, header says " +
              std::to_string(points));
  r.need(12ull * points);
  file.points.resize(3ull * points);
  for (auto& v : file.points) v = r.f32();
  // Thickness, transparency and color arrays are not used.
  return file;
}

}  // namespace

HairFile to_hair_file(const Hairstyle& hair) {
  require(!hair.strands.empty(), ErrorCode::invalid_argument, "hair file: no strands");
  HairFile file;
  file.point_counts.reserve(hair.size());
  std::size_t total = 0;
  for (const auto& s : hair.strands) total += static_cast<std::size_t>(s.rows());
  file.points.reserve(3 * total);
  for (const auto& s : hair.strands) {
    file.point_counts.push_back(static_cast<std::uint32_t>(s.rows()));
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (int c = 0; c < 3; ++c) file.points.push_back(static_cast<float>(s(i, c)));
  }
  return file;
}

Hairstyle to_hairstyle(const HairFile& file, int points, std::size_t* resampled) {
  check_hair(file);
  require(points >= 2, ErrorCode::invalid_argument, "to_hairstyle: need at least 2 points per strand");
  Hairstyle hair;
  hair.strands.reserve(file.strand_count());
  std::size_t offset = 0, changed = 0;
  for (std::size_t k = 0; k < file.strand_count(); ++k) {
    const std::uint32_t n = file.point_counts[k];
    require(n >= 2, ErrorCode::degenerate, "to_hairstyle: strand " + std::to_string(k) + " has fewer than 2 points");
    Strand s(n, 3);
    for (std::uint32_t i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) s(i, c) = file.points[3 * (offset + i) + c];
    offset += n;
    if (static_cast<int>(n) != points) {
      s = resample(s, points);
      ++changed;
    }
    hair.strands.push_back(std::move(s));
  }
  if (resampled) *resampled = changed;
  return hair;
}

std::uint64_t hair_file_size(const HairFile& file) {
  std::uint64_t size = 4 + 4 + 4 + 8 + 4;
  for (const auto& a : file.attributes) size += 2 + a.name.size() + 4ull * file.strand_count();
  return size + 4ull * file.strand_count() + 12ull * file.total_points();
}

std::vector<std::uint8_t> encode_hair(const HairFile& file) {
  check_hair(file);
  std::vector<std::uint8_t> out;
  out.reserve(hair_file_size(file));
  ByteWriter w(out);
  write_hair_header(w, static_cast<std::uint32_t>(file.strand_count()), file.total_points(), file.attributes);
  for (auto c : file.point_counts) w.u32(c);
  for (float v : file.points) w.f32(v);
  for (const auto& a : file.attributes)
    for (float v : a.values) w.f32(v);
  return out;
}

HairFile decode_hair(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes.data(), bytes.size(), "hair file");
  const std::uint8_t* magic = r.take(4);
  if (std::memcmp(magic, kYukselMagic, 4) == 0) return decode_yuksel(r);
  require(std::memcmp(magic, kHairMagic, 4) == 0, ErrorCode::bad_magic, "hair file: unrecognized magic");
  const std::uint32_t version = r.u32();
  require(version >= 1 && version <= kHairVersion, ErrorCode::unsupported_version,
          "hair file: unsupported version " + std::to_string(version));
  const std::uint32_t strands = r.u32();
  const std::uint64_t total = r.u64();
  const std::uint32_t attribute_count = r.u32();
  require(strands > 0, ErrorCode::invalid_argument, "hair file: no strands");
  // Reject counts whose byte sizes cannot be represented before comparing
  // them with the file size.
  require(total <= std::numeric_limits<std::uint64_t>::max() / 12, ErrorCode::count_overflow,
          "hair file: point count " + std::to_string(total) + " overflows");

  HairFile file;
  file.attributes.resize(attribute_count <= r.remaining() / 2 ? attribute_count : 0);
  require(file.attributes.size() == attribute_count, ErrorCode::truncated,
          "hair file: truncated attribute table");
  for (auto& a : file.attributes) {
    const std::uint16_t len = r.u16();
    const std::uint8_t* name = r.take(len);
    a.name.assign(reinterpret_cast<const char*>(name), len);
  }

  r.need(4ull * strands);
  file.point_counts.resize(strands);
  std::uint64_t sum = 0;
  for (auto& c : file.point_counts) {
    c = r.u32();
    sum += c;
  }
  require(sum == total, ErrorCode::count_overflow,
          "hair file: point counts sum to " + std::to_string(sum) + " but header says " + std::to_string(total));
  r.need(12 * total + 4ull * strands * attribute_count);
  file.points.resize(3 * total);
  for (auto& v : file.points) v = r.f32();
  for (auto& a : file.attributes) {
    a.values.resize(strands);
    for (auto& v : a.values) v = r.f32();
  }
  require(r.remaining() == 0, ErrorCode::count_overflow,
          "hair file: " + std::to_string(r.remaining()) + " trailing bytes");
  return file;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open '" + path + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), ErrorCode::io, "error reading '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCode::io, "error writing '" + path + "'");
}

void write_hair(const std::string& path, const HairFile& file) { write_file(path, encode_hair(file)); }

HairFile read_hair(const std::string& path) { return decode_hair(read_file(path)); }

struct HairWriter::Impl {
  std::string path;
  std::ofstream out;
  std::uint32_t strands = 0;
  std::uint32_t points = 0;
  std::uint32_t written = 0;
  // Positions are buffered per batch, counts up front.
  std::streampos counts_at;
};

HairWriter::HairWriter(const std::string& path, std::uint32_t strands, std::uint32_t points_per_strand)
    : impl_(std::make_unique<Impl>()) {
  require(strands > 0 && points_per_strand >= 2, ErrorCode::invalid_argument,
          "HairWriter: need at least one strand of at least two points");
  impl_->path = path;
  impl_->strands = strands;
  impl_->points = points_per_strand;
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(impl_->out), ErrorCode::io, "cannot open '" + path + "' for writing");

  std::vector<std::uint8_t> head;
  ByteWriter w(head);
  write_hair_header(w, strands, static_cast<std::uint64_t>(strands) * points_per_strand, {});
  for (std::uint32_t k = 0; k < strands; ++k) w.u32(points_per_strand);
  impl_->out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
}

void HairWriter::append(const Hairstyle& batch) {
  require(impl_ && impl_->out.is_open(), ErrorCode::io, "HairWriter: already closed");
  require(impl_->written + batch.size() <= impl_->strands, ErrorCode::count_overflow,
          "HairWriter: more strands than declared");
  std::vector<std::uint8_t> buf;
  buf.reserve(batch.size() * impl_->points * 12);
  ByteWriter w(buf);
  for (const auto& s : batch.strands) {
    require(s.rows() == impl_->points, ErrorCode::sizing, "HairWriter: strand has the wrong point count");
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (int c = 0; c < 3; ++c) w.f32(static_cast<float>(s(i, c)));
  }
  impl_->out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  require(static_cast<bool>(impl_->out), ErrorCode::io, "error writing '" + impl_->path + "'");
  impl_->written += static_cast<std::uint32_t>(batch.size());
}

void HairWriter::close() {
  if (!impl_ || !impl_->out.is_open()) return;
  impl_->out.close();
  require(impl_->written == impl_->strands, ErrorCode::count_overflow,
          "HairWriter: wrote " + std::to_string(impl_->written) + " of " + std::to_string(impl_->strands) +
              " declared strands");
}

HairWriter::~HairWriter() {
  if (impl_ && impl_->out.is_open()) impl_->out.close();
}

// ---------------------------------------------------------------------------

std::vector<std::uint8_t> encode_container(const std::vector<Chunk>& chunks) {
  std::vector<std::uint8_t> out;
  ByteWriter w(out);
  w.bytes(kContainerMagic, 4);
  w.u32(kContainerVersion);
  for (const auto& c : chunks) {
    w.bytes(c.tag.data(), 4);
    w.u64(c.payload.size());
    w.bytes(c.payload.data(), c.payload.size());
  }
  return out;
}

std::vector<Chunk> decode_container(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes.data(), bytes.size(), "container");
  require(std::memcmp(r.take(4), kContainerMagic, 4) == 0, ErrorCode::bad_magic, "container: unrecognized magic");
  const std::uint32_t version = r.u32();
  require(version >= 1 && version <= kContainerVersion, ErrorCode::unsupported_version,
          "container: unsupported version " + std::to_string(version));
  std::vector<Chunk> chunks;
  while (r.remaining() > 0) {
    Chunk c;
    std::memcpy(c.tag.data(), r.take(4), 4);
    const std::uint64_t len = r.u64();
    r.need(len);
    const std::uint8_t* p = r.take(static_cast<std::size_t>(len));
    c.payload.assign(p, p + len);
    chunks.push_back(std::move(c));
  }
  return chunks;
}

namespace {

struct GridHeader {
  std::uint32_t dtype, width, height, channels;
};

GridHeader read_grid_header(ByteReader& r, std::uint32_t dtype, const std::string& what) {
  GridHeader h{r.u32(), r.u32(), r.u32(), r.u32()};
  require(h.dtype == dtype, ErrorCode::unsupported_version, what + ": unsupported dtype " + std::to_string(h.dtype));
  require(h.width > 0 && h.width == h.height && h.width <= 1u << 15, ErrorCode::sizing,
          what + ": expected a square grid of at most 32768 texels a side");
  require(h.channels > 0 && h.channels <= 1u << 16, ErrorCode::sizing, what + ": bad channel count");
  return h;
}

}  // namespace

Chunk texture_chunk(const ScalpTexture& texture) {
  Chunk c{make_tag("SCLP"), {}};
  ByteWriter w(c.payload);
  w.u32(kDtypeF32);
  w.u32(texture.resolution);
  w.u32(texture.resolution);
  w.u32(texture.channels);
  for (auto v : texture.valid) w.u8(v);
  for (Eigen::Index i = 0; i < texture.data.rows(); ++i)
    for (Eigen::Index j = 0; j < texture.data.cols(); ++j) w.f32(texture.data(i, j));
  return c;
}

ScalpTexture texture_from_chunk(const Chunk& chunk) {
  ByteReader r(chunk.payload.data(), chunk.payload.size(), "SCLP chunk");
  const GridHeader h = read_grid_header(r, kDtypeF32, "SCLP chunk");
  ScalpTexture t = ScalpTexture::empty(static_cast<int>(h.width), static_cast<int>(h.channels));
  r.need(t.valid.size() * (1 + 4ull * h.channels));
  for (auto& v : t.valid) v = r.u8() ? 1 : 0;
  for (Eigen::Index i = 0; i < t.data.rows(); ++i)
    for (Eigen::Index j = 0; j < t.data.cols(); ++j) t.data(i, j) = r.f32();
  return t;
}

Chunk density_chunk(const DensityMap& density) {
  Chunk c{make_tag("DENS"), {}};
  ByteWriter w(c.payload);
  w.u32(kDtypeF32);
  w.u32(density.resolution);
  w.u32(density.resolution);
  w.u32(1);
  for (Eigen::Index i = 0; i < density.values.size(); ++i) w.f32(density.values[i]);
  return c;
}

DensityMap density_from_chunk(const Chunk& chunk) {
  ByteReader r(chunk.payload.data(), chunk.payload.size(), "DENS chunk");
  const GridHeader h = read_grid_header(r, kDtypeF32, "DENS chunk");
  require(h.channels == 1, ErrorCode::sizing, "DENS chunk: density has one channel");
  DensityMap d = DensityMap::zeros(static_cast<int>(h.width));
  r.need(4ull * d.values.size());
  for (Eigen::Index i = 0; i < d.values.size(); ++i) d.values[i] = r.f32();
  return d;
}

Chunk codec_chunk(const CodecModel& model) {
  model.validate();
  Chunk c{make_tag("CODC"), {}};
  ByteWriter w(c.payload);
  w.u32(kDtypeF64);
  w.u32(model.points);
  w.u32(kLatentDim);
  for (Eigen::Index i = 0; i < model.mean.size(); ++i) w.f64(model.mean[i]);
  for (Eigen::Index j = 0; j < model.basis.cols(); ++j)
    for (Eigen::Index i = 0; i < model.basis.rows(); ++i) w.f64(model.basis(i, j));
  for (Eigen::Index i = 0; i < model.scales.size(); ++i) w.f64(model.scales[i]);
  for (Eigen::Index i = 0; i < model.variance.size(); ++i) w.f64(model.variance[i]);
  return c;
}

CodecModel codec_from_chunk(const Chunk& chunk) {
  ByteReader r(chunk.payload.data(), chunk.payload.size(), "CODC chunk");
  const std::uint32_t dtype = r.u32();
  require(dtype == kDtypeF64, ErrorCode::unsupported_version, "CODC chunk: unsupported dtype " + std::to_string(dtype));
  CodecModel m;
  m.points = static_cast<int>(r.u32());
  const std::uint32_t latent = r.u32();
  require(m.points >= 3 && m.points <= 1 << 16, ErrorCode::sizing, "CODC chunk: bad point count");
  require(latent == kLatentDim, ErrorCode::sizing, "CODC chunk: latent size must be " + std::to_string(kLatentDim));
  const Eigen::Index f = m.feature_size();
  r.need(8ull * (f + f * latent + 2ull * latent));
  m.mean.resize(f);
  for (Eigen::Index i = 0; i < f; ++i) m.mean[i] = r.f64();
  m.basis.resize(f, latent);
  for (Eigen::Index j = 0; j < m.basis.cols(); ++j)
    for (Eigen::Index i = 0; i < f; ++i) m.basis(i, j) = r.f64();
  m.scales.resize(latent);
  for (Eigen::Index i = 0; i < m.scales.size(); ++i) m.scales[i] = r.f64();
  m.variance.resize(latent);
  for (Eigen::Index i = 0; i < m.variance.size(); ++i) m.variance[i] = r.f64();
  m.validate();
  return m;
}

Chunk params_chunk(const GroomParams& params) {
  std::ostringstream text;
  write_params(text, params);
  const std::string s = text.str();
  return {make_tag("GPRM"), std::vector<std::uint8_t>(s.begin(), s.end())};
}

GroomParams params_from_chunk(const Chunk& chunk) {
  std::istringstream text(std::string(chunk.payload.begin(), chunk.payload.end()));
  return read_params(text);
}

void write_bundle(const std::string& path, const Bundle& bundle) {
  std::vector<Chunk> chunks;
  if (bundle.params) chunks.push_back(params_chunk(*bundle.params));
  if (bundle.codec) chunks.push_back(codec_chunk(*bundle.codec));
  if (bundle.texture) chunks.push_back(texture_chunk(*bundle.texture));
  if (bundle.density) chunks.push_back(density_chunk(*bundle.density));
  write_file(path, encode_container(chunks));
}

Bundle read_bundle(const std::string& path) {
  Bundle b;
  for (const auto& c : decode_container(read_file(path))) {
    const std::string tag = c.tag_string();
    if (tag == "SCLP")
      b.texture = texture_from_chunk(c);
    else if (tag == "DENS")
      b.density = density_from_chunk(c);
    else if (tag == "CODC")
      b.codec = codec_from_chunk(c);
    else if (tag == "GPRM")
      b.params = params_from_chunk(c);
  }
  return b;
}

// ---------------------------------------------------------------------------

void write_manifest(const std::string& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open '" + path + "' for writing");
  out << "seed,params,hair,texture,density\n";
  for (const auto& r : records) {
    for (const std::string* s : {&r.params, &r.hair, &r.texture, &r.density})
      require(s->find_first_of(",\n\"") == std::string::npos, ErrorCode::invalid_argument,
              "manifest: path '" + *s + "' contains a comma, quote or newline");
    auto field = [](const std::string& s) { return s.empty() ? std::string("-") : s; };
    out << r.seed << ',' << field(r.params) << ',' << field(r.hair) << ',' << field(r.texture) << ','
        << field(r.density) << '\n';
  }
  require(static_cast<bool>(out), ErrorCode::io, "error writing '" + path + "'");
}

std::vector<ManifestRecord> read_manifest(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::io, "cannot open '" + path + "' for reading");
  std::string line;
  require(static_cast<bool>(std::getline(in, line)) && line == "seed,params,hair,texture,density",
          ErrorCode::parse, "manifest: missing header");
  std::vector<ManifestRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item == "-" ? std::string() : item);
    require(f.size() == 5, ErrorCode::parse, "manifest line " + std::to_string(lineno) + ": expected 5 fields");
    ManifestRecord r;
    try {
      std::size_t used = 0;
      r.seed = std::stoull(f[0], &used);
      require(used == f[0].size(), ErrorCode::parse, "");
    } catch (const std::exception&) {
      throw Error(ErrorCode::parse, "manifest line " + std::to_string(lineno) + ": bad seed '" + f[0] + "'");
    }
    r.params = f[1];
    r.hair = f[2];
    r.texture = f[3];
    r.density = f[4];
    out.push_back(std::move(r));
  }
  return out;
}

void write_ply(const std::string& path, const Hairstyle& hair) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot open '" + path + "' for writing");
  std::size_t vertices = 0, edges = 0;
  for (const auto& s : hair.strands) {
    vertices += static_cast<std::size_t>(s.rows());
    edges += s.rows() > 0 ? static_cast<std::size_t>(s.rows() - 1) : 0;
  }
  out << "ply\nformat ascii 1.0\n"
      << "element vertex " << vertices << "\nproperty float x\nproperty float y\nproperty float z\n"
      << "element edge " << edges << "\nproperty int vertex1\nproperty int vertex2\nend_header\n";
  out.precision(9);
  for (const auto& s : hair.strands)
    for (Eigen::Index i = 0; i < s.rows(); ++i) out << s(i, 0) << ' ' << s(i, 1) << ' ' << s(i, 2) << '\n';
  std::size_t base = 0;
  for (const auto& s : hair.strands) {
    for (Eigen::Index i = 0; i + 1 < s.rows(); ++i) out << base + i << ' ' << base + i + 1 << '\n';
    base += static_cast<std::size_t>(s.rows());
  }
  require(static_cast<bool>(out), ErrorCode::io, "error writing '" + path + "'");
}

}  // namespace strandkit
