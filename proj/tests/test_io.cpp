#include "strandkit/io.hpp"

#include "support.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace strandkit;
using namespace strandkit::testing;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("strandkit_io_" + std::to_string(Rng(reinterpret_cast<std::uintptr_t>(this))()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::invalid_argument;
}

HairFile sample_file(Rng& rng, int strands, bool ragged) {
  HairFile f;
  for (int k = 0; k < strands; ++k) {
    const int n = ragged ? 2 + static_cast<int>(rng.uniform(0, 30)) : 16;
    f.point_counts.push_back(n);
    for (int i = 0; i < 3 * n; ++i) f.points.push_back(static_cast<float>(rng.uniform(-0.2, 0.2)));
  }
  HairAttribute a{"thickness", {}};
  for (int k = 0; k < strands; ++k) a.values.push_back(static_cast<float>(rng.uniform(0, 1e-4)));
  f.attributes.push_back(a);
  return f;
}

void put_u32(std::vector<std::uint8_t>& b, std::size_t at, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b[at + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::vector<std::uint8_t> yuksel(const std::vector<std::uint16_t>& segments, const std::vector<float>& points, bool with_segments,
                                 std::uint32_t default_segments = 0) {
  std::vector<std::uint8_t> b(128, 0);
  std::memcpy(b.data(), "HAIR", 4);
  put_u32(b, 4, static_cast<std::uint32_t>(with_segments ? segments.size() : points.size() / 3 / (default_segments + 1)));
  put_u32(b, 8, static_cast<std::uint32_t>(points.size() / 3));
  put_u32(b, 12, (with_segments ? 1u : 0u) | 2u);
  put_u32(b, 16, default_segments);
  if (with_segments)
    for (auto s : segments) {
      b.push_back(static_cast<std::uint8_t>(s));
      b.push_back(static_cast<std::uint8_t>(s >> 8));
    }
  const auto* p = reinterpret_cast<const std::uint8_t*>(points.data());
  b.insert(b.end(), p, p + 4 * points.size());
  return b;
}

}  // namespace

TEST_CASE("hair file round trip is byte identical") {
  TempDir dir;
  Rng rng(1);
  for (bool ragged : {false, true}) {
    const HairFile f = sample_file(rng, 40, ragged);
    write_hair(dir / "a.hair", f);
    const HairFile g = read_hair(dir / "a.hair");
    CHECK(g.point_counts == f.point_counts);
    CHECK(g.points == f.points);
    REQUIRE(g.attributes.size() == 1);
    CHECK(g.attributes[0].name == "thickness");
    CHECK(g.attributes[0].values == f.attributes[0].values);
    write_hair(dir / "b.hair", g);
    CHECK(read_file(dir / "a.hair") == read_file(dir / "b.hair"));
    CHECK(fs::file_size(dir / "a.hair") == hair_file_size(f));
  }
}

TEST_CASE("hair file size formula") {
  // Header 24 bytes, counts 4 S, positions 12 P, attributes 2 + len + 4 S each.
  HairFile f;
  f.point_counts.assign(3, 5);
  f.points.assign(45, 0.f);
  CHECK(hair_file_size(f) == 24 + 12 + 180);
  CHECK(encode_hair(f).size() == hair_file_size(f));
  f.attributes.push_back({"ab", {1, 2, 3}});
  CHECK(hair_file_size(f) == 24 + 12 + 180 + 2 + 2 + 12);
  CHECK(encode_hair(f).size() == hair_file_size(f));

  // 100K strands x 256 points, by arithmetic only.
  HairFile big;
  big.point_counts.assign(100000, 256);
  big.points.resize(3ull * 100000 * 256);
  CHECK(hair_file_size(big) == 24ull + 4ull * 100000 + 12ull * 100000 * 256);
}

TEST_CASE("hairstyle conversion") {
  Rng rng(2);
  Hairstyle h;
  for (int k = 0; k < 5; ++k) h.strands.push_back(random_strand(kStrandPoints, rng, 0.1));
  const HairFile f = to_hair_file(h);
  CHECK(f.strand_count() == 5);
  CHECK(f.total_points() == 5u * kStrandPoints);
  std::size_t resampled = 99;
  const Hairstyle back = to_hairstyle(f, kStrandPoints, &resampled);
  CHECK(resampled == 0);
  for (int k = 0; k < 5; ++k) CHECK((back.strands[k] - h.strands[k].cast<float>().cast<double>()).cwiseAbs().maxCoeff() == 0.0);

  HairFile ragged;
  ragged.point_counts = {3};
  ragged.points = {0, 0, 0, 0, 0, 1, 0, 0, 3};
  const Hairstyle r = to_hairstyle(ragged, 5, &resampled);
  CHECK(resampled == 1);
  REQUIRE(r.strands[0].rows() == 5);
  for (int i = 0; i < 5; ++i) CHECK(r.strands[0](i, 2) == doctest::Approx(0.75 * i));
}

TEST_CASE("hair decoding errors carry codes") {
  Rng rng(3);
  const HairFile f = sample_file(rng, 4, true);
  const auto bytes = encode_hair(f);

  HairFile empty;
  CHECK(code_of([&] { encode_hair(empty); }) == ErrorCode::invalid_argument);
  CHECK(code_of([&] { to_hair_file(Hairstyle{}); }) == ErrorCode::invalid_argument);

  auto bad = bytes;
  bad[0] = 'X';
  CHECK(code_of([&] { decode_hair(bad); }) == ErrorCode::bad_magic);

  for (std::size_t cut : {std::size_t{3}, std::size_t{10}, std::size_t{30}, bytes.size() - 1}) {
    const std::vector<std::uint8_t> shortened(bytes.begin(), bytes.begin() + cut);
    CHECK(code_of([&] { decode_hair(shortened); }) == ErrorCode::truncated);
  }

  auto version = bytes;
  put_u32(version, 4, 7);
  CHECK(code_of([&] { decode_hair(version); }) == ErrorCode::unsupported_version);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(code_of([&] { decode_hair(trailing); }) == ErrorCode::count_overflow);

  // Per-strand counts no longer sum to the declared total.
  auto mismatch = bytes;
  const std::size_t counts_at = 24 + 2 + f.attributes[0].name.size();
  put_u32(mismatch, counts_at, f.point_counts[0] + 1);
  CHECK(code_of([&] { decode_hair(mismatch); }) == ErrorCode::count_overflow);

  // Absurd declared point total.
  auto huge = bytes;
  for (int i = 0; i < 8; ++i) huge[12 + i] = 0xff;
  const ErrorCode c = code_of([&] { decode_hair(huge); });
  CHECK((c == ErrorCode::count_overflow || c == ErrorCode::truncated));

  HairFile inconsistent = f;
  inconsistent.points.pop_back();
  CHECK(code_of([&] { encode_hair(inconsistent); }) == ErrorCode::sizing);
  CHECK(code_of([&] { read_hair("/nonexistent/x.hair"); }) == ErrorCode::io);
}

TEST_CASE("Yuksel hair files are read") {
  const std::vector<float> pts = {0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 0, 1, 1, 0, 2};
  const HairFile a = decode_hair(yuksel({1, 2}, pts, true));
  CHECK(a.point_counts == std::vector<std::uint32_t>{2, 3});
  CHECK(a.points == pts);

  const std::vector<float> even(pts.begin(), pts.begin() + 12);
  const HairFile b = decode_hair(yuksel({}, even, false, 1));
  CHECK(b.point_counts == std::vector<std::uint32_t>{2, 2});

  auto wrong = yuksel({1, 2}, pts, true);
  put_u32(wrong, 8, 6);
  CHECK(code_of([&] { decode_hair(wrong); }) == ErrorCode::count_overflow);
  auto cut = yuksel({1, 2}, pts, true);
  cut.resize(cut.size() - 4);
  CHECK(code_of([&] { decode_hair(cut); }) == ErrorCode::truncated);
}

TEST_CASE("streaming writer matches the in-memory encoder") {
  TempDir dir;
  Rng rng(4);
  Hairstyle all;
  for (int k = 0; k < 25; ++k) all.strands.push_back(random_strand(12, rng, 0.1));
  {
    HairWriter w(dir / "s.hair", 25, 12);
    for (int start = 0; start < 25; start += 10) {
      Hairstyle batch;
      for (int k = start; k < std::min(start + 10, 25); ++k) batch.strands.push_back(all.strands[k]);
      w.append(batch);
    }
    w.close();
  }
  CHECK(read_file(dir / "s.hair") == encode_hair(to_hair_file(all)));

  HairWriter partial(dir / "p.hair", 3, 12);
  Hairstyle one;
  one.strands.push_back(all.strands[0]);
  partial.append(one);
  CHECK(code_of([&] { partial.close(); }) == ErrorCode::count_overflow);

  HairWriter over(dir / "o.hair", 1, 12);
  Hairstyle two;
  two.strands = {all.strands[0], all.strands[1]};
  CHECK(code_of([&] { over.append(two); }) == ErrorCode::count_overflow);
  HairWriter wrong(dir / "w.hair", 1, 13);
  CHECK(code_of([&] { wrong.append(one); }) == ErrorCode::sizing);
}

TEST_CASE("container framing") {
  Chunk a{{'A', 'B', 'C', 'D'}, {1, 2, 3}}, b{{'X', 'Y', 'Z', 'W'}, {}};
  const auto bytes = encode_container({a, b});
  CHECK(bytes.size() == 8 + 12 + 3 + 12);
  const auto back = decode_container(bytes);
  REQUIRE(back.size() == 2);
  CHECK(back[0].tag_string() == "ABCD");
  CHECK(back[0].payload == a.payload);
  CHECK(back[1].payload.empty());

  auto cut = bytes;
  cut.resize(bytes.size() - 1);
  CHECK(code_of([&] { decode_container(cut); }) == ErrorCode::truncated);
  auto version = bytes;
  put_u32(version, 4, 2);
  CHECK(code_of([&] { decode_container(version); }) == ErrorCode::unsupported_version);
  auto magic = bytes;
  magic[1] = 'x';
  CHECK(code_of([&] { decode_container(magic); }) == ErrorCode::bad_magic);
}

TEST_CASE("bundle round trip and unknown chunks") {
  TempDir dir;
  Rng rng(5);
  Bundle b;
  ScalpTexture tex = ScalpTexture::empty(8, 3);
  for (Eigen::Index i = 0; i < tex.data.size(); ++i) tex.data(i) = static_cast<float>(rng.uniform(-1, 1));
  for (auto& v : tex.valid) v = rng.uniform(0, 1) < 0.5;
  b.texture = tex;
  DensityMap dens = DensityMap::zeros(8);
  for (auto& v : dens.values) v = static_cast<float>(rng.uniform(0, 1));
  b.density = dens;

  CodecModel m;
  m.points = 32;
  const int f = m.feature_size();
  m.mean = Eigen::VectorXd::Random(f);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(f, kLatentDim);
  m.basis = Eigen::HouseholderQR<Eigen::MatrixXd>(a).householderQ() * Eigen::MatrixXd::Identity(f, kLatentDim);
  m.scales = Eigen::VectorXd::LinSpaced(kLatentDim, 2.0, 0.1);
  m.variance = m.scales.array().square();
  b.codec = m;

  GroomParams p;
  p.strand_count = 1234;
  p.curl.radius = 0.004;
  p.seed = 77;
  b.params = p;

  write_bundle(dir / "b.dlck", b);
  // Splice in a chunk nobody knows about.
  auto chunks = decode_container(read_file(dir / "b.dlck"));
  chunks.insert(chunks.begin() + 1, Chunk{{'Z', 'Z', 'Z', 'Z'}, std::vector<std::uint8_t>(17, 9)});
  write_file(dir / "c.dlck", encode_container(chunks));

  for (const char* name : {"b.dlck", "c.dlck"}) {
    const Bundle r = read_bundle(dir / name);
    REQUIRE(r.texture);
    CHECK((r.texture->data.array() == tex.data.array()).all());
    CHECK(r.texture->valid == tex.valid);
    CHECK(r.texture->channels == 3);
    REQUIRE(r.density);
    CHECK((r.density->values == dens.values).all());
    REQUIRE(r.codec);
    CHECK(r.codec->points == 32);
    CHECK(r.codec->mean == m.mean);
    CHECK(r.codec->basis == m.basis);
    CHECK(r.codec->scales == m.scales);
    REQUIRE(r.params);
    for (auto n : groom_param_names()) CHECK(get_param(*r.params, n) == get_param(p, n));
  }

  Chunk broken = texture_chunk(tex);
  broken.payload.resize(broken.payload.size() - 2);
  CHECK(code_of([&] { texture_from_chunk(broken); }) == ErrorCode::truncated);
}

TEST_CASE("manifest round trip") {
  TempDir dir;
  const std::vector<ManifestRecord> recs = {{1, "p1.txt", "h1.hair", "t1.dlck", "d1.dlck"},
                                            {18446744073709551615ull, "p2.txt", "h2.hair", "", ""}};
  write_manifest(dir / "m.csv", recs);
  const auto back = read_manifest(dir / "m.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[1].seed == 18446744073709551615ull);
  CHECK(back[1].texture.empty());
  CHECK(back[0].density == "d1.dlck");
  std::ifstream in(dir / "m.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "seed,params,hair,texture,density");

  CHECK(code_of([&] { write_manifest(dir / "x.csv", {{1, "a,b", "", "", ""}}); }) == ErrorCode::invalid_argument);
  std::ofstream(dir / "bad.csv") << "seed,params,hair,texture,density\nabc,-,-,-,-\n";
  CHECK(code_of([&] { read_manifest(dir / "bad.csv"); }) == ErrorCode::parse);
}

TEST_CASE("PLY polyline export") {
  TempDir dir;
  Hairstyle h;
  h.strands.push_back(straight(3, Eigen::RowVector3d(0, 0, 0), Eigen::RowVector3d(0, 0, 1)));
  h.strands.push_back(straight(2, Eigen::RowVector3d(1, 0, 0), Eigen::RowVector3d(0, 1, 0)));
  write_ply(dir / "h.ply", h);
  std::ifstream in(dir / "h.ply");
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all.find("element vertex 5") != std::string::npos);
  CHECK(all.find("element edge 3") != std::string::npos);
  CHECK(all.find("\n0 1\n1 2\n3 4\n") != std::string::npos);
}
