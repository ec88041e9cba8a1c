#include "strandkit/codec.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace strandkit;
using namespace strandkit::testing;

namespace {

Vec2 chart_uv(Rng& rng) {
  Vec2 uv;
  do uv = Vec2(rng.uniform(), rng.uniform());
  while (!in_chart(uv, -0.02) || (uv - Vec2(0.5, 0.5)).norm() < 1e-3);
  return uv;
}

// Smooth local-frame modes: mode k is a sine in one coordinate.
Strand mode(int k, int points) {
  Strand s = Strand::Zero(points, 3);
  for (int i = 0; i < points; ++i) {
    const double t = double(i) / (points - 1);
    s(i, k % 3) = 0.01 * std::sin(kPi * (k / 3 + 1) * t) * t;
  }
  return s;
}

Strand base_shape(int points) {
  Strand s(points, 3);
  for (int i = 0; i < points; ++i) {
    const double t = double(i) / (points - 1);
    s.row(i) << 0.02 * t * t, 0.0, 0.12 * t;
  }
  return s;
}

Strand place(const RootFrame& f, const Strand& local) {
  Strand s = local * f.rotation().transpose();
  s.rowwise() += f.origin.transpose();
  return s;
}

// Corpus with `rank` active modes of decaying amplitude, placed at random roots.
std::vector<Strand> corpus(int n, int rank, const ScalpSurface& surface, Rng& rng, int points = kStrandPoints) {
  std::vector<Strand> out;
  const Strand base = base_shape(points);
  for (int j = 0; j < n; ++j) {
    Strand local = base;
    for (int k = 0; k < rank; ++k) local += rng.uniform(-1, 1) * std::pow(0.9, k) * mode(k, points);
    local.row(0).setZero();
    out.push_back(place(uv_to_world(surface, chart_uv(rng)), local));
  }
  return out;
}

RootFrame random_frame(Rng& rng) {
  const Eigen::Quaterniond q = Eigen::Quaterniond::UnitRandom();
  (void)rng;
  RootFrame f;
  const Mat3 r = q.toRotationMatrix();
  f.tangent = r.col(0);
  f.bitangent = r.col(1);
  f.normal = r.col(2);
  f.origin = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
  return f;
}

const CodecModel& shared_model() {
  static const CodecModel model = [] {
    const ScalpSurface surface;
    Rng rng(100);
    return fit_codec(corpus(600, 90, surface, rng), surface);
  }();
  return model;
}

}  // namespace

TEST_CASE("degenerate corpora are rejected") {
  const ScalpSurface surface;
  Rng rng(1);
  const Strand one = place(uv_to_world(surface, {0.4, 0.6}), base_shape(kStrandPoints));
  try {
    fit_codec(std::vector<Strand>(70, one), surface);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate);
  }
  CHECK_THROWS_AS(fit_codec(corpus(64, 10, surface, rng), surface), Error);
}

TEST_CASE("model invariants") {
  const CodecModel& m = shared_model();
  CHECK_NOTHROW(m.validate());
  CHECK((m.basis.transpose() * m.basis - Eigen::MatrixXd::Identity(kLatentDim, kLatentDim)).cwiseAbs().maxCoeff() < 1e-8);
  for (int i = 0; i + 1 < kLatentDim; ++i) CHECK(m.scales[i] >= m.scales[i + 1]);
  CHECK(m.scales.minCoeff() > 0.0);
}

TEST_CASE("synthetic 10-dimensional corpus has a 10-dimensional spectrum") {
  const ScalpSurface surface;
  Rng rng(2);
  const CodecModel m = fit_codec(corpus(300, 10, surface, rng), surface);
  const double total = m.variance.sum();
  CHECK(m.variance.tail(kLatentDim - 10).sum() <= 1e-8 * total);
  CHECK(m.variance[9] > 1e-4 * total);
}

TEST_CASE("mean strand is z = 0; basis-aligned strands are unit codes") {
  const CodecModel& m = shared_model();
  const RootFrame id;
  const Strand mean = decode(m, LatentCode::Zero(), id);
  CHECK(encode(m, mean, id).cwiseAbs().maxCoeff() < 1e-8);

  Eigen::VectorXd x = m.mean + m.scales[3] * m.basis.col(3);
  const Strand s3 = uncanonicalize(x, id, m.points);
  const LatentCode z = encode(m, s3, id);
  CHECK((z - LatentCode::Unit(3)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("encode inverts decode for random codes and frames") {
  const CodecModel& m = shared_model();
  Rng rng(3);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    LatentCode z;
    for (int i = 0; i < kLatentDim; ++i) z[i] = rng.uniform(-3, 3);
    const RootFrame f = random_frame(rng);
    worst = std::max(worst, (encode(m, decode(m, z, f), f) - z).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("decode places the root and is affine") {
  const CodecModel& m = shared_model();
  Rng rng(4);
  const RootFrame f = random_frame(rng);
  const Strand zero = decode(m, LatentCode::Zero(), f);
  CHECK((zero.row(0).transpose().array() == f.origin.array()).all());

  for (int trial = 0; trial < 20; ++trial) {
    LatentCode a, b;
    for (int i = 0; i < kLatentDim; ++i) {
      a[i] = rng.uniform(-2, 2);
      b[i] = rng.uniform(-2, 2);
    }
    const Strand lhs = decode_local(m, a) + decode_local(m, b) - decode_local(m, LatentCode::Zero());
    CHECK((lhs - decode_local(m, a + b)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("in-span strands reconstruct; projections are idempotent") {
  const CodecModel& m = shared_model();
  const ScalpSurface surface;
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd coeff(kLatentDim);
    for (int i = 0; i < kLatentDim; ++i) coeff[i] = rng.uniform(-2, 2) * m.scales[i];
    const RootFrame f = uv_to_world(surface, chart_uv(rng));
    const Strand s = uncanonicalize(m.mean + m.basis * coeff, f, m.points);
    const Strand back = decode(m, encode(m, s, f), f);
    CHECK(strand_data_loss(s, back) <= 1e-6);

    const Strand off = s + random_strand(m.points, rng, 0.002);
    const Strand p1 = decode(m, encode(m, off, f), f);
    const Strand p2 = decode(m, encode(m, p1, f), f);
    CHECK((p1 - p2).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("truncation never beats the full code") {
  const ScalpSurface surface;
  Rng rng(6);
  const auto train = corpus(400, 100, surface, rng);
  const CodecModel m = fit_codec(train, surface);
  for (int j = 0; j < 50; ++j) {
    const RootFrame f = root_frame(surface, train[j]);
    const LatentCode z = encode(m, train[j], f);
    LatentCode half = z;
    half.tail(kLatentDim - 32).setZero();
    CHECK(strand_data_loss(train[j], decode(m, z, f)) <= strand_data_loss(train[j], decode(m, half, f)) + 1e-15);
  }
}

TEST_CASE("encoding is invariant to rigid placement with the matching frame") {
  const CodecModel& m = shared_model();
  Rng rng(7);
  const RootFrame f = random_frame(rng), g = random_frame(rng);
  LatentCode z;
  for (int i = 0; i < kLatentDim; ++i) z[i] = rng.uniform(-1, 1);
  const Strand local = decode_local(m, z) + random_strand(m.points, rng, 1e-3);
  CHECK((encode(m, place(f, local), f) - encode(m, place(g, local), g)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("length mismatch is an error") {
  const CodecModel& m = shared_model();
  CHECK_THROWS_AS(encode(m, Strand::Zero(10, 3), RootFrame{}), Error);
}

TEST_CASE("channel weights") {
  const CodecModel& m = shared_model();
  const LossConfig cfg;
  const ChannelWeights w = channel_weights(m, cfg);
  CHECK(std::abs(w.sum() - 1.0) < 1e-12);
  CHECK(w.minCoeff() >= 0.0);
  CHECK((w.array() == channel_weights(m, cfg, 0.8).array()).all());

  // Closed form: decode(eps e_i) - decode(0) is eps * scale_i * basis_i, so the
  // raw weight is the loss of that single displacement against zero.
  ChannelWeights oracle;
  for (int i = 0; i < kLatentDim; ++i) {
    const Eigen::VectorXd disp = 0.8 * m.scales[i] * m.basis.col(i);
    Strand d = Strand::Zero(m.points, 3);
    for (int r = 1; r < m.points; ++r)
      for (int c = 0; c < 3; ++c) d(r, c) = disp[3 * (r - 1) + c];
    oracle[i] = strand_data_loss(Strand::Zero(m.points, 3).eval(), d, cfg);
  }
  const ChannelWeights raw = raw_channel_weights([&](const LatentCode& z) { return decode_local(m, z); }, cfg, 0.8);
  CHECK(((raw - oracle).cwiseAbs().array() / oracle.array()).maxCoeff() < 1e-9);
  CHECK(((w - oracle / oracle.sum()).cwiseAbs().array() / w.array()).maxCoeff() < 1e-9);
}

TEST_CASE("raising a scale strictly raises its raw weight") {
  const CodecModel& m = shared_model();
  const auto raw = [](const CodecModel& model) {
    return raw_channel_weights([&](const LatentCode& z) { return decode_local(model, z); }, {}, 0.8);
  };
  const ChannelWeights before = raw(m);
  for (int i : {0, 7, 31, 63}) {
    CodecModel scaled = m;
    scaled.scales[i] *= 1.5;
    const ChannelWeights after = raw(scaled);
    CHECK(after[i] > before[i]);
  }
  CHECK_THROWS_AS(channel_weights(m, {}, 0.0), Error);
}

TEST_CASE("all-zero weights are rejected") {
  CodecModel m = shared_model();
  m.basis.setZero();
  CHECK_THROWS_AS(channel_weights(m), Error);
}
