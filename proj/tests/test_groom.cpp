#include "strandkit/groom.hpp"

#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace strandkit;
using namespace strandkit::testing;

namespace {

Strand local_shape(const ScalpSurface& surface, const Strand& s) {
  const RootFrame f = uv_to_world(surface, world_to_uv(surface, s.row(0).transpose()));
  return (s.rowwise() - s.row(0)) * f.rotation();
}

Strand place(const ScalpSurface& surface, const Vec2& uv, const Strand& local) {
  const RootFrame f = uv_to_world(surface, uv);
  Strand s = local * f.rotation().transpose();
  s.rowwise() += f.origin.transpose();
  return s;
}

GuideSet guides_with_shapes(const ScalpSurface& surface, const std::vector<Strand>& shapes, Rng& rng) {
  GuideSet g;
  for (const auto& shape : shapes) {
    Vec2 uv;
    do uv = Vec2(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9));
    while (!in_chart(uv, -0.05));
    g.guides.push_back(place(surface, uv, shape));
  }
  return g;
}

// Local shape with arc-length-uniform spacing so resampling is a no-op.
Strand bent_shape(double length, double lean) {
  Strand s(kStrandPoints, 3);
  const double step = length / (kStrandPoints - 1);
  const Eigen::RowVector3d dir = Eigen::RowVector3d(lean, 0.3 * lean, 1.0).normalized();
  for (int i = 0; i < kStrandPoints; ++i) s.row(i) = i * step * dir;
  return s;
}

GroomParams quiet_params(int strands) {
  GroomParams p;
  p.strand_count = strands;
  p.clump.strength = 0.0;
  p.curl.radius = 0.0;
  p.noise.amplitude = 0.0;
  return p;
}

}  // namespace

TEST_CASE("identical local guide shapes propagate unchanged") {
  const ScalpSurface surface;
  Rng rng(1);
  const Strand shape = bent_shape(0.12, 0.4);
  const GuideSet guides = guides_with_shapes(surface, std::vector<Strand>(12, shape), rng);
  Rng r(2);
  const Hairstyle hair = interpolate_guides(guides, quiet_params(2000), surface, r);
  REQUIRE(hair.size() == 2000);
  double worst = 0.0;
  for (const auto& s : hair.strands) {
    REQUIRE(s.rows() == kStrandPoints);
    worst = std::max(worst, (local_shape(surface, s) - shape).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("nearest-guide mode copies the nearest guide exactly") {
  const ScalpSurface surface;
  Rng rng(3);
  std::vector<Strand> shapes;
  for (int i = 0; i < 20; ++i) shapes.push_back(bent_shape(0.05 + 0.005 * i, 0.1 * i));
  const GuideSet guides = guides_with_shapes(surface, shapes, rng);
  std::vector<Vec2> guide_uv;
  for (const auto& g : guides.guides) guide_uv.push_back(world_to_uv(surface, g.row(0).transpose()));

  GroomParams p = quiet_params(3000);
  p.guide_neighbors = 1;
  Rng r(4);
  const Hairstyle hair = interpolate_guides(guides, p, surface, r);
  double worst = 0.0;
  for (const auto& s : hair.strands) {
    const Vec2 uv = world_to_uv(surface, s.row(0).transpose());
    std::size_t best = 0;
    for (std::size_t j = 1; j < guide_uv.size(); ++j)
      if ((guide_uv[j] - uv).norm() < (guide_uv[best] - uv).norm()) best = j;
    worst = std::max(worst, (local_shape(surface, s) - shapes[best]).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("interpolation requires guides and scales length") {
  const ScalpSurface surface;
  Rng rng(5);
  CHECK_THROWS_AS(interpolate_guides(GuideSet{}, quiet_params(10), surface, rng), Error);
  const Strand shape = bent_shape(0.1, 0.0);
  const GuideSet guides = guides_with_shapes(surface, std::vector<Strand>(5, shape), rng);
  GroomParams p = quiet_params(50);
  p.length_scale = 1.5;
  Rng r(6);
  for (const auto& s : interpolate_guides(guides, p, surface, r).strands)
    CHECK(arc_length(s) == doctest::Approx(0.15).epsilon(1e-9));
}

TEST_CASE("default strand count is configurable") {
  GroomParams p;
  p.strand_count = 100000;
  CHECK_NOTHROW(p.validate());
  p.strand_count = 0;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("clump identities and scaling") {
  Rng rng(7);
  Hairstyle hair;
  for (int i = 0; i < 200; ++i) hair.strands.push_back(random_strand(kStrandPoints, rng));

  ClumpParams c;
  c.count = 10;
  c.strength = 0.0;
  Rng a(8);
  const Hairstyle same = clump(hair, c, a);
  for (std::size_t k = 0; k < hair.size(); ++k) CHECK((same.strands[k].array() == hair.strands[k].array()).all());

  c.strength = 1.0;
  c.profile = 0.0;
  Rng b(9);
  const Hairstyle full = clump(hair, c, b);
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < hair.size(); ++k)
    if ((full.strands[k].array() == hair.strands[k].array()).all()) kept.push_back(k);
  CHECK(kept.size() == 10);
  for (const auto& s : full.strands) {
    bool on_center = false;
    for (auto k : kept) on_center = on_center || (s.array() == hair.strands[k].array()).all();
    CHECK(on_center);
  }

  c.strength = 0.6;
  c.profile = 1.3;
  Rng r1(10);
  const Hairstyle partial = clump(hair, c, r1);
  // Centers barely move (they are pulled onto themselves); the oracle reuses
  // the root-nearest assignment over those.
  std::vector<int> centers;
  for (std::size_t k = 0; k < hair.size(); ++k)
    if ((partial.strands[k] - hair.strands[k]).cwiseAbs().maxCoeff() < 1e-15) centers.push_back(static_cast<int>(k));
  REQUIRE(!centers.empty());
  CHECK(centers.size() <= 10);
  const auto owner = clump_assignment(hair, centers);
  double worst = 0.0;
  for (std::size_t k = 0; k < hair.size(); ++k) {
    const Strand& center = hair.strands[owner[k]];
    for (int i = 1; i < kStrandPoints; ++i) {
      const double before = (hair.strands[k].row(i) - center.row(i)).norm();
      const double after = (partial.strands[k].row(i) - center.row(i)).norm();
      const double f = 1.0 - c.strength * std::pow(double(i) / kStrandPoints, c.profile);
      worst = std::max(worst, std::abs(after - f * before));
    }
    CHECK((partial.strands[k].row(0).array() == hair.strands[k].row(0).array()).all());
  }
  CHECK(worst < 1e-15);
}

TEST_CASE("curl identities") {
  Rng rng(11);
  Hairstyle hair;
  for (int i = 0; i < 20; ++i) hair.strands.push_back(random_strand(kStrandPoints, rng));
  CurlParams p;
  p.radius = 0.0;
  Rng a(12);
  const Hairstyle same = curl(hair, p, a);
  for (std::size_t k = 0; k < hair.size(); ++k) CHECK((same.strands[k].array() == hair.strands[k].array()).all());

  p.radius = 0.004;
  Rng r1(13), r2(13);
  const Hairstyle c1 = curl(hair, p, r1), c2 = curl(hair, p, r2);
  for (std::size_t k = 0; k < hair.size(); ++k) {
    CHECK((c1.strands[k].array() == c2.strands[k].array()).all());
    CHECK((c1.strands[k].row(0).array() == hair.strands[k].row(0).array()).all());
  }
}

TEST_CASE("curl of a straight strand lies on a cylinder") {
  Hairstyle hair;
  hair.strands.push_back(straight(kStrandPoints, {0.01, -0.02, 0.1}, {0, 0, 0.2 / (kStrandPoints - 1)}));
  CurlParams p;
  p.radius = 0.003;
  p.frequency = 25.0;
  p.taper = 0.0;
  Rng r(14);
  const Hairstyle out = curl(hair, p, r);
  const Strand& s = out.strands[0];
  double worst = 0.0;
  for (int i = 1; i < kStrandPoints; ++i) {
    const double radial = std::hypot(s(i, 0) - 0.01, s(i, 1) + 0.02);
    worst = std::max(worst, std::abs(radial - p.radius));
    CHECK(s(i, 2) == doctest::Approx(hair.strands[0](i, 2)).epsilon(1e-12));
  }
  CHECK(worst < 1e-9);
  CHECK(arc_length(s) >= arc_length(hair.strands[0]));

  // The angle advances by 2 pi f per unit arc length.
  const double step = 0.2 / (kStrandPoints - 1);
  for (int i = 2; i < kStrandPoints; ++i) {
    const double a0 = std::atan2(s(i - 1, 1) + 0.02, s(i - 1, 0) - 0.01);
    const double a1 = std::atan2(s(i, 1) + 0.02, s(i, 0) - 0.01);
    double da = std::remainder(a1 - a0, 2 * kPi);
    CHECK(std::abs(std::abs(da) - 2 * kPi * p.frequency * step) < 1e-9);
  }
}

TEST_CASE("noise respects its bound and keeps roots") {
  const ScalpSurface surface;
  const GuideSet guides = make_guides(surface, guide_style("medium"));
  Rng rng(15);
  const Hairstyle hair = interpolate_guides(guides, quiet_params(10000), surface, rng);

  NoiseParams p;
  p.amplitude = 0.0;
  Rng a(16);
  const Hairstyle same = perturb_noise(hair, p, a);
  for (std::size_t k = 0; k < hair.size(); ++k) CHECK((same.strands[k].array() == hair.strands[k].array()).all());

  p.amplitude = 0.005;
  p.octaves = 4;
  p.gain = 0.6;
  Rng b(17);
  const Hairstyle noisy = perturb_noise(hair, p, b);
  double worst = 0.0, moved = 0.0;
  for (std::size_t k = 0; k < hair.size(); ++k) {
    CHECK((noisy.strands[k].row(0).array() == hair.strands[k].row(0).array()).all());
    const Eigen::VectorXd d = (noisy.strands[k] - hair.strands[k]).rowwise().norm();
    worst = std::max(worst, d.maxCoeff());
    moved += d.mean();
  }
  CHECK(worst <= noise_bound(p));
  CHECK(noise_bound(p) == doctest::Approx(0.005 * (1 + 0.6 + 0.36 + 0.216)));
  CHECK(moved > 0.0);
}

TEST_CASE("shrinkwrap") {
  const ScalpSurface surface;
  const double margin = 2e-3;
  Hairstyle outside;
  outside.strands.push_back(straight(16, {0, 0, 0.2}, {0, 0.001, 0.001}));
  const Hairstyle same = shrinkwrap(outside, surface, margin);
  CHECK((same.strands[0].array() == outside.strands[0].array()).all());

  Hairstyle center;
  center.strands.push_back(Strand::Zero(4, 3));
  const Hairstyle lifted = shrinkwrap(center, surface, margin);
  for (int i = 0; i < 4; ++i) CHECK(signed_distance(surface, lifted.strands[0].row(i).transpose()) == doctest::Approx(margin).epsilon(1e-9));

  // One million points scattered around and inside the head.
  Rng rng(18);
  Hairstyle cloud;
  for (int k = 0; k < 3907; ++k) {
    Strand s(kStrandPoints, 3);
    for (int i = 0; i < kStrandPoints; ++i) {
      const Vec3 dir = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)).normalized();
      const double scale = rng.uniform(0.0, 1.1);
      s.row(i) = (surface.center + scale * dir.cwiseProduct(surface.radii)).transpose();
    }
    cloud.strands.push_back(std::move(s));
  }
  const Hairstyle wrapped = shrinkwrap(cloud, surface, margin);
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& s : wrapped.strands)
    for (int i = 0; i < s.rows(); ++i) lowest = std::min(lowest, signed_distance(surface, s.row(i).transpose()));
  CHECK(lowest >= margin - 1e-6);
  CHECK_THROWS_AS(shrinkwrap(cloud, surface, -1.0), Error);
}

TEST_CASE("droop bends toward -z and keeps segment lengths") {
  Hairstyle hair;
  hair.strands.push_back(straight(64, {0, 0, 0.1}, {0.002, 0, 0}));
  CHECK((droop(hair, 0.0).strands[0].array() == hair.strands[0].array()).all());
  const Hairstyle d = droop(hair, 20.0);
  const auto before = derivatives(hair.strands[0]).directions.rowwise().norm().eval();
  const auto after = derivatives(d.strands[0]).directions.rowwise().norm().eval();
  CHECK((before - after).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(d.strands[0](63, 2) < hair.strands[0](63, 2));
  CHECK((d.strands[0].row(0).array() == hair.strands[0].row(0).array()).all());
}

TEST_CASE("generate_sample is deterministic and valid") {
  const ScalpSurface surface;
  const GuideSet guides = make_guides(surface, guide_style("long"));
  GroomParams defaults;
  defaults.strand_count = 1500;
  RandomSpec spec = RandomSpec::defaults();
  for (auto& r : spec.ranges)
    if (r.name == "strand_count") r = {"strand_count", Distribution::fixed, 1500, 1500};

  const GroomSample a = generate_sample(guides, spec, 42, surface, defaults);
  const GroomSample b = generate_sample(guides, spec, 42, surface, defaults);
  REQUIRE(a.hair.size() == 1500);
  for (std::size_t k = 0; k < a.hair.size(); ++k) CHECK((a.hair.strands[k].array() == b.hair.strands[k].array()).all());
  CHECK((a.density.values == b.density.values).all());
  CHECK(a.density.values.minCoeff() >= 0.0f);
  CHECK(a.density.values.maxCoeff() <= 1.0f);

  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& s : a.hair.strands)
    for (int i = 0; i < s.rows(); ++i) lowest = std::min(lowest, signed_distance(surface, s.row(i).transpose()));
  CHECK(lowest >= a.params.margin - 1e-6);

  const GroomSample c = generate_sample(guides, spec, 43, surface, defaults);
  bool differs = false;
  for (std::size_t k = 0; k < c.hair.size() && !differs; ++k) differs = !(c.hair.strands[k].array() == a.hair.strands[k].array()).all();
  CHECK(differs);
}

TEST_CASE("bald disk receives no roots") {
  const ScalpSurface surface;
  GroomParams p = quiet_params(20000);
  p.density.bald_center = Vec2(0.55, 0.45);
  p.density.bald_radius = 0.15;
  const ScalpMask mask = make_scalp_mask();
  const DensityMap density = make_density(p.density, mask);
  const GuideSet guides = make_guides(surface, guide_style("short"));
  Rng rng(19);
  const Hairstyle hair = interpolate_guides(guides, p, surface, density, rng);
  for (const auto& s : hair.strands) {
    const Vec2 uv = world_to_uv(surface, s.row(0).transpose());
    CHECK((uv - p.density.bald_center).norm() > p.density.bald_radius);
  }
}

TEST_CASE("operators leave roots alone at positive profile") {
  const ScalpSurface surface;
  const GuideSet guides = make_guides(surface, guide_style("swept"));
  Rng rng(20);
  const Hairstyle hair = interpolate_guides(guides, quiet_params(500), surface, rng);
  ClumpParams c;
  c.count = 20;
  CurlParams cu;
  cu.radius = 0.003;
  NoiseParams n;
  n.amplitude = 0.004;
  Hairstyle h = clump(hair, c, rng);
  h = curl(h, cu, rng);
  h = perturb_noise(h, n, rng);
  h = droop(h, 2.0);
  for (std::size_t k = 0; k < h.size(); ++k) CHECK((h.strands[k].row(0).array() == hair.strands[k].row(0).array()).all());
}

TEST_CASE("parameter text formats round trip") {
  GroomParams p;
  p.strand_count = 1234;
  p.curl.radius = 0.00321;
  p.clump.profile = 2.25;
  p.density.bald_center = Vec2(0.3, 0.7);
  p.seed = 987654321987ULL;
  std::stringstream ss;
  write_params(ss, p);
  const GroomParams q = read_params(ss);
  for (auto name : groom_param_names()) CHECK(get_param(q, name) == get_param(p, name));
  CHECK(q.seed == p.seed);

  std::stringstream sp;
  const RandomSpec spec = RandomSpec::defaults();
  write_spec(sp, spec);
  const RandomSpec back = read_spec(sp);
  REQUIRE(back.ranges.size() == spec.ranges.size());
  for (std::size_t i = 0; i < spec.ranges.size(); ++i) {
    CHECK(back.ranges[i].name == spec.ranges[i].name);
    CHECK(back.ranges[i].distribution == spec.ranges[i].distribution);
    CHECK(back.ranges[i].min == spec.ranges[i].min);
    CHECK(back.ranges[i].max == spec.ranges[i].max);
  }

  std::istringstream bad("curl_radius log_uniform 2 1\n");
  CHECK_THROWS_AS(read_spec(bad), Error);
  std::istringstream unknown("no_such_param 1\n");
  CHECK_THROWS_AS(read_params(unknown), Error);
  std::istringstream comment("# only a comment\n\nstrand_count 7  # trailing\n");
  CHECK(read_params(comment).strand_count == 7);
}

TEST_CASE("draw_params stays inside the ranges") {
  const RandomSpec spec = RandomSpec::defaults();
  Rng rng(21);
  for (int trial = 0; trial < 200; ++trial) {
    const GroomParams p = draw_params(spec, rng);
    CHECK_NOTHROW(p.validate());
    for (const auto& r : spec.ranges) {
      const double v = get_param(p, r.name);
      CHECK(v >= std::floor(r.min));
      CHECK(v <= std::ceil(r.max));
    }
  }
}

TEST_CASE("guide styles") {
  const ScalpSurface surface;
  for (auto name : guide_style_names()) {
    const GuideSet g = make_guides(surface, guide_style(name));
    CHECK(g.guides.size() >= 3);
    for (const auto& s : g.guides) {
      CHECK(s.rows() == kStrandPoints);
      CHECK(in_chart(world_to_uv(surface, s.row(0).transpose()), 1e-9));
    }
  }
  CHECK_THROWS_AS(guide_style("mohawk"), Error);
}
