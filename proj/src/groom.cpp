#include "strandkit/groom.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace strandkit {

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

namespace {

struct ParamField {
  std::string_view name;
  bool integer;
  std::function<double(const GroomParams&)> get;
  std::function<void(GroomParams&, double)> set;
};

#define STRANDKIT_REAL(NAME, EXPR)                                    \
  ParamField{NAME, false, [](const GroomParams& p) { return p.EXPR; }, \
             [](GroomParams& p, double v) { p.EXPR = v; }}
#define STRANDKIT_INT(NAME, EXPR)                                                          \
  ParamField{NAME, true, [](const GroomParams& p) { return static_cast<double>(p.EXPR); }, \
             [](GroomParams& p, double v) { p.EXPR = static_cast<int>(std::lround(v)); }}

const std::vector<ParamField>& param_fields() {
  static const std::vector<ParamField> fields = {
      STRANDKIT_INT("strand_count", strand_count),
      STRANDKIT_INT("guide_neighbors", guide_neighbors),
      STRANDKIT_REAL("length_scale", length_scale),
      STRANDKIT_INT("clump_count", clump.count),
      STRANDKIT_REAL("clump_strength", clump.strength),
      STRANDKIT_REAL("clump_profile", clump.profile),
      STRANDKIT_REAL("curl_radius", curl.radius),
      STRANDKIT_REAL("curl_frequency", curl.frequency),
      STRANDKIT_REAL("curl_phase", curl.phase),
      STRANDKIT_REAL("curl_taper", curl.taper),
      STRANDKIT_REAL("noise_amplitude", noise.amplitude),
      STRANDKIT_REAL("noise_frequency", noise.frequency),
      STRANDKIT_INT("noise_octaves", noise.octaves),
      STRANDKIT_REAL("noise_gain", noise.gain),
      STRANDKIT_REAL("density_baseline", density.baseline),
      STRANDKIT_REAL("bald_u", density.bald_center.x()),
      STRANDKIT_REAL("bald_v", density.bald_center.y()),
      STRANDKIT_REAL("bald_radius", density.bald_radius),
      STRANDKIT_REAL("bald_falloff", density.bald_falloff),
      STRANDKIT_REAL("droop", droop),
      STRANDKIT_INT("rounds", rounds),
      STRANDKIT_REAL("round_decay", round_decay),
      STRANDKIT_REAL("margin", margin),
  };
  return fields;
}

#undef STRANDKIT_REAL
#undef STRANDKIT_INT

const ParamField& field(std::string_view name) {
  for (const auto& f : param_fields())
    if (f.name == name) return f;
  throw Error(ErrorCode::parse, "unknown groom parameter '" + std::string(name) + "'");
}

std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::fixed: return "fixed";
    case Distribution::uniform: return "uniform";
    case Distribution::log_uniform: return "log_uniform";
  }
  return "uniform";
}

Distribution parse_distribution(const std::string& s) {
  if (s == "fixed") return Distribution::fixed;
  if (s == "uniform") return Distribution::uniform;
  if (s == "log_uniform" || s == "loguniform") return Distribution::log_uniform;
  throw Error(ErrorCode::parse, "unknown distribution '" + s + "'");
}

// Strips comments and splits a line into whitespace-separated fields.
std::vector<std::string> fields_of(const std::string& line) {
  std::istringstream ls(line.substr(0, line.find('#')));
  std::vector<std::string> out;
  std::string word;
  while (ls >> word) out.push_back(word);
  return out;
}

double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == s.size(), ErrorCode::parse, "not a number: '" + s + "'");
  return v;
}

}  // namespace

void GroomParams::validate() const {
  require(strand_count >= 1, ErrorCode::invalid_argument, "strand_count must be >= 1");
  require(guide_neighbors >= 1, ErrorCode::invalid_argument, "guide_neighbors must be >= 1");
  require(length_scale > 0.0 && length_scale <= 2.0, ErrorCode::invalid_argument,
          "length_scale must lie in (0, 2]");
  require(clump.count >= 1, ErrorCode::invalid_argument, "clump_count must be >= 1");
  require(clump.strength >= 0.0 && clump.strength <= 1.0, ErrorCode::invalid_argument,
          "clump_strength must lie in [0, 1]");
  require(clump.profile >= 0.0, ErrorCode::invalid_argument, "clump_profile must be >= 0");
  require(curl.radius >= 0.0 && curl.taper >= 0.0, ErrorCode::invalid_argument,
          "curl radius and taper must be >= 0");
  require(noise.amplitude >= 0.0 && noise.octaves >= 1 && noise.gain >= 0.0, ErrorCode::invalid_argument,
          "noise amplitude/gain must be >= 0 and octaves >= 1");
  require(density.baseline > 0.0 && density.baseline <= 1.0, ErrorCode::invalid_argument,
          "density_baseline must lie in (0, 1]");
  require(density.bald_radius >= 0.0 && density.bald_falloff >= 0.0, ErrorCode::invalid_argument,
          "bald radius and falloff must be >= 0");
  require(rounds >= 1 && round_decay >= 0.0, ErrorCode::invalid_argument,
          "rounds must be >= 1 and round_decay >= 0");
  require(margin >= 0.0, ErrorCode::invalid_argument, "margin must be >= 0");
}

std::vector<std::string_view> groom_param_names() {
  std::vector<std::string_view> names;
  for (const auto& f : param_fields()) names.push_back(f.name);
  return names;
}

double get_param(const GroomParams& params, std::string_view name) { return field(name).get(params); }

void set_param(GroomParams& params, std::string_view name, double value) {
  require(std::isfinite(value), ErrorCode::invalid_argument,
          "non-finite value for '" + std::string(name) + "'");
  field(name).set(params, value);
}

void RandomSpec::validate() const {
  for (const auto& r : ranges) {
    field(r.name);
    require(r.min <= r.max, ErrorCode::invalid_argument, "range for '" + r.name + "' has min > max");
    require(r.distribution != Distribution::log_uniform || r.min > 0.0, ErrorCode::invalid_argument,
            "log_uniform range for '" + r.name + "' needs min > 0");
  }
}

RandomSpec RandomSpec::defaults() {
  using D = Distribution;
  return {{
      {"strand_count", D::fixed, 10000, 10000},
      {"length_scale", D::uniform, 0.5, 1.5},
      {"clump_count", D::log_uniform, 20, 400},
      {"clump_strength", D::uniform, 0.0, 0.9},
      {"clump_profile", D::uniform, 0.5, 3.0},
      {"curl_radius", D::uniform, 0.0, 0.01},
      {"curl_frequency", D::uniform, 5.0, 60.0},
      {"curl_phase", D::uniform, 0.0, 6.283185307179586},
      {"curl_taper", D::uniform, 0.0, 1.0},
      {"noise_amplitude", D::uniform, 0.0, 0.004},
      {"noise_frequency", D::log_uniform, 10.0, 100.0},
      {"noise_octaves", D::uniform, 1.0, 4.0},
      {"density_baseline", D::uniform, 0.5, 1.0},
      {"bald_u", D::uniform, 0.35, 0.65},
      {"bald_v", D::uniform, 0.35, 0.65},
      {"bald_radius", D::uniform, 0.0, 0.2},
      {"droop", D::uniform, 0.0, 3.0},
  }};
}

GroomParams draw_params(const RandomSpec& spec, Rng& rng, GroomParams base) {
  spec.validate();
  for (const auto& r : spec.ranges) {
    double v = r.min;
    switch (r.distribution) {
      case Distribution::fixed: break;
      case Distribution::uniform: v = rng.uniform(r.min, r.max); break;
      case Distribution::log_uniform:
        v = std::exp(rng.uniform(std::log(r.min), std::log(r.max)));
        break;
    }
    set_param(base, r.name, v);
  }
  return base;
}

void write_params(std::ostream& out, const GroomParams& params) {
  out.precision(17);
  out << "seed " << params.seed << '\n';
  for (const auto& f : param_fields()) out << f.name << ' ' << f.get(params) << '\n';
}

GroomParams read_params(std::istream& in) {
  GroomParams params;
  std::string line;
  while (std::getline(in, line)) {
    const auto f = fields_of(line);
    if (f.empty()) continue;
    require(f.size() == 2, ErrorCode::parse, "expected 'name value', got '" + line + "'");
    if (f[0] == "seed") {
      params.seed = std::stoull(f[1]);
      continue;
    }
    set_param(params, f[0], parse_number(f[1]));
  }
  return params;
}

void write_spec(std::ostream& out, const RandomSpec& spec) {
  out.precision(17);
  out << "# name distribution min max\n";
  for (const auto& r : spec.ranges)
    out << r.name << ' ' << to_string(r.distribution) << ' ' << r.min << ' ' << r.max << '\n';
}

RandomSpec read_spec(std::istream& in) {
  RandomSpec spec;
  std::string line;
  while (std::getline(in, line)) {
    const auto f = fields_of(line);
    if (f.empty()) continue;
    require(f.size() == 4, ErrorCode::parse, "expected 'name distribution min max', got '" + line + "'");
    spec.ranges.push_back({f[0], parse_distribution(f[1]), parse_number(f[2]), parse_number(f[3])});
  }
  spec.validate();
  return spec;
}

// ---------------------------------------------------------------------------
// Guides and density
// ---------------------------------------------------------------------------

std::vector<std::string_view> guide_style_names() { return {"short", "medium", "long", "swept"}; }

GuideStyle guide_style(std::string_view name) {
  if (name == "short") return {"short", 0.05, 0.6, 0.3, 50};
  if (name == "medium") return {"medium", 0.15, 0.35, 0.15, 50};
  if (name == "long") return {"long", 0.30, 0.25, 0.1, 50};
  if (name == "swept") return {"swept", 0.20, 0.15, 0.4, 50};
  throw Error(ErrorCode::invalid_argument, "unknown guide style '" + std::string(name) + "'");
}

GuideSet make_guides(const ScalpSurface& surface, const GuideStyle& style, std::uint64_t seed) {
  surface.validate();
  require(style.count >= 3, ErrorCode::invalid_argument, "a guide set needs at least 3 guides");
  require(style.length > 0.0, ErrorCode::invalid_argument, "guide length must be positive");
  constexpr double golden_angle = 2.399963229728653;
  constexpr int segments = kStrandPoints - 1;

  GuideSet set;
  for (int j = 0; j < style.count; ++j) {
    Rng rng(hash_combine(seed, j));
    const double rho = 0.47 * std::sqrt((j + 0.5) / style.count);
    const double angle = j * golden_angle;
    const Vec2 uv(0.5 + rho * std::cos(angle), 0.5 + rho * std::sin(angle));
    const RootFrame frame = uv_to_world(surface, uv);

    Vec3 outward(frame.normal.x(), frame.normal.y(), 0.0);
    if (outward.norm() < 1e-3) outward = Vec3(std::cos(angle), std::sin(angle), 0.0);
    outward.normalize();
    const Vec3 fallen = (-Vec3::UnitZ() + style.lift * outward).normalized();

    const double length = style.length * (1.0 + 0.1 * (rng.uniform() - 0.5));
    const double h = length / segments;
    Strand s(kStrandPoints, 3);
    s.row(0) = frame.origin.transpose();
    for (int k = 0; k < segments; ++k) {
      const double b = std::min(1.0, k * h / std::max(style.bend * length, 1e-9));
      const Vec3 dir = ((1.0 - b) * frame.normal + b * fallen).normalized();
      s.row(k + 1) = s.row(k) + h * dir.transpose();
    }
    set.guides.push_back(std::move(s));
  }
  return set;
}

DensityMap make_density(const DensityParams& params, const ScalpMask& mask) {
  const int r = mask.resolution;
  DensityMap d = DensityMap::zeros(r);
  const Vec2 c = params.bald_center;
  for (int y = 0; y < r; ++y)
    for (int x = 0; x < r; ++x) {
      if (!mask.at(x, y)) continue;
      double value = params.baseline;
      if (params.bald_radius > 0.0) {
        // Distance from the disk center to the texel rectangle.
        const double dx = std::max({double(x) / r - c.x(), 0.0, c.x() - double(x + 1) / r});
        const double dy = std::max({double(y) / r - c.y(), 0.0, c.y() - double(y + 1) / r});
        const double edge = std::hypot(dx, dy) - params.bald_radius;
        if (edge <= 0.0)
          value = 0.0;
        else if (params.bald_falloff > 0.0)
          value *= std::min(1.0, edge / params.bald_falloff);
      }
      d.at(x, y) = static_cast<float>(std::clamp(value, 0.0, 1.0));
    }
  return d;
}

// ---------------------------------------------------------------------------
// Interpolation
// ---------------------------------------------------------------------------

Hairstyle interpolate_guides(const GuideSet& guides, const GroomParams& params,
                             const ScalpSurface& surface, const DensityMap& density, Rng& rng) {
  require(!guides.guides.empty(), ErrorCode::invalid_argument, "interpolate_guides: empty guide set");
  params.validate();

  const std::size_t g = guides.guides.size();
  std::vector<Vec2> guide_uv(g);
  std::vector<Strand> local(g);
  for (std::size_t j = 0; j < g; ++j) {
    const Strand& src = guides.guides[j];
    const Strand s = src.rows() == kStrandPoints ? src : resample(src, kStrandPoints);
    guide_uv[j] = world_to_uv(surface, s.row(0).transpose());
    const Mat3 r = uv_to_world(surface, guide_uv[j]).rotation();
    local[j] = (s.rowwise() - s.row(0)) * r;  // rows: R^T (p - p0)
  }

  const ScalpMask mask = make_scalp_mask(density.resolution);
  const auto roots = sample_roots(density, mask, static_cast<std::size_t>(params.strand_count), rng);
  const int k = std::min<int>(params.guide_neighbors, static_cast<int>(g));

  Hairstyle hair;
  hair.strands.resize(roots.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(roots.size()); ++i) {
    const Vec2& uv = roots[i];
    std::vector<std::pair<double, std::size_t>> near(g);
    for (std::size_t j = 0; j < g; ++j) near[j] = {(guide_uv[j] - uv).squaredNorm(), j};
    std::partial_sort(near.begin(), near.begin() + k, near.end());

    Strand shape;
    if (near[0].first == 0.0 || k == 1) {
      shape = local[near[0].second];
    } else {
      double total = 0.0;
      for (int n = 0; n < k; ++n) total += 1.0 / near[n].first;
      shape = Strand::Zero(kStrandPoints, 3);
      for (int n = 0; n < k; ++n) shape += (1.0 / near[n].first / total) * local[near[n].second];
    }
    if (params.length_scale != 1.0) shape *= params.length_scale;

    const RootFrame frame = uv_to_world(surface, uv);
    Strand s = shape * frame.rotation().transpose();
    s.rowwise() += frame.origin.transpose();
    s.row(0) = frame.origin.transpose();
    hair.strands[i] = std::move(s);
  }
  return hair;
}

Hairstyle interpolate_guides(const GuideSet& guides, const GroomParams& params,
                             const ScalpSurface& surface, Rng& rng) {
  return interpolate_guides(guides, params, surface,
                            make_density(params.density, make_scalp_mask()), rng);
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

std::vector<int> clump_assignment(const Hairstyle& hair, const std::vector<int>& centers) {
  std::vector<int> owner(hair.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(hair.size()); ++i) {
    const Eigen::RowVector3d root = hair.strands[i].row(0);
    double best = std::numeric_limits<double>::infinity();
    int best_c = centers.front();
    for (int c : centers) {
      const double d = (hair.strands[c].row(0) - root).squaredNorm();
      if (d < best) {
        best = d;
        best_c = c;
      }
    }
    owner[i] = best_c;
  }
  return owner;
}

Hairstyle clump(const Hairstyle& hair, const ClumpParams& params, Rng& rng) {
  require(params.count >= 1, ErrorCode::invalid_argument, "clump: count must be >= 1");
  const std::uint64_t stream = rng();
  if (params.strength == 0.0 || hair.empty()) return hair;
  validate(hair);

  // Partial Fisher-Yates for distinct center strands.
  const int n = static_cast<int>(hair.size());
  const int count = std::min(params.count, n);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng pick(stream);
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(pick() % static_cast<std::uint64_t>(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<int> centers(order.begin(), order.begin() + count);
  const std::vector<int> owner = clump_assignment(hair, centers);

  const int l = hair.points_per_strand();
  Eigen::VectorXd pull(l);
  for (int i = 0; i < l; ++i)
    pull[i] = params.strength * std::pow(static_cast<double>(i) / l, params.profile);

  Hairstyle out = hair;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t s = 0; s < n; ++s) {
    const Strand& center = hair.strands[owner[s]];
    Strand& p = out.strands[s];
    for (int i = 0; i < l; ++i) p.row(i) = (1.0 - pull[i]) * p.row(i) + pull[i] * center.row(i);
  }
  return out;
}

namespace {

// Unit tangents by central differences; zero-length spans reuse the previous
// tangent.
Strand vertex_tangents(const Strand& s) {
  const Eigen::Index n = s.rows();
  Strand t(n, 3);
  Eigen::RowVector3d last(0.0, 0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::RowVector3d d = s.row(std::min(i + 1, n - 1)) - s.row(std::max<Eigen::Index>(i - 1, 0));
    const double len = d.norm();
    if (len > 0.0) last = d / len;
    t.row(i) = last;
  }
  return t;
}

}  // namespace

Hairstyle curl(const Hairstyle& hair, const CurlParams& params, Rng& rng) {
  const std::uint64_t stream = rng();
  if (params.radius == 0.0 || hair.empty()) return hair;
  validate(hair);

  Hairstyle out = hair;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(hair.size()); ++k) {
    const Strand& s = hair.strands[k];
    Rng local(hash_combine(stream, k));
    const double phase = params.phase + 2.0 * kPi * local.uniform();
    const Strand t = vertex_tangents(s);
    const auto arc = cumulative_length(s);
    const double total = arc[arc.size() - 1];

    // Rotation-minimizing frame transported along the tangents.
    Vec3 normal = Vec3(t.row(0).transpose()).unitOrthogonal();
    Strand& p = out.strands[k];
    for (Eigen::Index i = 1; i < s.rows(); ++i) {
      const Vec3 t0 = t.row(i - 1).transpose(), t1 = t.row(i).transpose();
      normal = Eigen::Quaterniond::FromTwoVectors(t0, t1) * normal;
      normal = (normal - normal.dot(t1) * t1).normalized();
      const Vec3 binormal = t1.cross(normal);
      const double frac = total > 0.0 ? arc[i] / total : 0.0;
      const double r = params.radius * std::pow(frac, params.taper);
      const double a = 2.0 * kPi * params.frequency * arc[i] + phase;
      p.row(i) += (r * (std::cos(a) * normal + std::sin(a) * binormal)).transpose();
    }
  }
  return out;
}

namespace {

double fade(double t) { return t * t * t * (t * (t * 6.0 - 15.0) + 10.0); }

// Random vector inside the unit ball attached to a lattice vertex.
Vec3 lattice_vector(std::uint64_t seed, std::int64_t x, std::int64_t y, std::int64_t z) {
  Rng rng(hash_combine(seed, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y),
                       static_cast<std::uint64_t>(z)));
  for (;;) {
    const Vec3 v(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    if (v.squaredNorm() <= 1.0) return v;
  }
}

// Trilinear blend with quintic fade. The weights are a convex combination, so
// |value| <= 1 everywhere.
Vec3 value_noise(std::uint64_t seed, const Vec3& p) {
  const Vec3 f = p.array().floor();
  const Vec3 t = p - f;
  const std::int64_t x = static_cast<std::int64_t>(f.x()), y = static_cast<std::int64_t>(f.y()),
                     z = static_cast<std::int64_t>(f.z());
  const double u = fade(t.x()), v = fade(t.y()), w = fade(t.z());
  Vec3 acc = Vec3::Zero();
  for (int c = 0; c < 8; ++c) {
    const int dx = c & 1, dy = (c >> 1) & 1, dz = (c >> 2) & 1;
    const double weight = (dx ? u : 1 - u) * (dy ? v : 1 - v) * (dz ? w : 1 - w);
    acc += weight * lattice_vector(seed, x + dx, y + dy, z + dz);
  }
  return acc;
}

}  // namespace

double noise_bound(const NoiseParams& params) {
  double gains = 0.0, g = 1.0;
  for (int o = 0; o < params.octaves; ++o, g *= params.gain) gains += g;
  return params.amplitude * gains;
}

Hairstyle perturb_noise(const Hairstyle& hair, const NoiseParams& params, Rng& rng) {
  const std::uint64_t stream = rng();
  if (params.amplitude == 0.0 || hair.empty()) return hair;
  validate(hair);

  Hairstyle out = hair;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(hair.size()); ++k) {
    const Strand& s = hair.strands[k];
    const std::uint64_t strand_seed = hash_combine(stream, k);
    Rng offsets(strand_seed);
    std::vector<Vec3> shift(params.octaves);
    for (auto& o : shift) o = Vec3(offsets.uniform(0, 1024), offsets.uniform(0, 1024), offsets.uniform(0, 1024));

    const auto arc = cumulative_length(s);
    const double total = arc[arc.size() - 1];
    Strand& p = out.strands[k];
    for (Eigen::Index i = 1; i < s.rows(); ++i) {
      // Ramp from zero at the root to full strength a quarter of the way out.
      const double ramp = total > 0.0 ? std::min(1.0, 4.0 * arc[i] / total) : 0.0;
      Vec3 d = Vec3::Zero();
      double freq = params.frequency, gain = 1.0;
      for (int o = 0; o < params.octaves; ++o, freq *= 2.0, gain *= params.gain)
        d += gain * value_noise(hash_combine(strand_seed, o),
                                freq * Vec3(s.row(i).transpose()) + shift[o]);
      p.row(i) += (params.amplitude * ramp * d).transpose();
    }
  }
  return out;
}

Hairstyle droop(const Hairstyle& hair, double amount) {
  if (amount == 0.0 || hair.empty()) return hair;
  Hairstyle out = hair;
  const Vec3 down = -Vec3::UnitZ();
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(hair.size()); ++k) {
    const Strand& s = hair.strands[k];
    Strand& p = out.strands[k];
    double arc = 0.0;
    for (Eigen::Index i = 0; i + 1 < s.rows(); ++i) {
      Vec3 d = (s.row(i + 1) - s.row(i)).transpose();
      const double len = d.norm();
      arc += len;
      if (len > 0.0) {
        const Vec3 dir = d / len;
        const double to_down = std::acos(std::clamp(dir.dot(down), -1.0, 1.0));
        const double angle = std::min(amount * arc, to_down);
        Vec3 axis = dir.cross(down);
        if (axis.norm() > 1e-12 && angle > 0.0)
          d = Eigen::AngleAxisd(angle, axis.normalized()) * d;
      }
      p.row(i + 1) = p.row(i) + d.transpose();
    }
  }
  return out;
}

Hairstyle shrinkwrap(const Hairstyle& hair, const ScalpSurface& surface, double margin) {
  require(margin >= 0.0, ErrorCode::invalid_argument, "shrinkwrap: margin must be >= 0");
  const double rmin = surface.radii.minCoeff();
  const double target = 1.0 + margin / rmin;  // |q| at signed distance == margin
  const Eigen::Array3d inv_r = surface.radii.array().inverse();

  Hairstyle out = hair;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(hair.size()); ++k) {
    Strand& s = out.strands[k];
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const Vec3 p = s.row(i).transpose();
      if (signed_distance(surface, p) >= margin) continue;
      Vec3 dir = signed_distance_gradient(surface, p);
      dir = dir.norm() > 0.0 ? Vec3(dir.normalized()) : Vec3::UnitZ();
      // |a + t b| = target along the ray p + t dir, in scaled coordinates.
      const Vec3 a = ((p - surface.center).array() * inv_r).matrix();
      const Vec3 b = (dir.array() * inv_r).matrix();
      const double bb = b.squaredNorm(), ab = a.dot(b), cc = a.squaredNorm() - target * target;
      const double t = (-ab + std::sqrt(std::max(ab * ab - bb * cc, 0.0))) / bb;
      s.row(i) = (p + t * dir).transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

GroomSample groom(const GuideSet& base, const GroomParams& params, const ScalpSurface& surface) {
  params.validate();
  surface.validate();
  Rng rng(hash_combine(params.seed, 0x67726f6f6dULL));

  GroomSample out;
  out.params = params;
  out.density = make_density(params.density, make_scalp_mask());
  Hairstyle hair = interpolate_guides(base, params, surface, out.density, rng);
  hair = droop(hair, params.droop);

  // Each round halves the clump size (doubling the count) and scales every
  // intensity by round_decay^round.
  double intensity = 1.0;
  for (int round = 0; round < params.rounds; ++round, intensity *= params.round_decay) {
    ClumpParams c = params.clump;
    c.strength *= intensity;
    c.count = static_cast<int>(std::min<long long>(static_cast<long long>(c.count) << round, params.strand_count));
    CurlParams cu = params.curl;
    cu.radius *= intensity;
    NoiseParams no = params.noise;
    no.amplitude *= intensity;

    hair = clump(hair, c, rng);
    hair = curl(hair, cu, rng);
    hair = perturb_noise(hair, no, rng);
    hair = shrinkwrap(hair, surface, params.margin);
  }
  out.hair = std::move(hair);
  return out;
}

GroomSample generate_sample(const GuideSet& base, const RandomSpec& spec, std::uint64_t seed,
                            const ScalpSurface& surface, const GroomParams& defaults) {
  Rng rng(hash_combine(seed, 0x73706563ULL));
  GroomParams params = draw_params(spec, rng, defaults);
  params.seed = seed;
  return groom(base, params, surface);
}

}  // namespace strandkit
