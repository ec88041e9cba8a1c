#pragma once

#include "strandkit/density.hpp"
#include "strandkit/scalp.hpp"
#include "strandkit/strand.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace strandkit {

struct GuideSet {
  std::vector<Strand> guides;
};

struct ClumpParams {
  int count = 150;
  double strength = 0.5;  // in [0, 1]
  double profile = 1.5;   // pull fraction grows as (i/L)^profile
};

struct CurlParams {
  double radius = 0.0;      // meters
  double frequency = 20.0;  // turns per meter of arc length
  double phase = 0.0;       // radians, added to a per-strand random phase
  double taper = 0.3;       // radius grows as (s/S)^taper from the root
};

struct NoiseParams {
  double amplitude = 0.0;   // meters
  double frequency = 30.0;  // lattice cells per meter
  int octaves = 3;
  double gain = 0.5;        // amplitude ratio between consecutive octaves
};

struct DensityParams {
  double baseline = 1.0;  // in (0, 1]
  Vec2 bald_center = Vec2(0.5, 0.5);
  double bald_radius = 0.0;   // uv units; texels touching the disk get density 0
  double bald_falloff = 0.05; // uv width of the ramp back up to baseline
};

struct GroomParams {
  int strand_count = 10000;
  int guide_neighbors = 3;
  double length_scale = 1.0;  // in (0, 2]
  ClumpParams clump;
  CurlParams curl;
  NoiseParams noise;
  DensityParams density;
  double droop = 0.0;  // radians of bend toward -z per meter of arc length
  int rounds = 2;
  double round_decay = 0.5;
  double margin = 1e-3;  // shrinkwrap margin, meters
  std::uint64_t seed = 0;

  void validate() const;
};

// Flat name/value view over GroomParams, used by the text formats and by
// RandomSpec. Integer-valued parameters round to nearest.
std::vector<std::string_view> groom_param_names();
double get_param(const GroomParams& params, std::string_view name);
void set_param(GroomParams& params, std::string_view name, double value);

enum class Distribution { fixed, uniform, log_uniform };

struct RandomRange {
  std::string name;
  Distribution distribution = Distribution::uniform;
  double min = 0.0;
  double max = 0.0;
};

struct RandomSpec {
  std::vector<RandomRange> ranges;

  void validate() const;
  static RandomSpec defaults();
};

// Draws every range in order from `rng` on top of `base`.
GroomParams draw_params(const RandomSpec& spec, Rng& rng, GroomParams base = {});

// Text formats: one parameter per line. GroomParams lines are `name value`;
// RandomSpec lines are `name distribution min max`. '#' starts a comment.
void write_params(std::ostream& out, const GroomParams& params);
GroomParams read_params(std::istream& in);
void write_spec(std::ostream& out, const RandomSpec& spec);
RandomSpec read_spec(std::istream& in);

// Built-in base hairstyles. Roots on a Fibonacci spiral over the cap; strands
// leave along the normal and bend toward -z over `bend` of their length.
struct GuideStyle {
  std::string name = "medium";
  double length = 0.15;
  double bend = 0.35;
  double lift = 0.15;  // outward component kept after bending
  int count = 50;
};
GuideStyle guide_style(std::string_view name);
std::vector<std::string_view> guide_style_names();
GuideSet make_guides(const ScalpSurface& surface, const GuideStyle& style, std::uint64_t seed = 0);

DensityMap make_density(const DensityParams& params, const ScalpMask& mask);

// Dense strands from sparse guides: roots drawn from `density`, shapes blended
// by inverse squared uv distance over the k nearest guides in root-local frames.
Hairstyle interpolate_guides(const GuideSet& guides, const GroomParams& params,
                             const ScalpSurface& surface, const DensityMap& density, Rng& rng);
Hairstyle interpolate_guides(const GuideSet& guides, const GroomParams& params,
                             const ScalpSurface& surface, Rng& rng);

Hairstyle clump(const Hairstyle& hair, const ClumpParams& params, Rng& rng);
Hairstyle curl(const Hairstyle& hair, const CurlParams& params, Rng& rng);
Hairstyle perturb_noise(const Hairstyle& hair, const NoiseParams& params, Rng& rng);
Hairstyle droop(const Hairstyle& hair, double amount);
Hairstyle shrinkwrap(const Hairstyle& hair, const ScalpSurface& surface, double margin);

// Upper bound on |displacement| produced by perturb_noise.
double noise_bound(const NoiseParams& params);

// Index of the clump center each strand was assigned to, for testing.
std::vector<int> clump_assignment(const Hairstyle& hair, const std::vector<int>& centers);

struct GroomSample {
  Hairstyle hair;
  GroomParams params;
  DensityMap density;
};

GroomSample generate_sample(const GuideSet& base, const RandomSpec& spec, std::uint64_t seed,
                            const ScalpSurface& surface = {},
                            const GroomParams& defaults = {});

// Runs the operator stack for already-drawn parameters.
GroomSample groom(const GuideSet& base, const GroomParams& params, const ScalpSurface& surface = {});

}  // namespace strandkit
