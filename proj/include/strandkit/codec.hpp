#pragma once

#include "strandkit/scalp.hpp"
#include "strandkit/strand.hpp"

#include <functional>
#include <vector>

namespace strandkit {

constexpr int kLatentDim = 64;

using LatentCode = Eigen::Matrix<double, kLatentDim, 1>;

// Linear strand codec. A strand is canonicalized by subtracting its root and
// rotating into the root frame; the remaining L-1 points (3(L-1) scalars) are
// projected onto a principal basis and divided by the per-component standard
// deviation, so latents are roughly unit-variance.
//
// The root row is not part of the representation: decode always puts the
// root exactly at frame.origin.
struct CodecModel {
  int points = kStrandPoints;
  Eigen::VectorXd mean;      // 3(L-1), canonical mean strand without its root
  Eigen::MatrixXd basis;     // 3(L-1) x 64, orthonormal columns
  Eigen::VectorXd scales;    // 64, positive and non-increasing
  Eigen::VectorXd variance;  // 64, raw principal variances (may be ~0)

  int feature_size() const { return 3 * (points - 1); }
  void validate() const;
};

// Scales below this fraction of the leading scale are raised to it, which
// keeps the latent round trip well conditioned for rank-deficient corpora.
constexpr double kScaleFloor = 1e-6;

// Canonical strand in the given root frame, flattened without the root row.
Eigen::VectorXd canonicalize(const Strand& strand, const RootFrame& frame);
Strand uncanonicalize(const Eigen::VectorXd& features, const RootFrame& frame, int points);

// Root frame of a world-space strand: the chart frame at its root's uv.
RootFrame root_frame(const ScalpSurface& surface, const Strand& strand);

CodecModel fit_codec(const std::vector<Strand>& corpus, const ScalpSurface& surface);

LatentCode encode(const CodecModel& model, const Strand& strand, const RootFrame& frame);
Strand decode(const CodecModel& model, const LatentCode& z, const RootFrame& frame);

// Canonical-frame decode (identity frame at the origin).
Strand decode_local(const CodecModel& model, const LatentCode& z);

using ChannelWeights = Eigen::Matrix<double, kLatentDim, 1>;

// Unnormalized perturbation weights: loss(decode(0), decode(eps * e_i)) for
// each channel, measured in the canonical frame.
ChannelWeights raw_channel_weights(const std::function<Strand(const LatentCode&)>& decoder,
                                   const LossConfig& cfg, double epsilon);

ChannelWeights channel_weights(const CodecModel& model, const LossConfig& cfg = {},
                               double epsilon = 0.8);

}  // namespace strandkit
