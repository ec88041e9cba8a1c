#include "strandkit/codec.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace strandkit {

void CodecModel::validate() const {
  const Eigen::Index f = feature_size();
  require(points >= 3, ErrorCode::sizing, "codec: strands need at least 3 points");
  require(mean.size() == f && basis.rows() == f && basis.cols() == kLatentDim &&
              scales.size() == kLatentDim && variance.size() == kLatentDim,
          ErrorCode::sizing, "codec: inconsistent model dimensions");
  require((scales.array() > 0.0).all(), ErrorCode::degenerate, "codec: scales must be positive");
}

Eigen::VectorXd canonicalize(const Strand& strand, const RootFrame& frame) {
  const Eigen::Index n = strand.rows();
  StrandT<double> local = (strand.bottomRows(n - 1).rowwise() - strand.row(0)) * frame.rotation();
  return Eigen::Map<const Eigen::VectorXd>(local.data(), local.size());
}

Strand uncanonicalize(const Eigen::VectorXd& features, const RootFrame& frame, int points) {
  Strand s(points, 3);
  s.row(0) = frame.origin.transpose();
  const Eigen::Map<const StrandT<double>> local(features.data(), points - 1, 3);
  s.bottomRows(points - 1) = local * frame.rotation().transpose();
  s.bottomRows(points - 1).rowwise() += frame.origin.transpose();
  return s;
}

RootFrame root_frame(const ScalpSurface& surface, const Strand& strand) {
  return uv_to_world(surface, world_to_uv(surface, strand.row(0).transpose()));
}

CodecModel fit_codec(const std::vector<Strand>& corpus, const ScalpSurface& surface) {
  require(corpus.size() > kLatentDim, ErrorCode::sizing,
          "fit_codec: need at least " + std::to_string(kLatentDim + 1) + " strands, got " +
              std::to_string(corpus.size()));
  const int points = static_cast<int>(corpus.front().rows());
  require(points >= 3, ErrorCode::sizing, "fit_codec: strands need at least 3 points");

  const Eigen::Index f = 3 * (points - 1);
  const Eigen::Index n = static_cast<Eigen::Index>(corpus.size());
  Eigen::MatrixXd data(f, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Strand& s = corpus[j];
    require(s.rows() == points, ErrorCode::sizing, "fit_codec: corpus strands differ in length");
    data.col(j) = canonicalize(s, root_frame(surface, s));
  }

  CodecModel model;
  model.points = points;
  model.mean = data.rowwise().mean();
  data.colwise() -= model.mean;
  const Eigen::MatrixXd cov = (data * data.transpose()) / static_cast<double>(n);

  // Eigenvalues come back ascending; take the top block in reverse.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  require(eig.info() == Eigen::Success, ErrorCode::degenerate, "fit_codec: eigen decomposition failed");
  model.basis = eig.eigenvectors().rightCols(kLatentDim).rowwise().reverse();
  model.variance = eig.eigenvalues().tail(kLatentDim).reverse().cwiseMax(0.0);

  // Rounding in the mean leaves ~1e-18 of spread in a constant corpus.
  const double lead = std::sqrt(model.variance[0]);
  const double magnitude = std::max(model.mean.cwiseAbs().maxCoeff(), 1e-300);
  require(lead > 1e-12 * magnitude && std::isfinite(lead), ErrorCode::degenerate,
          "fit_codec: corpus has zero variance");
  model.scales = model.variance.cwiseSqrt().cwiseMax(kScaleFloor * lead);
  return model;
}

LatentCode encode(const CodecModel& model, const Strand& strand, const RootFrame& frame) {
  require(strand.rows() == model.points, ErrorCode::sizing,
          "encode: strand has " + std::to_string(strand.rows()) + " points, codec expects " +
              std::to_string(model.points));
  const Eigen::VectorXd x = canonicalize(strand, frame) - model.mean;
  return (model.basis.transpose() * x).cwiseQuotient(model.scales);
}

Strand decode(const CodecModel& model, const LatentCode& z, const RootFrame& frame) {
  const Eigen::VectorXd x = model.mean + model.basis * z.cwiseProduct(model.scales);
  return uncanonicalize(x, frame, model.points);
}

Strand decode_local(const CodecModel& model, const LatentCode& z) {
  return decode(model, z, RootFrame{});
}

ChannelWeights raw_channel_weights(const std::function<Strand(const LatentCode&)>& decoder,
                                   const LossConfig& cfg, double epsilon) {
  require(epsilon > 0.0, ErrorCode::invalid_argument, "channel_weights: epsilon must be > 0");
  const Strand mean = decoder(LatentCode::Zero());
  ChannelWeights w;
  for (int i = 0; i < kLatentDim; ++i)
    w[i] = strand_data_loss(mean, decoder(epsilon * LatentCode::Unit(i)), cfg);
  return w;
}

ChannelWeights channel_weights(const CodecModel& model, const LossConfig& cfg, double epsilon) {
  const ChannelWeights raw = raw_channel_weights(
      [&model](const LatentCode& z) { return decode_local(model, z); }, cfg, epsilon);
  const double total = raw.sum();
  require(total > 0.0 && std::isfinite(total), ErrorCode::degenerate,
          "channel_weights: all perturbation weights are zero");
  return raw / total;
}

}  // namespace strandkit
