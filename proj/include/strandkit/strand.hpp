#pragma once

#include "strandkit/common.hpp"

#include <cmath>
#include <vector>

namespace strandkit {

constexpr int kStrandPoints = 256;

// A strand is an L x 3 row-major block of positions in meters, root first.
// Row-major so that a strand flattens to interleaved xyz without copying.
template <typename Scalar>
using StrandT = Eigen::Matrix<Scalar, Eigen::Dynamic, 3, Eigen::RowMajor>;
using Strand = StrandT<double>;

template <typename Scalar>
struct StrandDerivativesT {
  StrandT<Scalar> directions;  // L-1 rows, p[i+1] - p[i]
  StrandT<Scalar> curvatures;  // L-2 rows, d[i+1] - d[i]
};
using StrandDerivatives = StrandDerivativesT<double>;

struct Hairstyle {
  std::vector<Strand> strands;

  std::size_t size() const { return strands.size(); }
  bool empty() const { return strands.empty(); }
  int points_per_strand() const {
    return strands.empty() ? 0 : static_cast<int>(strands.front().rows());
  }
};

// Throws unless the hairstyle is non-empty, uniform in L, and finite.
void validate(const Hairstyle& hair);

struct LossConfig {
  double lambda_dir = 2e-3;
  double lambda_cur = 7.8e-2;
  // Kept for configuration parity with variational codecs; the linear codec
  // has no KL term.
  double lambda_kl = 6e-4;
  // Divide each term by its element count instead of summing.
  bool average = false;
};

template <typename Scalar>
StrandDerivativesT<Scalar> derivatives(const StrandT<Scalar>& strand) {
  const Eigen::Index n = strand.rows();
  require(n >= 3, ErrorCode::sizing,
          "derivatives: strand needs at least 3 points, got " + std::to_string(n));
  StrandDerivativesT<Scalar> out;
  out.directions = strand.bottomRows(n - 1) - strand.topRows(n - 1);
  out.curvatures = out.directions.bottomRows(n - 2) - out.directions.topRows(n - 2);
  return out;
}

template <typename Scalar>
Scalar arc_length(const StrandT<Scalar>& strand) {
  if (strand.rows() < 2) return Scalar(0);
  const Eigen::Index n = strand.rows();
  return (strand.bottomRows(n - 1) - strand.topRows(n - 1)).rowwise().norm().sum();
}

// Cumulative arc length at each vertex; first entry 0.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cumulative_length(const StrandT<Scalar>& strand) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s(strand.rows());
  if (strand.rows() == 0) return s;
  s[0] = Scalar(0);
  for (Eigen::Index i = 1; i < strand.rows(); ++i)
    s[i] = s[i - 1] + (strand.row(i) - strand.row(i - 1)).norm();
  return s;
}

// Linear resampling to `target_count` points equally spaced in arc length.
// Endpoints are copied, not interpolated.
template <typename Scalar>
StrandT<Scalar> resample(const StrandT<Scalar>& strand, int target_count) {
  require(strand.rows() >= 2, ErrorCode::sizing, "resample: strand needs at least 2 points");
  require(target_count >= 2, ErrorCode::invalid_argument, "resample: target_count must be >= 2");
  const auto s = cumulative_length(strand);
  const Scalar total = s[s.size() - 1];
  require(total > Scalar(0), ErrorCode::degenerate, "resample: zero-length strand");

  const Eigen::Index last = strand.rows() - 1;
  StrandT<Scalar> out(target_count, 3);
  out.row(0) = strand.row(0);
  out.row(target_count - 1) = strand.row(last);
  Eigen::Index seg = 0;
  for (int k = 1; k + 1 < target_count; ++k) {
    const Scalar target = total * Scalar(k) / Scalar(target_count - 1);
    while (seg + 1 < last && s[seg + 1] < target) ++seg;
    const Scalar len = s[seg + 1] - s[seg];
    const Scalar t = len > Scalar(0) ? (target - s[seg]) / len : Scalar(0);
    out.row(k) = strand.row(seg) + t * (strand.row(seg + 1) - strand.row(seg));
  }
  return out;
}

// Positional + weighted directional + weighted curvature L1 distance.
template <typename Scalar>
Scalar strand_data_loss(const StrandT<Scalar>& gt, const StrandT<Scalar>& pred,
                        const LossConfig& cfg = {}) {
  require(gt.rows() == pred.rows(), ErrorCode::sizing,
          "strand_data_loss: point count mismatch (" + std::to_string(gt.rows()) + " vs " +
              std::to_string(pred.rows()) + ")");
  require(gt.rows() >= 3, ErrorCode::sizing, "strand_data_loss: strands need at least 3 points");
  const StrandT<Scalar> diff = pred - gt;
  const Eigen::Index n = diff.rows();
  // Differences commute with the forward-difference operators, so the
  // derivative terms can be taken on the residual directly.
  const StrandT<Scalar> d = diff.bottomRows(n - 1) - diff.topRows(n - 1);
  const StrandT<Scalar> k = d.bottomRows(n - 2) - d.topRows(n - 2);
  Scalar pos = diff.cwiseAbs().sum();
  Scalar dir = d.cwiseAbs().sum();
  Scalar cur = k.cwiseAbs().sum();
  if (cfg.average) {
    pos /= Scalar(n);
    dir /= Scalar(n - 1);
    cur /= Scalar(n - 2);
  }
  return pos + Scalar(cfg.lambda_dir) * dir + Scalar(cfg.lambda_cur) * cur;
}

}  // namespace strandkit
