#pragma once

#include "strandkit/strand.hpp"

#include <iosfwd>
#include <vector>

namespace strandkit {

// Point samples are in millimeters; directions are unit tangents.
struct PointSamples {
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> positions;
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> directions;

  Eigen::Index size() const { return positions.rows(); }
};

struct ThresholdPair {
  double distance_mm = 0.0;
  double angle_deg = 0.0;

  bool operator==(const ThresholdPair&) const = default;
};

inline std::vector<ThresholdPair> default_thresholds() { return {{2, 20}, {3, 30}, {4, 40}}; }

struct ThresholdScore {
  ThresholdPair threshold;
  double precision = 0.0;  // percent
  double recall = 0.0;
  double f_score = 0.0;

  bool operator==(const ThresholdScore&) const = default;
};

struct MetricsReport {
  std::vector<ThresholdScore> scores;

  bool operator==(const MetricsReport&) const = default;
};

struct MatchOptions {
  // Treat d and -d as the same direction.
  bool unsigned_directions = false;
  // Greedy one-to-one matching (nearest unmatched partner, ties by index)
  // instead of any-match.
  bool one_to_one = false;
  bool parallel = true;
};

// Resamples every strand (meters) at uniform arc-length spacing given in
// millimeters. A strand of length len yields floor(len / spacing) + 1 samples.
PointSamples point_samples(const Hairstyle& hair, double spacing_mm);

// Grid-accelerated matcher (cell size = distance threshold).
MetricsReport precision_recall_f(const PointSamples& pred, const PointSamples& gt,
                                 const std::vector<ThresholdPair>& thresholds = default_thresholds(),
                                 const MatchOptions& options = {});

// Quadratic reference implementation of the same rule.
MetricsReport brute_force_prf(const PointSamples& pred, const PointSamples& gt,
                              const std::vector<ThresholdPair>& thresholds = default_thresholds(),
                              const MatchOptions& options = {});

// One direction of the any-match rule: how many `queries` have a partner in
// `targets`. `brute_force` selects the quadratic scan.
Eigen::Index count_matched(const PointSamples& queries, const PointSamples& targets,
                           const ThresholdPair& threshold, const MatchOptions& options = {},
                           bool brute_force = false);

double f_score(double precision, double recall);

// Table layout (one column per threshold, rows Precision / Recall / F-score).
void print_report(std::ostream& out, const MetricsReport& report);
// Columns: threshold_mm, threshold_deg, precision, recall, fscore.
void write_report_csv(std::ostream& out, const MetricsReport& report);

}  // namespace strandkit
