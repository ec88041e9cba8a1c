#include "strandkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace strandkit {

PointSamples point_samples(const Hairstyle& hair, double spacing_mm) {
  require(spacing_mm > 0.0, ErrorCode::invalid_argument, "point_samples: spacing must be positive");
  std::vector<Eigen::Index> counts(hair.size());
  std::vector<Eigen::VectorXd> arcs(hair.size());
  Eigen::Index total = 0;
  for (std::size_t k = 0; k < hair.size(); ++k) {
    arcs[k] = 1000.0 * cumulative_length(hair.strands[k]);
    const double len = arcs[k].size() ? arcs[k][arcs[k].size() - 1] : 0.0;
    // The epsilon absorbs meter -> millimeter rounding (0.1 m * 1000 may land
    // just below 100).
    counts[k] = static_cast<Eigen::Index>(std::floor(len / spacing_mm + 1e-9)) + 1;
    total += counts[k];
  }

  PointSamples out;
  out.positions.resize(total, 3);
  out.directions.resize(total, 3);
  Eigen::Index row = 0;
  for (std::size_t k = 0; k < hair.size(); ++k) {
    const StrandT<double> p = 1000.0 * hair.strands[k];
    const Eigen::VectorXd& s = arcs[k];
    const Eigen::Index n = p.rows();

    // Vertex tangents: central differences, second-order one-sided at the ends.
    StrandT<double> t(n, 3);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::RowVector3d d = p.row(std::min(i + 1, n - 1)) - p.row(std::max<Eigen::Index>(i - 1, 0));
      if (n >= 3 && i == 0) d = -3.0 * p.row(0) + 4.0 * p.row(1) - p.row(2);
      if (n >= 3 && i == n - 1) d = 3.0 * p.row(n - 1) - 4.0 * p.row(n - 2) + p.row(n - 3);
      const double len = d.norm();
      t.row(i) = len > 0.0 ? Eigen::RowVector3d(d / len) : Eigen::RowVector3d(0.0, 0.0, 1.0);
    }

    Eigen::Index seg = 0;
    const double len = s[n - 1];
    for (Eigen::Index j = 0; j < counts[k]; ++j, ++row) {
      const double target = std::min(j * spacing_mm, len);
      while (seg + 2 < n && s[seg + 1] < target) ++seg;
      if (n == 1) {
        out.positions.row(row) = p.row(0);
        out.directions.row(row) = t.row(0);
        continue;
      }
      const double span = s[seg + 1] - s[seg];
      const double a = span > 0.0 ? std::clamp((target - s[seg]) / span, 0.0, 1.0) : 0.0;
      out.positions.row(row) = p.row(seg) + a * (p.row(seg + 1) - p.row(seg));
      Eigen::RowVector3d dir = (1.0 - a) * t.row(seg) + a * t.row(seg + 1);
      if (dir.norm() == 0.0) dir = p.row(seg + 1) - p.row(seg);
      out.directions.row(row) = dir.norm() > 0.0 ? Eigen::RowVector3d(dir.normalized())
                                                 : Eigen::RowVector3d(0.0, 0.0, 1.0);
    }
  }
  return out;
}

double f_score(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

struct Rule {
  double max_d2;
  double min_cos;
  bool unsigned_dirs;

  Rule(const ThresholdPair& t, const MatchOptions& o)
      : max_d2(t.distance_mm * t.distance_mm),
        min_cos(std::cos(t.angle_deg * kPi / 180.0)),
        unsigned_dirs(o.unsigned_directions) {}

  // Shared by the grid and the brute-force paths so both agree bit for bit.
  bool operator()(const PointSamples& a, Eigen::Index i, const PointSamples& b, Eigen::Index j,
                  double* d2_out = nullptr) const {
    const double dx = a.positions(i, 0) - b.positions(j, 0);
    const double dy = a.positions(i, 1) - b.positions(j, 1);
    const double dz = a.positions(i, 2) - b.positions(j, 2);
    const double d2 = dx * dx + dy * dy + dz * dz;
    if (d2 > max_d2) return false;
    double c = a.directions(i, 0) * b.directions(j, 0) + a.directions(i, 1) * b.directions(j, 1) +
               a.directions(i, 2) * b.directions(j, 2);
    if (unsigned_dirs) c = std::abs(c);
    if (c < min_cos) return false;
    if (d2_out) *d2_out = d2;
    return true;
  }
};

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    return static_cast<std::size_t>(hash_combine(static_cast<std::uint64_t>(k.x),
                                                 static_cast<std::uint64_t>(k.y),
                                                 static_cast<std::uint64_t>(k.z)));
  }
};

// Uniform grid over one point set. Points are stored cell-contiguously.
class Grid {
 public:
  Grid(const PointSamples& points, double cell) : inv_cell_(1.0 / cell) {
    const Eigen::Index n = points.size();
    std::vector<std::pair<CellKey, Eigen::Index>> keyed(n);
    for (Eigen::Index i = 0; i < n; ++i) keyed[i] = {key(points.positions.row(i)), i};
    std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
      return std::tie(a.first.x, a.first.y, a.first.z, a.second) <
             std::tie(b.first.x, b.first.y, b.first.z, b.second);
    });
    order_.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      order_[i] = keyed[i].second;
      auto [it, inserted] = cells_.try_emplace(keyed[i].first, i, i + 1);
      if (!inserted) it->second.second = i + 1;
    }
  }

  template <typename Fn>
  bool visit_neighbors(const Eigen::RowVector3d& p, Fn&& fn) const {
    const CellKey c = key(p);
    for (std::int64_t dz = -1; dz <= 1; ++dz)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dx = -1; dx <= 1; ++dx) {
          const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (Eigen::Index k = it->second.first; k < it->second.second; ++k)
            if (fn(order_[k])) return true;
        }
    return false;
  }

 private:
  CellKey key(const Eigen::RowVector3d& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() * inv_cell_)),
            static_cast<std::int64_t>(std::floor(p.y() * inv_cell_)),
            static_cast<std::int64_t>(std::floor(p.z() * inv_cell_))};
  }

  double inv_cell_;
  std::vector<Eigen::Index> order_;
  std::unordered_map<CellKey, std::pair<Eigen::Index, Eigen::Index>, CellHash> cells_;
};

Eigen::Index count_any_matches(const PointSamples& queries, const PointSamples& targets,
                               const Rule& rule, const Grid* grid, bool parallel) {
  const Eigen::Index n = queries.size();
  Eigen::Index matched = 0;
#pragma omp parallel for schedule(dynamic, 1024) reduction(+ : matched) if (parallel)
  for (Eigen::Index i = 0; i < n; ++i) {
    bool hit = false;
    if (grid) {
      hit = grid->visit_neighbors(queries.positions.row(i),
                                  [&](Eigen::Index j) { return rule(queries, i, targets, j); });
    } else {
      for (Eigen::Index j = 0; j < targets.size() && !hit; ++j) hit = rule(queries, i, targets, j);
    }
    matched += hit ? 1 : 0;
  }
  return matched;
}

// Greedy one-to-one: each query in index order takes the nearest unmatched
// target (ties broken by index).
Eigen::Index count_greedy_matches(const PointSamples& queries, const PointSamples& targets,
                                  const Rule& rule, const Grid* grid) {
  std::vector<std::uint8_t> used(static_cast<std::size_t>(targets.size()), 0);
  Eigen::Index matched = 0;
  for (Eigen::Index i = 0; i < queries.size(); ++i) {
    double best_d2 = std::numeric_limits<double>::infinity();
    Eigen::Index best = -1;
    auto consider = [&](Eigen::Index j) {
      double d2 = 0.0;
      if (!used[j] && rule(queries, i, targets, j, &d2) && (d2 < best_d2 || (d2 == best_d2 && j < best))) {
        best_d2 = d2;
        best = j;
      }
      return false;
    };
    if (grid)
      grid->visit_neighbors(queries.positions.row(i), consider);
    else
      for (Eigen::Index j = 0; j < targets.size(); ++j) consider(j);
    if (best >= 0) {
      used[best] = 1;
      ++matched;
    }
  }
  return matched;
}

MetricsReport evaluate(const PointSamples& pred, const PointSamples& gt,
                       const std::vector<ThresholdPair>& thresholds, const MatchOptions& options,
                       bool use_grid) {
  require(pred.size() > 0 && gt.size() > 0, ErrorCode::invalid_argument,
          "precision/recall: both point sets must be non-empty");
  MetricsReport report;
  for (const auto& t : thresholds) {
    require(t.distance_mm > 0.0 && t.angle_deg > 0.0, ErrorCode::invalid_argument,
            "precision/recall: thresholds must be positive");
    const Rule rule(t, options);
    // Slightly oversized cells so rounding in floor() can never hide a
    // partner that is within the distance threshold.
    const double cell = t.distance_mm * (1.0 + 1e-9);
    std::optional<Grid> gt_grid, pred_grid;
    if (use_grid) {
      gt_grid.emplace(gt, cell);
      pred_grid.emplace(pred, cell);
    }
    const Grid* gg = gt_grid ? &*gt_grid : nullptr;
    const Grid* pg = pred_grid ? &*pred_grid : nullptr;

    Eigen::Index matched_pred = 0, matched_gt = 0;
    if (options.one_to_one) {
      matched_pred = matched_gt = count_greedy_matches(pred, gt, rule, gg);
    } else {
      matched_pred = count_any_matches(pred, gt, rule, gg, options.parallel);
      matched_gt = count_any_matches(gt, pred, rule, pg, options.parallel);
    }
    ThresholdScore s;
    s.threshold = t;
    s.precision = 100.0 * static_cast<double>(matched_pred) / static_cast<double>(pred.size());
    s.recall = 100.0 * static_cast<double>(matched_gt) / static_cast<double>(gt.size());
    s.f_score = f_score(s.precision, s.recall);
    report.scores.push_back(s);
  }
  return report;
}

}  // namespace

MetricsReport precision_recall_f(const PointSamples& pred, const PointSamples& gt,
                                 const std::vector<ThresholdPair>& thresholds,
                                 const MatchOptions& options) {
  return evaluate(pred, gt, thresholds, options, true);
}

MetricsReport brute_force_prf(const PointSamples& pred, const PointSamples& gt,
                              const std::vector<ThresholdPair>& thresholds,
                              const MatchOptions& options) {
  return evaluate(pred, gt, thresholds, options, false);
}

Eigen::Index count_matched(const PointSamples& queries, const PointSamples& targets,
                           const ThresholdPair& threshold, const MatchOptions& options,
                           bool brute_force) {
  require(threshold.distance_mm > 0.0 && threshold.angle_deg > 0.0, ErrorCode::invalid_argument,
          "count_matched: thresholds must be positive");
  const Rule rule(threshold, options);
  if (brute_force) return count_any_matches(queries, targets, rule, nullptr, options.parallel);
  const Grid grid(targets, threshold.distance_mm * (1.0 + 1e-9));
  return count_any_matches(queries, targets, rule, &grid, options.parallel);
}

void print_report(std::ostream& out, const MetricsReport& report) {
  out << std::left << std::setw(12) << "mm / deg";
  for (const auto& s : report.scores) {
    std::ostringstream label;
    label << s.threshold.distance_mm << '/' << s.threshold.angle_deg;
    out << " | " << std::right << std::setw(8) << label.str();
  }
  out << '\n';
  auto row = [&](const char* name, auto field) {
    out << std::left << std::setw(12) << name;
    for (const auto& s : report.scores)
      out << " | " << std::right << std::setw(8) << std::fixed << std::setprecision(2) << field(s);
    out << '\n';
  };
  row("Precision", [](const ThresholdScore& s) { return s.precision; });
  row("Recall", [](const ThresholdScore& s) { return s.recall; });
  row("F-score", [](const ThresholdScore& s) { return s.f_score; });
  out.unsetf(std::ios::fixed);
}

void write_report_csv(std::ostream& out, const MetricsReport& report) {
  out << "threshold_mm,threshold_deg,precision,recall,fscore\n";
  out << std::setprecision(10);
  for (const auto& s : report.scores)
    out << s.threshold.distance_mm << ',' << s.threshold.angle_deg << ',' << s.precision << ','
        << s.recall << ',' << s.f_score << '\n';
}

}  // namespace strandkit
