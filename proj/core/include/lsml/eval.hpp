#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lsml/grid.hpp"

namespace lsml {

struct OverlapCounts {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t intersection = 0;

  std::size_t union_size() const { return a + b - intersection; }
  bool both_empty() const { return a == 0 && b == 0; }
};

/// Throws DimensionError when the masks differ in shape.
OverlapCounts overlap_counts(const BoolMask& a, const BoolMask& b);

/// |a n b| / |a u b|; 1.0 when both masks are empty (check both_empty()).
double jaccard(const BoolMask& a, const BoolMask& b);
double jaccard(const OverlapCounts& c);

/// Dice score, evaluated through dice_from_jaccard so that the identity
/// S = 2J / (1 + J) holds bit for bit.
double dice(const BoolMask& a, const BoolMask& b);

/// 2 |a n b| / (|a| + |b|) straight from the counts.
double dice_from_counts(const OverlapCounts& c);

/// Inverse of J = S / (2 - S). Throws ArgumentError outside [0, 1].
double dice_from_jaccard(double j);

struct ScoreRow {
  std::string id;
  std::string category;
  double jaccard = 0.0;
  double dice = 0.0;
  bool degenerate = false;  ///< both masks empty; excluded from summaries
};

/// Scores one segmentation against its reference.
ScoreRow score(std::string id, std::string category, const BoolMask& segmentation,
               const BoolMask& truth);

struct Stats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation, 0 for a single value
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

/// Linear interpolation between order statistics, p in [0, 100].
double percentile(std::vector<double> values, double p);

Stats summarize(const std::vector<double>& values);

struct Report {
  Stats overall_jaccard;
  Stats overall_dice;
  std::map<std::string, Stats> jaccard_by_category;
  std::map<std::string, Stats> dice_by_category;
  std::size_t degenerate_rows = 0;
};

/// Summary over non-degenerate rows. Throws ArgumentError when empty.
Report report(const std::vector<ScoreRow>& rows);

/// id,category,jaccard,dice
void write_scores_csv(std::ostream& out, const std::vector<ScoreRow>& rows);
/// scope,metric,count,mean,std,median,q1,q3
void write_report_csv(std::ostream& out, const Report& r);
/// iter,mean_jaccard
void write_trace_csv(std::ostream& out, const std::vector<double>& trace);

}  // namespace lsml
