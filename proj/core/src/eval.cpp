#include "lsml/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace lsml {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_stats(std::ostream& out, const std::string& scope, const char* metric, const Stats& s) {
  out << scope << ',' << metric << ',' << s.count << ',' << fmt(s.mean) << ',' << fmt(s.std)
      << ',' << fmt(s.median) << ',' << fmt(s.q1) << ',' << fmt(s.q3) << '\n';
}

}  // namespace

OverlapCounts overlap_counts(const BoolMask& a, const BoolMask& b) {
  if (a.dims() != b.dims()) throw DimensionError("overlap: mask dimensions differ");
  OverlapCounts c;
  for (std::size_t n = 0; n < a.size(); ++n) {
    const bool x = a[n] != 0;
    const bool y = b[n] != 0;
    c.a += x;
    c.b += y;
    c.intersection += x && y;
  }
  return c;
}

double jaccard(const OverlapCounts& c) {
  if (c.both_empty()) return 1.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.union_size());
}

double jaccard(const BoolMask& a, const BoolMask& b) { return jaccard(overlap_counts(a, b)); }

double dice_from_jaccard(double j) {
  if (!(j >= 0.0 && j <= 1.0)) throw ArgumentError("dice_from_jaccard: score outside [0, 1]");
  return 2.0 * j / (1.0 + j);
}

double dice(const BoolMask& a, const BoolMask& b) { return dice_from_jaccard(jaccard(a, b)); }

double dice_from_counts(const OverlapCounts& c) {
  if (c.both_empty()) return 1.0;
  return 2.0 * static_cast<double>(c.intersection) / static_cast<double>(c.a + c.b);
}

ScoreRow score(std::string id, std::string category, const BoolMask& segmentation,
               const BoolMask& truth) {
  const OverlapCounts c = overlap_counts(segmentation, truth);
  ScoreRow row;
  row.id = std::move(id);
  row.category = std::move(category);
  row.jaccard = jaccard(c);
  row.dice = dice_from_jaccard(row.jaccard);
  row.degenerate = c.both_empty();
  return row;
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ArgumentError("percentile of an empty sample");
  if (!(p >= 0.0 && p <= 100.0)) throw ArgumentError("percentile must be in [0, 100]");
  std::sort(values.begin(), values.end());
  const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + (values[hi] - values[lo]) * frac;
}

Stats summarize(const std::vector<double>& values) {
  Stats s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  s.median = percentile(values, 50.0);
  s.q1 = percentile(values, 25.0);
  s.q3 = percentile(values, 75.0);
  return s;
}

Report report(const std::vector<ScoreRow>& rows) {
  if (rows.empty()) throw ArgumentError("report: no rows");
  Report r;
  std::vector<double> j;
  std::vector<double> d;
  std::map<std::string, std::vector<double>> jc;
  std::map<std::string, std::vector<double>> dc;
  for (const ScoreRow& row : rows) {
    if (row.degenerate) {
      ++r.degenerate_rows;
      continue;
    }
    j.push_back(row.jaccard);
    d.push_back(row.dice);
    jc[row.category].push_back(row.jaccard);
    dc[row.category].push_back(row.dice);
  }
  r.overall_jaccard = summarize(j);
  r.overall_dice = summarize(d);
  for (const auto& [cat, v] : jc) r.jaccard_by_category[cat] = summarize(v);
  for (const auto& [cat, v] : dc) r.dice_by_category[cat] = summarize(v);
  return r;
}

void write_scores_csv(std::ostream& out, const std::vector<ScoreRow>& rows) {
  out << "id,category,jaccard,dice\n";
  for (const ScoreRow& row : rows) {
    out << row.id << ',' << row.category << ',' << fmt(row.jaccard) << ',' << fmt(row.dice)
        << '\n';
  }
}

void write_report_csv(std::ostream& out, const Report& r) {
  out << "scope,metric,count,mean,std,median,q1,q3\n";
  write_stats(out, "all", "jaccard", r.overall_jaccard);
  write_stats(out, "all", "dice", r.overall_dice);
  for (const auto& [cat, s] : r.jaccard_by_category) write_stats(out, cat, "jaccard", s);
  for (const auto& [cat, s] : r.dice_by_category) write_stats(out, cat, "dice", s);
}

void write_trace_csv(std::ostream& out, const std::vector<double>& trace) {
  out << "iter,mean_jaccard\n";
  for (std::size_t n = 0; n < trace.size(); ++n) out << n << ',' << fmt(trace[n]) << '\n';
}

}  // namespace lsml
