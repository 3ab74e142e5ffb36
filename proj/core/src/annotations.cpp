#include "lsml/annotations.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lsml/eval.hpp"
#include "lsml/rng.hpp"

namespace lsml {

namespace {

using Point2 = std::array<double, 2>;

constexpr double kOnEdgeTol = 1e-12;
constexpr double kTauFloor = 1e-9;

bool on_segment(const Point2& p, const Point2& a, const Point2& b) {
  const double cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
  const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  if (std::abs(cross) > kOnEdgeTol * std::max(1.0, len)) return false;
  return p[0] >= std::min(a[0], b[0]) - kOnEdgeTol && p[0] <= std::max(a[0], b[0]) + kOnEdgeTol &&
         p[1] >= std::min(a[1], b[1]) - kOnEdgeTol && p[1] <= std::max(a[1], b[1]) + kOnEdgeTol;
}

bool inside_polygon(const Point2& p, const std::vector<Point2>& poly) {
  const std::size_t n = poly.size();
  for (std::size_t e = 0; e < n; ++e) {
    if (on_segment(p, poly[e], poly[(e + 1) % n])) return true;
  }
  bool inside = false;
  for (std::size_t e = 0, f = n - 1; e < n; f = e++) {
    const Point2& a = poly[e];
    const Point2& b = poly[f];
    if ((a[1] > p[1]) != (b[1] > p[1])) {
      const double x = a[0] + (p[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1]);
      if (p[0] < x) inside = !inside;
    }
  }
  return inside;
}

void check_same_dims(std::span<const BoolMask> masks) {
  for (const auto& m : masks) {
    if (m.dims() != masks.front().dims()) throw DimensionError("masks have different dimensions");
  }
}

/// Mean Jaccard expressed through per-pattern inclusion counts. A pattern
/// is the set of masks containing a voxel; voxels sharing a pattern are
/// interchangeable for the objective.
struct PatternObjective {
  std::size_t n_masks = 0;
  std::vector<std::uint64_t> patterns;
  std::vector<std::int64_t> counts;
  std::vector<std::int64_t> mask_sizes;

  double score(const std::vector<std::int64_t>& x) const {
    double total = 0.0;
    for (std::size_t i = 0; i < n_masks; ++i) {
      std::int64_t inter = 0;
      std::int64_t extra = 0;
      for (std::size_t p = 0; p < patterns.size(); ++p) {
        if ((patterns[p] >> i) & 1U) {
          inter += x[p];
        } else {
          extra += x[p];
        }
      }
      const std::int64_t uni = mask_sizes[i] + extra;
      total += uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
    }
    return total / static_cast<double>(n_masks);
  }
};

constexpr double kImproveTol = 1e-12;
constexpr double kExhaustiveLimit = 1 << 20;

}  // namespace

void validate(const Annotation& a) {
  for (std::size_t s = 1; s < a.slices.size(); ++s) {
    if (a.slices[s].k <= a.slices[s - 1].k) {
      throw ArgumentError("annotation slice indices must be strictly increasing");
    }
  }
}

BoolMask rasterize(const Annotation& a, const Dims& dims) {
  validate(a);
  BoolMask out(dims, 0);
  for (const auto& slice : a.slices) {
    if (slice.vertices.size() < 3) throw ArgumentError("polygon needs at least 3 vertices");
    if (slice.k < 0 || slice.k >= dims.nk) throw ArgumentError("annotation slice outside grid");
    double lo_i = slice.vertices[0][0], hi_i = lo_i, lo_j = slice.vertices[0][1], hi_j = lo_j;
    for (const auto& v : slice.vertices) {
      if (!std::isfinite(v[0]) || !std::isfinite(v[1])) {
        throw ArgumentError("non-finite polygon vertex");
      }
      lo_i = std::min(lo_i, v[0]);
      hi_i = std::max(hi_i, v[0]);
      lo_j = std::min(lo_j, v[1]);
      hi_j = std::max(hi_j, v[1]);
    }
    const int i0 = std::max(0, static_cast<int>(std::floor(lo_i)));
    const int i1 = std::min(dims.ni - 1, static_cast<int>(std::ceil(hi_i)));
    const int j0 = std::max(0, static_cast<int>(std::floor(lo_j)));
    const int j1 = std::min(dims.nj - 1, static_cast<int>(std::ceil(hi_j)));
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        if (inside_polygon({static_cast<double>(i), static_cast<double>(j)}, slice.vertices)) {
          out(i, j, slice.k) = 1;
        }
      }
    }
  }
  return out;
}

double pairwise_distance(const Annotation& a, const Annotation& b, double slice_thickness) {
  if (a.empty() || b.empty()) throw ArgumentError("pairwise_distance: empty annotation");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& sa : a.slices) {
    for (const auto& sb : b.slices) {
      const double dz = (sa.k - sb.k) * slice_thickness;
      for (const auto& va : sa.vertices) {
        for (const auto& vb : sb.vertices) {
          const double di = va[0] - vb[0];
          const double dj = va[1] - vb[1];
          best = std::min(best, std::sqrt(di * di + dj * dj + dz * dz));
        }
      }
    }
  }
  if (!std::isfinite(best)) throw ArgumentError("pairwise_distance: annotation without vertices");
  return best;
}

Clustering cluster(std::span<const Annotation> annotations, double slice_thickness, double shrink,
                   std::size_t max_group) {
  if (annotations.empty()) throw ArgumentError("cluster: no annotations");
  if (!(slice_thickness > 0.0)) throw ArgumentError("cluster: slice thickness must be positive");
  if (!(shrink > 0.0 && shrink < 1.0)) throw ArgumentError("cluster: shrink must be in (0, 1)");
  if (max_group < 1) throw ArgumentError("cluster: max_group must be >= 1");

  const std::size_t n = annotations.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      dist[a * n + b] = dist[b * n + a] =
          pairwise_distance(annotations[a], annotations[b], slice_thickness);
    }
  }

  auto components = [&](double tau) {
    std::vector<int> label(n, -1);
    std::vector<AnnotationGroup> groups;
    for (std::size_t s = 0; s < n; ++s) {
      if (label[s] >= 0) continue;
      const int id = static_cast<int>(groups.size());
      groups.emplace_back();
      std::vector<std::size_t> stack = {s};
      label[s] = id;
      while (!stack.empty()) {
        const std::size_t a = stack.back();
        stack.pop_back();
        groups.back().members.push_back(a);
        for (std::size_t b = 0; b < n; ++b) {
          if (label[b] < 0 && dist[a * n + b] <= tau) {
            label[b] = id;
            stack.push_back(b);
          }
        }
      }
      std::sort(groups.back().members.begin(), groups.back().members.end());
    }
    return groups;
  };
  auto oversized = [&](const std::vector<AnnotationGroup>& groups) {
    return std::any_of(groups.begin(), groups.end(),
                       [&](const AnnotationGroup& g) { return g.members.size() > max_group; });
  };

  Clustering result;
  result.tau = slice_thickness;
  result.groups = components(result.tau);
  while (oversized(result.groups)) {
    const double next = result.tau * shrink;
    if (next < kTauFloor) {
      result.tau = kTauFloor;
      result.groups = components(result.tau);
      for (auto& g : result.groups) {
        if (g.members.size() > max_group) {
          g.over_capacity = true;
          result.warning = true;
        }
      }
      break;
    }
    result.tau = next;
    result.groups = components(result.tau);
  }
  return result;
}

BoolMask consensus50(std::span<const BoolMask> masks) {
  if (masks.empty()) throw ArgumentError("consensus50: no masks");
  check_same_dims(masks);
  BoolMask out(masks.front().dims(), 0);
  const std::size_t n = masks.size();
  for (std::size_t v = 0; v < out.size(); ++v) {
    std::size_t votes = 0;
    for (const auto& m : masks) votes += m[v] ? 1 : 0;
    out[v] = 2 * votes >= n ? 1 : 0;
  }
  return out;
}

double mean_jaccard(const BoolMask& b, std::span<const BoolMask> masks) {
  if (masks.empty()) throw ArgumentError("mean_jaccard: no masks");
  double total = 0.0;
  for (const auto& m : masks) total += jaccard(b, m);
  return total / static_cast<double>(masks.size());
}

BoolMask jaccard_median(std::span<const BoolMask> masks) {
  if (masks.size() < 2) throw ArgumentError("jaccard_median: needs at least two masks");
  if (masks.size() > 64) throw ArgumentError("jaccard_median: at most 64 masks supported");
  check_same_dims(masks);
  const std::size_t n = masks.size();
  const Dims dims = masks.front().dims();

  std::vector<std::uint64_t> voxel_pattern(dims.size(), 0);
  for (std::size_t v = 0; v < voxel_pattern.size(); ++v) {
    for (std::size_t i = 0; i < n; ++i) {
      if (masks[i][v]) voxel_pattern[v] |= std::uint64_t{1} << i;
    }
  }

  PatternObjective obj;
  obj.n_masks = n;
  for (std::uint64_t p : voxel_pattern) {
    if (p != 0) obj.patterns.push_back(p);
  }
  std::sort(obj.patterns.begin(), obj.patterns.end());
  obj.patterns.erase(std::unique(obj.patterns.begin(), obj.patterns.end()), obj.patterns.end());
  if (obj.patterns.empty()) throw ArgumentError("jaccard_median: union of masks is empty");
  obj.counts.assign(obj.patterns.size(), 0);
  for (std::uint64_t p : voxel_pattern) {
    if (p == 0) continue;
    const auto it = std::lower_bound(obj.patterns.begin(), obj.patterns.end(), p);
    ++obj.counts[static_cast<std::size_t>(it - obj.patterns.begin())];
  }
  obj.mask_sizes.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    obj.mask_sizes[i] = static_cast<std::int64_t>(count_true(masks[i]));
  }
  const std::size_t np = obj.patterns.size();

  // Agreement-threshold candidates; ties keep the lowest threshold.
  std::vector<std::int64_t> best(np, 0);
  double best_score = -1.0;
  for (std::size_t t = 1; t <= n; ++t) {
    std::vector<std::int64_t> x(np, 0);
    for (std::size_t p = 0; p < np; ++p) {
      if (static_cast<std::size_t>(std::popcount(obj.patterns[p])) >= t) x[p] = obj.counts[p];
    }
    const double s = obj.score(x);
    if (s > best_score + kImproveTol) {
      best_score = s;
      best = std::move(x);
    }
  }

  // Best-improvement single-voxel flips; a flip adds or removes one voxel
  // of some pattern.
  for (;;) {
    double step_score = best_score;
    std::size_t step_p = np;
    int step_dir = 0;
    for (std::size_t p = 0; p < np; ++p) {
      for (int dir : {+1, -1}) {
        const std::int64_t next = best[p] + dir;
        if (next < 0 || next > obj.counts[p]) continue;
        best[p] = next;
        const double s = obj.score(best);
        best[p] -= dir;
        if (s > step_score + kImproveTol) {
          step_score = s;
          step_p = p;
          step_dir = dir;
        }
      }
    }
    if (step_p == np) break;
    best[step_p] += step_dir;
    best_score = step_score;
  }

  // Small unions: confirm against every count vector, which covers every
  // subset of the union up to interchangeable voxels.
  double combos = 1.0;
  for (auto c : obj.counts) combos *= static_cast<double>(c + 1);
  if (combos <= kExhaustiveLimit) {
    std::vector<std::int64_t> x(np, 0);
    for (;;) {
      const double s = obj.score(x);
      if (s > best_score + kImproveTol) {
        best_score = s;
        best = x;
      }
      std::size_t p = 0;
      while (p < np && x[p] == obj.counts[p]) x[p++] = 0;
      if (p == np) break;
      ++x[p];
    }
  }

  BoolMask out(dims, 0);
  std::vector<std::int64_t> remaining = best;
  for (std::size_t v = 0; v < voxel_pattern.size(); ++v) {
    if (voxel_pattern[v] == 0) continue;
    const auto it = std::lower_bound(obj.patterns.begin(), obj.patterns.end(), voxel_pattern[v]);
    auto& left = remaining[static_cast<std::size_t>(it - obj.patterns.begin())];
    if (left > 0) {
      out[v] = 1;
      --left;
    }
  }
  return out;
}

ScalarField resample_isotropic(const ScalarField& f, const Vec3& in_spacing, const Dims& out_dims,
                               double out_spacing) {
  for (double s : in_spacing) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ArgumentError("resample: spacing must be positive");
  }
  if (!(out_spacing > 0.0)) throw ArgumentError("resample: output spacing must be positive");
  ScalarField out(out_dims, 0.0);
  const Dims in = f.dims();
  for (std::size_t n = 0; n < out.size(); ++n) {
    const Voxel v = out.voxel(n);
    Vec3 p{};
    for (int a = 0; a < 3; ++a) {
      const double out_c = (out_dims[a] - 1) / 2.0;
      const double in_c = (in[a] - 1) / 2.0;
      const double idx = a == 0 ? v.i : (a == 1 ? v.j : v.k);
      p[static_cast<std::size_t>(a)] =
          in_c + (idx - out_c) * out_spacing / in_spacing[static_cast<std::size_t>(a)];
    }
    out[n] = trilinear(f, p);
  }
  return out;
}

BoolMask resample_mask(const BoolMask& m, const Vec3& in_spacing, const Dims& out_dims,
                       double out_spacing) {
  const ScalarField r = resample_isotropic(to_scalar(m), in_spacing, out_dims, out_spacing);
  BoolMask out(out_dims, 0);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = r[n] >= 0.5 ? 1 : 0;
  return out;
}

std::vector<Annotation> read_corpus(std::istream& in) {
  std::vector<Annotation> out;
  bool open = false;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    throw FormatError("annotation corpus line " + std::to_string(line_no) + ": " + what);
  };
  auto close = [&] {
    if (!open) return;
    try {
      validate(out.back());
    } catch (const ArgumentError& e) {
      fail(e.what());
    }
    open = false;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) {
      close();
      continue;
    }
    if (key[0] == '#') continue;
    if (key == "annotation") {
      close();
      Annotation a;
      if (!(ls >> a.reader_id)) fail("missing reader id");
      out.push_back(std::move(a));
      open = true;
    } else if (key == "slice") {
      if (!open) fail("slice outside an annotation");
      ContourSlice s;
      if (!(ls >> s.k)) fail("bad slice index");
      out.back().slices.push_back(std::move(s));
    } else if (key == "v") {
      if (!open || out.back().slices.empty()) fail("vertex outside a slice");
      std::array<double, 2> v{};
      if (!(ls >> v[0] >> v[1])) fail("bad vertex");
      out.back().slices.back().vertices.push_back(v);
    } else {
      fail("unknown record '" + key + "'");
    }
    std::string rest;
    if (ls >> rest) fail("trailing tokens");
  }
  close();
  return out;
}

void write_corpus(std::ostream& out, std::span<const Annotation> annotations) {
  char buf[96];
  for (const auto& a : annotations) {
    out << "annotation " << a.reader_id << '\n';
    for (const auto& s : a.slices) {
      out << "slice " << s.k << '\n';
      for (const auto& v : s.vertices) {
        std::snprintf(buf, sizeof buf, "v %.17g %.17g\n", v[0], v[1]);
        out << buf;
      }
    }
    out << '\n';
  }
}

std::vector<Annotation> simulate_readers(const BoolMask& truth, int n_readers, double jitter,
                                         std::uint64_t seed, int n_vertices) {
  if (n_readers < 1) throw ArgumentError("simulate_readers: need at least one reader");
  if (n_vertices < 3) throw ArgumentError("simulate_readers: need at least 3 vertices");
  if (!(jitter >= 0.0)) throw ArgumentError("simulate_readers: jitter must be >= 0");
  const Dims d = truth.dims();
  const ScalarField field = to_scalar(truth);
  std::vector<Annotation> out;
  for (int r = 0; r < n_readers; ++r) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(r)}));
    Annotation a;
    a.reader_id = "r" + std::to_string(r + 1);
    for (int k = 0; k < d.nk; ++k) {
      double si = 0.0, sj = 0.0;
      std::size_t count = 0;
      for (int i = 0; i < d.ni; ++i) {
        for (int j = 0; j < d.nj; ++j) {
          if (truth(i, j, k)) {
            si += i;
            sj += j;
            ++count;
          }
        }
      }
      if (count == 0) continue;
      const double ci = si / static_cast<double>(count);
      const double cj = sj / static_cast<double>(count);
      ContourSlice s;
      s.k = k;
      for (int t = 0; t < n_vertices; ++t) {
        const double theta = 2.0 * std::numbers::pi * t / n_vertices;
        const double di = std::cos(theta), dj = std::sin(theta);
        double radius = 0.0;
        const double limit = static_cast<double>(d.ni + d.nj);
        while (radius < limit) {
          const double next = radius + 0.25;
          const Vec3 p{ci + next * di, cj + next * dj, static_cast<double>(k)};
          if (p[0] < 0 || p[1] < 0 || p[0] > d.ni - 1 || p[1] > d.nj - 1) break;
          if (trilinear(field, p) < 0.5) break;
          radius = next;
        }
        radius = std::max(0.25, radius * (1.0 + jitter * standard_normal(rng)));
        s.vertices.push_back({ci + radius * di, cj + radius * dj});
      }
      a.slices.push_back(std::move(s));
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace lsml
