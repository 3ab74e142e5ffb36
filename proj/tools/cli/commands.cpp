#include "cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "cli/manifest.hpp"
#include "cli/output_guard.hpp"
#include "cli/pgm.hpp"
#include "lsml/annotations.hpp"
#include "lsml/error.hpp"
#include "lsml/eval.hpp"
#include "lsml/features.hpp"
#include "lsml/field_io.hpp"
#include "lsml/init.hpp"
#include "lsml/model_io.hpp"
#include "lsml/synth.hpp"
#include "lsml/training.hpp"

namespace fs = std::filesystem;

namespace lsml::cli {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class Body>
void write_text(OutputGuard& guard, const fs::path& path, Body&& body) {
  std::ofstream out(guard.file(path));
  if (!out) throw Error("cannot write " + path.string());
  body(out);
  out.flush();
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (auto& item : split_csv_line(text)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_reals(const std::string& text, const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || used == 0) throw ArgumentError("bad number '" + item + "' in " + what);
    out.push_back(v);
  }
  if (out.empty()) throw ArgumentError(what + " is empty");
  return out;
}

int parse_axis(const std::string& text) {
  if (text == "i" || text == "0") return 0;
  if (text == "j" || text == "1") return 1;
  if (text == "k" || text == "2") return 2;
  throw ArgumentError("axis must be i, j or k");
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  std::string out;
  std::size_t n_train = 40;
  std::size_t n_val = 10;
  std::size_t n_test = 10;
  std::uint64_t seed = 0;
  std::string categories = "isolated,juxta_wall,low_contrast";
  int size = 41;
  double radius_min = 6.0;
  double radius_max = 12.0;
  double perturbation = 0.25;
  double noise = 0.1;
  double contrast = 1.0;
};

void run_synth(const SynthOptions& o) {
  PhantomParams p;
  p.dims = {o.size, o.size, o.size};
  p.radius_min = o.radius_min;
  p.radius_max = o.radius_max;
  p.perturbation = o.perturbation;
  p.noise = o.noise;
  p.contrast = o.contrast;
  std::vector<PhantomCategory> categories;
  for (const auto& c : split_list(o.categories)) categories.push_back(parse_category(c));
  const Dataset ds = generate_dataset(o.n_train, o.n_val, o.n_test, p, o.seed, categories);

  OutputGuard guard;
  const fs::path root = o.out;
  guard.directory(root);
  std::vector<ManifestRow> rows;
  const std::pair<const char*, const std::vector<Phantom>*> splits[] = {
      {"train", &ds.train}, {"val", &ds.val}, {"test", &ds.test}};
  for (const auto& [split, phantoms] : splits) {
    for (std::size_t i = 0; i < phantoms->size(); ++i) {
      const Phantom& ph = (*phantoms)[i];
      char id[64];
      std::snprintf(id, sizeof id, "%s_%03zu", split, i);
      ManifestRow r;
      r.split = split;
      r.id = id;
      r.image = root / split / (r.id + "_image.lsf");
      r.mask = root / split / (r.id + "_mask.lsm");
      r.seed = ph.seed;
      r.category = to_string(ph.category);
      r.radius = ph.radius;
      write_field(guard.file(r.image), ph.image);
      write_field(guard.file(r.mask), ph.truth);
      rows.push_back(std::move(r));
    }
  }
  write_manifest(guard.file(root / "manifest.csv"), rows);
  guard.commit();
  std::cout << "wrote " << rows.size() << " phantoms to " << root.string() << '\n';
}

// ---------------------------------------------------------------- init-search

struct InitSearchOptions {
  std::string manifest;
  std::string split = "train";
  std::string sigmas = "1,2,3,4,5,6,7";
  std::string p_r = "50,55,60,65,70,75,80";
  int n_rays = 1024;
  std::string out;
};

void run_init_search(const InitSearchOptions& o) {
  const auto rows = rows_of_split(read_manifest(o.manifest), o.split);
  if (rows.empty()) throw ArgumentError("no manifest rows in split '" + o.split + "'");
  std::vector<ScalarField> images;
  std::vector<BoolMask> truths;
  for (const auto& r : rows) {
    images.push_back(standardize(read_scalar_field(r.image)));
    truths.push_back(read_mask(r.mask));
  }
  InitParams base;
  base.n_rays = o.n_rays;
  const auto sigmas = parse_reals(o.sigmas, "sigmas");
  const auto p_r = parse_reals(o.p_r, "p-r");
  const GridSearchResult res = grid_search(images, truths, sigmas, p_r, base);

  OutputGuard guard;
  write_text(guard, o.out, [&](std::ostream& out) {
    out << "sigma,p_r,mean_jaccard\n";
    for (const auto& c : res.table) {
      out << num(c.sigma) << ',' << num(c.p_r) << ',' << num(c.mean_jaccard) << '\n';
    }
  });
  guard.commit();
  std::cout << "best sigma " << res.sigma << " p_r " << res.p_r << " mean Jaccard " << res.score
            << '\n';
}

// ---------------------------------------------------------------- train

struct TrainOptions {
  std::string manifest;
  std::string model;
  std::string trace;
  std::string masks_dir;
  std::string feature_map = "fm1";
  int max_iters = 60;
  int patience = 5;
  int samples = 5000;
  int trees = 100;
  int max_features = 0;
  int min_leaf = 1;
  int max_depth = 0;
  double band_width = 3.0;
  double cfl_safety = 0.9;
  std::uint64_t seed = 0;
  double init_sigma = 4.0;
  double init_p_r = 70.0;
  int init_rays = 1024;
  bool init_invert = false;
  bool no_importance = false;
  bool quiet = false;
};

std::vector<Example> load_examples(const std::vector<ManifestRow>& rows, const TrainConfig& c) {
  std::vector<Example> out;
  out.reserve(rows.size());
  for (const auto& r : rows) {
    out.push_back(make_example(read_scalar_field(r.image), read_mask(r.mask), c, r.id, r.category));
  }
  return out;
}

void run_train(const TrainOptions& o) {
  TrainConfig c;
  c.feature_map = parse_feature_map(o.feature_map);
  c.max_iters = o.max_iters;
  c.patience = o.patience;
  c.samples_per_example = o.samples;
  c.band_width = o.band_width;
  c.cfl_safety = o.cfl_safety;
  c.forest.n_trees = o.trees;
  c.forest.max_features = o.max_features;
  c.forest.min_samples_leaf = o.min_leaf;
  c.forest.max_depth = o.max_depth;
  c.seed = o.seed;
  c.compute_importance = !o.no_importance;
  c.init.sigma = o.init_sigma;
  c.init.p_r = o.init_p_r;
  c.init.n_rays = o.init_rays;
  c.init.invert = o.init_invert;
  c.validate();

  const auto rows = read_manifest(o.manifest);
  const auto train_rows = rows_of_split(rows, "train");
  const auto val_rows = rows_of_split(rows, "val");
  if (train_rows.empty() || val_rows.empty()) {
    throw ArgumentError("manifest needs both train and val rows");
  }

  // The training-time masks at the selected iteration are snapshotted with
  // the same strict-improvement rule that picks n_star.
  TrainHooks hooks;
  double best_score = -std::numeric_limits<double>::infinity();
  int best_iter = -1;
  std::vector<BoolMask> best_masks;
  std::vector<std::string> ids;
  if (!o.masks_dir.empty()) {
    hooks.observer = [&](int iter, std::span<const Example> tr, std::span<const Example> va) {
      const double s = mean_jaccard(va);
      if (iter == 0 || s > best_score) {
        best_score = s;
        best_iter = iter;
        best_masks.clear();
        ids.clear();
        for (const auto& ex : tr) {
          best_masks.push_back(ex.mask());
          ids.push_back(ex.id);
        }
      }
    };
  }
  if (!o.quiet) hooks.log = [](const std::string& msg) { std::cerr << msg << '\n'; };

  const ModelSequence model = train(load_examples(train_rows, c), load_examples(val_rows, c), c, hooks);

  OutputGuard guard;
  write_model(guard.file(o.model), model);
  if (!o.trace.empty()) {
    write_text(guard, o.trace, [&](std::ostream& out) { write_trace_csv(out, model.val_trace); });
  }
  if (!o.masks_dir.empty()) {
    if (best_iter != model.n_star) throw Error("training-time mask snapshot is out of sync");
    guard.directory(o.masks_dir);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      write_field(guard.file(fs::path(o.masks_dir) / (ids[i] + ".lsm")), best_masks[i]);
    }
  }
  guard.commit();
  std::cout << "n_star " << model.n_star << ", validation mean Jaccard "
            << model.val_trace[static_cast<std::size_t>(model.n_star)] << " (init "
            << model.val_trace.front() << "), " << model.forests.size() << " forests\n";
}

// ---------------------------------------------------------------- segment

struct SegmentCliOptions {
  std::string model;
  std::string image;
  std::string out;
  std::string trace;
  std::string init_out;
  int steps = -1;
  bool full_domain = false;
};

void run_segment(const SegmentCliOptions& o) {
  const ModelSequence model = read_model(fs::path(o.model));
  const ScalarField image = read_scalar_field(o.image);
  SegmentOptions opts;
  opts.max_steps = o.steps;
  opts.full_domain_velocity = o.full_domain;
  const SegmentResult res = segment(model, image, opts);

  OutputGuard guard;
  write_field(guard.file(o.out), res.mask);
  if (!o.init_out.empty()) write_field(guard.file(o.init_out), res.init);
  if (!o.trace.empty()) {
    write_text(guard, o.trace, [&](std::ostream& out) {
      out << "iter,volume\n";
      for (std::size_t n = 0; n < res.volume_trace.size(); ++n) {
        out << n << ',' << res.volume_trace[n] << '\n';
      }
    });
  }
  guard.commit();
  std::cout << "applied " << res.volume_trace.size() - 1 << " steps, final volume "
            << res.volume_trace.back() << ", status " << to_string(res.status) << '\n';
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string pairs;
  std::string manifest;
  std::string pred_dir;
  std::string split = "test";
  std::string scores;
  std::string report;
};

struct EvalPair {
  std::string id;
  std::string category;
  fs::path mask;
  fs::path truth;
};

std::vector<EvalPair> read_pairs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::string header = "id,category,mask_path,truth_path";
  std::string line;
  std::vector<EvalPair> out;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (number == 1) {
      if (line != header) throw FormatError("pairs header must be '" + header + "'");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 4) throw FormatError("pairs line " + std::to_string(number) + ": expected 4 fields");
    out.push_back({f[0], f[1], path.parent_path() / f[2], path.parent_path() / f[3]});
  }
  return out;
}

void run_eval(const EvalOptions& o) {
  std::vector<EvalPair> pairs;
  if (!o.pairs.empty()) {
    pairs = read_pairs(o.pairs);
  } else {
    if (o.manifest.empty() || o.pred_dir.empty()) {
      throw ArgumentError("give --pairs, or --manifest with --pred-dir");
    }
    for (const auto& r : rows_of_split(read_manifest(o.manifest), o.split)) {
      pairs.push_back({r.id, r.category, fs::path(o.pred_dir) / (r.id + ".lsm"), r.mask});
    }
  }
  if (pairs.empty()) throw ArgumentError("nothing to evaluate");

  std::vector<ScoreRow> rows;
  for (const auto& p : pairs) rows.push_back(score(p.id, p.category, read_mask(p.mask), read_mask(p.truth)));
  const Report rep = report(rows);

  OutputGuard guard;
  if (!o.scores.empty()) write_text(guard, o.scores, [&](std::ostream& out) { write_scores_csv(out, rows); });
  if (!o.report.empty()) write_text(guard, o.report, [&](std::ostream& out) { write_report_csv(out, rep); });
  guard.commit();
  std::cout << "n " << rep.overall_jaccard.count << ", mean Jaccard " << rep.overall_jaccard.mean
            << " +/- " << rep.overall_jaccard.std << ", mean Dice " << rep.overall_dice.mean << '\n';
}

// ---------------------------------------------------------------- importance

struct ImportanceOptions {
  std::string model;
  std::string out;
};

void run_importance(const ImportanceOptions& o) {
  const ModelSequence model = read_model(fs::path(o.model));
  if (model.importances.empty()) throw ArgumentError("model was trained without importances");
  const auto names = feature_names(model.config.feature_map, model.config.sigmas);
  for (const auto& row : model.importances) {
    if (row.size() != names.size()) {
      throw FormatError("importance width does not match the canonical feature names");
    }
  }
  OutputGuard guard;
  write_text(guard, o.out, [&](std::ostream& out) {
    out << "iter";
    for (const auto& n : names) out << ',' << n;
    out << '\n';
    for (std::size_t it = 0; it < model.importances.size(); ++it) {
      out << it;
      for (double v : model.importances[it]) out << ',' << num(v);
      out << '\n';
    }
  });
  guard.commit();
  std::cout << "wrote importances for " << model.importances.size() << " iterations\n";
}

// ---------------------------------------------------------------- slice

struct SliceOptions {
  std::string field;
  std::string axis = "k";
  int index = -1;
  std::string overlay;
  std::string window;
  std::string out;
};

void run_slice(const SliceOptions& o) {
  const ScalarField f = read_field_as_scalar(o.field);
  const int axis = parse_axis(o.axis);
  const int index = o.index < 0 ? f.dims()[axis] / 2 : o.index;
  std::optional<BoolMask> overlay;
  if (!o.overlay.empty()) overlay = read_mask(o.overlay);
  std::optional<std::pair<double, double>> window;
  if (!o.window.empty()) {
    const auto w = parse_reals(o.window, "window");
    if (w.size() != 2) throw ArgumentError("window takes two values: low,high");
    window = std::make_pair(w[0], w[1]);
  }
  const GrayImage img = render_slice(f, axis, index, overlay ? &*overlay : nullptr, window);
  OutputGuard guard;
  write_pgm(guard.file(o.out), img);
  guard.commit();
}

// ---------------------------------------------------------------- consolidate

struct ConsolidateOptions {
  std::string corpus;
  std::string dims;
  double thickness = 1.0;
  std::string method = "median";
  double shrink = 0.9;
  std::size_t max_group = 4;
  std::string out_dir;
  std::string summary;
};

void run_consolidate(const ConsolidateOptions& o) {
  const auto d = parse_reals(o.dims, "dims");
  if (d.size() != 3) throw ArgumentError("dims takes three values: ni,nj,nk");
  const Dims dims{static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2])};
  if (o.method != "median" && o.method != "consensus") {
    throw ArgumentError("method must be median or consensus");
  }
  std::ifstream in(o.corpus);
  if (!in) throw FormatError("cannot open corpus " + o.corpus);
  const std::vector<Annotation> anns = read_corpus(in);
  if (anns.empty()) throw ArgumentError("corpus holds no annotations");
  const Clustering cl = cluster(anns, o.thickness, o.shrink, o.max_group);
  if (cl.warning) std::cerr << "warning: some groups exceed " << o.max_group << " readers\n";

  OutputGuard guard;
  const fs::path root = o.out_dir;
  guard.directory(root);
  std::ostringstream summary;
  summary << "group,readers,count,volume,mean_jaccard,over_capacity,mask_path\n";
  for (std::size_t g = 0; g < cl.groups.size(); ++g) {
    const auto& grp = cl.groups[g];
    std::vector<BoolMask> masks;
    std::string readers;
    for (std::size_t m : grp.members) {
      masks.push_back(rasterize(anns[m], dims));
      if (!readers.empty()) readers += ';';
      readers += anns[m].reader_id;
    }
    const BoolMask out = o.method == "median" ? jaccard_median(masks) : consensus50(masks);
    char name[32];
    std::snprintf(name, sizeof name, "group_%03zu.lsm", g);
    write_field(guard.file(root / name), out);
    summary << g << ',' << readers << ',' << grp.members.size() << ',' << count_true(out) << ','
            << num(mean_jaccard(out, masks)) << ',' << (grp.over_capacity ? 1 : 0) << ',' << name
            << '\n';
  }
  const fs::path summary_path = o.summary.empty() ? root / "groups.csv" : fs::path(o.summary);
  write_text(guard, summary_path, [&](std::ostream& out) { out << summary.str(); });
  guard.commit();
  std::cout << cl.groups.size() << " groups at tau " << cl.tau << '\n';
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"synth",      "init-search", "train", "segment",
                                                 "eval",       "importance",  "slice", "consolidate"};
  return names;
}

std::vector<Command> add_commands(CLI::App& app) {
  std::vector<Command> commands;

  {
    auto o = std::make_shared<SynthOptions>();
    auto* s = app.add_subcommand("synth", "Generate a seeded phantom dataset and its manifest");
    s->add_option("--out", o->out, "Output directory")->required();
    s->add_option("--n-train", o->n_train, "Training phantoms")->capture_default_str();
    s->add_option("--n-val", o->n_val, "Validation phantoms")->capture_default_str();
    s->add_option("--n-test", o->n_test, "Test phantoms")->capture_default_str();
    s->add_option("--seed", o->seed, "Master seed")->capture_default_str();
    s->add_option("--categories", o->categories, "Comma-separated categories, round-robin")
        ->capture_default_str();
    s->add_option("--size", o->size, "Cube edge length in voxels")->capture_default_str();
    s->add_option("--radius-min", o->radius_min)->capture_default_str();
    s->add_option("--radius-max", o->radius_max)->capture_default_str();
    s->add_option("--perturbation", o->perturbation, "Radial bump amplitude")->capture_default_str();
    s->add_option("--noise", o->noise, "Gaussian noise standard deviation")->capture_default_str();
    s->add_option("--contrast", o->contrast)->capture_default_str();
    commands.push_back({s, [o] { run_synth(*o); }});
  }
  {
    auto o = std::make_shared<InitSearchOptions>();
    auto* s = app.add_subcommand("init-search", "Grid-search the initialization parameters");
    s->add_option("--manifest", o->manifest)->required();
    s->add_option("--split", o->split)->capture_default_str();
    s->add_option("--sigmas", o->sigmas, "Comma-separated smoothing scales")->capture_default_str();
    s->add_option("--p-r", o->p_r, "Comma-separated radius percentiles")->capture_default_str();
    s->add_option("--n-rays", o->n_rays)->capture_default_str();
    s->add_option("--out", o->out, "CSV of sigma,p_r,mean_jaccard")->required();
    commands.push_back({s, [o] { run_init_search(*o); }});
  }
  {
    auto o = std::make_shared<TrainOptions>();
    auto* s = app.add_subcommand("train", "Train a model sequence on the train/val splits");
    s->add_option("--manifest", o->manifest)->required();
    s->add_option("--model", o->model, "Output LSMODEL1 file")->required();
    s->add_option("--trace", o->trace, "Validation trace CSV");
    s->add_option("--masks-dir", o->masks_dir, "Write training-time masks at n_star here");
    s->add_option("--feature-map", o->feature_map, "fm1 or fm2")->capture_default_str();
    s->add_option("--max-iters", o->max_iters)->capture_default_str();
    s->add_option("--patience", o->patience)->capture_default_str();
    s->add_option("--samples", o->samples, "Band samples per example")->capture_default_str();
    s->add_option("--trees", o->trees)->capture_default_str();
    s->add_option("--max-features", o->max_features, "0 means all")->capture_default_str();
    s->add_option("--min-leaf", o->min_leaf)->capture_default_str();
    s->add_option("--max-depth", o->max_depth, "0 means unlimited")->capture_default_str();
    s->add_option("--band-width", o->band_width)->capture_default_str();
    s->add_option("--cfl-safety", o->cfl_safety)->capture_default_str();
    s->add_option("--seed", o->seed)->capture_default_str();
    s->add_option("--init-sigma", o->init_sigma)->capture_default_str();
    s->add_option("--init-p-r", o->init_p_r)->capture_default_str();
    s->add_option("--init-rays", o->init_rays)->capture_default_str();
    s->add_flag("--init-invert", o->init_invert, "Objects darker than the background");
    s->add_flag("--no-importance", o->no_importance, "Skip permutation importances");
    s->add_flag("--quiet", o->quiet, "No progress messages");
    commands.push_back({s, [o] { run_train(*o); }});
  }
  {
    auto o = std::make_shared<SegmentCliOptions>();
    auto* s = app.add_subcommand("segment", "Segment an image with a trained model");
    s->add_option("--model", o->model)->required();
    s->add_option("--image", o->image, "LSF1 image")->required();
    s->add_option("--out", o->out, "Output LSM mask")->required();
    s->add_option("--trace", o->trace, "Per-step volume CSV");
    s->add_option("--init-out", o->init_out, "Also write the initialization mask");
    s->add_option("--steps", o->steps, "Steps to apply (default n_star)")->capture_default_str();
    s->add_flag("--full-domain", o->full_domain, "Evaluate the velocity on every voxel (the update stays on the band)");
    commands.push_back({s, [o] { run_segment(*o); }});
  }
  {
    auto o = std::make_shared<EvalOptions>();
    auto* s = app.add_subcommand("eval", "Score masks against references");
    s->add_option("--pairs", o->pairs, "CSV of id,category,mask_path,truth_path");
    s->add_option("--manifest", o->manifest, "Manifest whose masks are the references");
    s->add_option("--pred-dir", o->pred_dir, "Directory of <id>.lsm predictions");
    s->add_option("--split", o->split)->capture_default_str();
    s->add_option("--scores", o->scores, "Per-example CSV");
    s->add_option("--report", o->report, "Summary CSV");
    commands.push_back({s, [o] { run_eval(*o); }});
  }
  {
    auto o = std::make_shared<ImportanceOptions>();
    auto* s = app.add_subcommand("importance", "Per-iteration feature importances of a model");
    s->add_option("--model", o->model)->required();
    s->add_option("--out", o->out, "CSV with one row per iteration")->required();
    commands.push_back({s, [o] { run_importance(*o); }});
  }
  {
    auto o = std::make_shared<SliceOptions>();
    auto* s = app.add_subcommand("slice", "Dump one slice of a field as an 8-bit PGM");
    s->add_option("--field", o->field, "LSF1 field or mask")->required();
    s->add_option("--axis", o->axis, "i, j or k")->capture_default_str();
    s->add_option("--index", o->index, "Slice index (default: middle)");
    s->add_option("--overlay", o->overlay, "Mask whose contour is drawn in white");
    s->add_option("--window", o->window, "Intensity window low,high");
    s->add_option("--out", o->out, "Output PGM")->required();
    commands.push_back({s, [o] { run_slice(*o); }});
  }
  {
    auto o = std::make_shared<ConsolidateOptions>();
    auto* s = app.add_subcommand("consolidate", "Group reader outlines and consolidate each group");
    s->add_option("--corpus", o->corpus)->required();
    s->add_option("--dims", o->dims, "ni,nj,nk of the raster grid")->required();
    s->add_option("--thickness", o->thickness, "Slice thickness")->capture_default_str();
    s->add_option("--method", o->method, "median or consensus")->capture_default_str();
    s->add_option("--shrink", o->shrink)->capture_default_str();
    s->add_option("--max-group", o->max_group)->capture_default_str();
    s->add_option("--out-dir", o->out_dir)->required();
    s->add_option("--summary", o->summary, "Summary CSV (default: <out-dir>/groups.csv)");
    commands.push_back({s, [o] { run_consolidate(*o); }});
  }
  return commands;
}

}  // namespace lsml::cli
