#include "lsml/model_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace lsml {

namespace {

constexpr const char* kMagic = "LSMODEL1";
constexpr int kVersion = 1;

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += fmt(values[i]);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  if (text.empty()) throw FormatError("model header: empty value for '" + key + "'");
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) {
    throw FormatError("model header: bad number '" + text + "' for '" + key + "'");
  }
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  if (text.empty()) throw FormatError("model header: empty value for '" + key + "'");
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size()) {
    throw FormatError("model header: bad integer '" + text + "' for '" + key + "'");
  }
  return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  if (text.empty() || text[0] == '-') {
    throw FormatError("model header: bad unsigned value for '" + key + "'");
  }
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size()) {
    throw FormatError("model header: bad unsigned value '" + text + "' for '" + key + "'");
  }
  return v;
}

std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (text == "-") return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  return out;
}

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& in) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw FormatError("model file truncated in importance table");
  }
  return v;
}

}  // namespace

void write_model(std::ostream& out, const ModelSequence& model) {
  const TrainConfig& c = model.config;
  if (model.val_trace.size() != model.forests.size() + 1) {
    throw ArgumentError("validation trace must have one entry more than the forests");
  }
  if (!model.importances.empty() && model.importances.size() != model.forests.size()) {
    throw ArgumentError("importance table count must match the forests");
  }
  std::ostringstream h;
  h << kMagic << '\n';
  h << "version " << kVersion << '\n';
  h << "feature_map " << to_string(c.feature_map) << '\n';
  h << "sigmas " << join(c.sigmas) << '\n';
  h << "band_width " << fmt(c.band_width) << '\n';
  h << "cfl_safety " << fmt(c.cfl_safety) << '\n';
  h << "max_iters " << c.max_iters << '\n';
  h << "patience " << c.patience << '\n';
  h << "samples_per_example " << c.samples_per_example << '\n';
  h << "forest_n_trees " << c.forest.n_trees << '\n';
  h << "forest_max_features " << c.forest.max_features << '\n';
  h << "forest_min_samples_leaf " << c.forest.min_samples_leaf << '\n';
  h << "forest_max_depth " << c.forest.max_depth << '\n';
  h << "forest_seed " << c.forest.seed << '\n';
  h << "seed " << c.seed << '\n';
  h << "compute_importance " << (c.compute_importance ? 1 : 0) << '\n';
  h << "init_sigma " << fmt(c.init.sigma) << '\n';
  h << "init_p_r " << fmt(c.init.p_r) << '\n';
  h << "init_n_rays " << c.init.n_rays << '\n';
  h << "init_invert " << (c.init.invert ? 1 : 0) << '\n';
  if (c.init.seed_point) {
    h << "init_seed_point " << c.init.seed_point->i << ',' << c.init.seed_point->j << ','
      << c.init.seed_point->k << '\n';
  } else {
    h << "init_seed_point -\n";
  }
  h << "n_forests " << model.forests.size() << '\n';
  h << "n_star " << model.n_star << '\n';
  h << "val_trace " << join(model.val_trace) << '\n';
  h << "importances " << (model.importances.empty() ? 0 : 1) << '\n';
  h << '\n';
  out << h.str();
  for (const auto& f : model.forests) write_forest(out, f);
  for (const auto& imp : model.importances) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(imp.size()));
    for (double v : imp) put<double>(out, v);
  }
  if (!out) throw FormatError("failed to write model");
}

ModelSequence read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMagic) throw FormatError("not an LSMODEL1 file");
  std::map<std::string, std::string> kv;
  for (;;) {
    if (!std::getline(in, line)) throw FormatError("model header is not terminated");
    if (line.empty()) break;
    const auto sp = line.find(' ');
    if (sp == std::string::npos) throw FormatError("model header: malformed line '" + line + "'");
    kv[line.substr(0, sp)] = line.substr(sp + 1);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw FormatError("model header: missing '" + key + "'");
    return it->second;
  };
  const long long version = parse_int("version", need("version"));
  if (version != kVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }

  ModelSequence m;
  TrainConfig& c = m.config;
  try {
    c.feature_map = parse_feature_map(need("feature_map"));
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("model header: ") + e.what());
  }
  c.sigmas = parse_list("sigmas", need("sigmas"));
  c.band_width = parse_double("band_width", need("band_width"));
  c.cfl_safety = parse_double("cfl_safety", need("cfl_safety"));
  c.max_iters = static_cast<int>(parse_int("max_iters", need("max_iters")));
  c.patience = static_cast<int>(parse_int("patience", need("patience")));
  c.samples_per_example =
      static_cast<int>(parse_int("samples_per_example", need("samples_per_example")));
  c.forest.n_trees = static_cast<int>(parse_int("forest_n_trees", need("forest_n_trees")));
  c.forest.max_features =
      static_cast<int>(parse_int("forest_max_features", need("forest_max_features")));
  c.forest.min_samples_leaf =
      static_cast<int>(parse_int("forest_min_samples_leaf", need("forest_min_samples_leaf")));
  c.forest.max_depth = static_cast<int>(parse_int("forest_max_depth", need("forest_max_depth")));
  c.forest.seed = parse_u64("forest_seed", need("forest_seed"));
  c.seed = parse_u64("seed", need("seed"));
  c.compute_importance = parse_int("compute_importance", need("compute_importance")) != 0;
  c.init.sigma = parse_double("init_sigma", need("init_sigma"));
  c.init.p_r = parse_double("init_p_r", need("init_p_r"));
  c.init.n_rays = static_cast<int>(parse_int("init_n_rays", need("init_n_rays")));
  c.init.invert = parse_int("init_invert", need("init_invert")) != 0;
  const std::string& sp = need("init_seed_point");
  if (sp != "-") {
    const auto p = parse_list("init_seed_point", sp);
    if (p.size() != 3) throw FormatError("model header: seed point needs three coordinates");
    c.init.seed_point = Voxel{static_cast<int>(p[0]), static_cast<int>(p[1]), static_cast<int>(p[2])};
  }
  try {
    c.validate();
  } catch (const ArgumentError& e) {
    throw FormatError(std::string("model header: ") + e.what());
  }

  const long long n_forests = parse_int("n_forests", need("n_forests"));
  m.n_star = static_cast<int>(parse_int("n_star", need("n_star")));
  m.val_trace = parse_list("val_trace", need("val_trace"));
  const bool has_importance = parse_int("importances", need("importances")) != 0;
  if (n_forests < 0 || m.n_star < 0 || m.n_star > n_forests ||
      m.val_trace.size() != static_cast<std::size_t>(n_forests) + 1) {
    throw FormatError("model header: inconsistent forest count, n_star or trace");
  }
  const std::size_t width = feature_width(c.feature_map, c.sigmas.size());
  for (long long f = 0; f < n_forests; ++f) {
    m.forests.push_back(read_forest(in));
    if (m.forests.back().n_features() < width) {
      throw FormatError("model forest is narrower than its feature map");
    }
  }
  if (has_importance) {
    for (long long f = 0; f < n_forests; ++f) {
      const auto n = get<std::uint32_t>(in);
      if (n != m.forests[static_cast<std::size_t>(f)].n_features()) {
        throw FormatError("importance table width does not match its forest");
      }
      std::vector<double> imp(n);
      for (auto& v : imp) v = get<double>(in);
      m.importances.push_back(std::move(imp));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in model file");
  return m;
}

void write_model(const std::filesystem::path& path, const ModelSequence& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_model(out, model);
}

ModelSequence read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read_model(in);
}

}  // namespace lsml
