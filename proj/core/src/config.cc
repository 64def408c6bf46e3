#include "sonoscope/config.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "sonoscope/errors.h"

namespace sonoscope {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
  return out;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "corpus.manifest",      "output.dir",         "output.cache_dir",
      "features.sample_rate", "features.segment_seconds", "features.window_ms",
      "features.hop_ms",      "features.q_bins",    "features.q_bins_per_octave",
      "features.q_fmin",      "split.ratios",       "split.seed",
      "model.classes",        "model.bins",         "train.lr",
      "train.batch",          "train.max_epochs",   "train.patience",
      "train.dropout",        "sweep.seeds",        "sweep.combos",
      "sweep.workers"};
  return keys;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    cfg.values_[section.empty() ? key : section + "." + key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing config key '" + key + "'");
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::istringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    const long long v = to_int("seeds", item);
    if (v < 0) throw ConfigError("seeds must be non-negative");
    const auto seed = static_cast<std::uint64_t>(v);
    for (auto s : seeds) {
      if (s == seed) throw ConfigError("seeds must be distinct");
    }
    seeds.push_back(seed);
  }
  if (seeds.empty()) throw ConfigError("empty seed list");
  return seeds;
}

RunConfig RunConfig::from_key_values(const KeyValueConfig& kv, const std::filesystem::path& base_dir) {
  for (const auto& [key, value] : kv.values()) {
    if (known_keys().count(key) == 0) throw ConfigError("unknown config key '" + key + "'");
  }
  auto path_of = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_relative() ? base_dir / p : p;
  };

  RunConfig c;
  c.manifest = path_of(kv.get("corpus.manifest"));
  c.output_dir = path_of(kv.get("output.dir"));
  c.cache_dir = kv.has("output.cache_dir") ? path_of(kv.get("output.cache_dir")) : c.output_dir / "cache";

  auto num = [&](const std::string& key, double fallback) {
    return kv.has(key) ? to_double(key, kv.get(key)) : fallback;
  };
  auto integer = [&](const std::string& key, long long fallback) {
    return kv.has(key) ? to_int(key, kv.get(key)) : fallback;
  };

  c.sample_rate_hz = static_cast<int>(integer("features.sample_rate", c.sample_rate_hz));
  c.segment_seconds = num("features.segment_seconds", c.segment_seconds);
  c.window_ms = num("features.window_ms", c.window_ms);
  c.hop_ms = num("features.hop_ms", c.hop_ms);
  c.q_geometry.bins = static_cast<int>(integer("features.q_bins", c.q_geometry.bins));
  c.q_geometry.bins_per_octave =
      static_cast<int>(integer("features.q_bins_per_octave", c.q_geometry.bins_per_octave));
  c.q_geometry.f_min = num("features.q_fmin", c.q_geometry.f_min);

  if (kv.has("split.ratios")) {
    std::istringstream ss(kv.get("split.ratios"));
    std::string item;
    std::vector<double> r;
    while (std::getline(ss, item, ',')) r.push_back(to_double("split.ratios", trim(item)));
    if (r.size() != 3) throw ConfigError("split.ratios needs three values");
    c.split_ratios = {r[0], r[1], r[2]};
  }
  c.split_seed = static_cast<std::uint64_t>(integer("split.seed", 0));

  c.num_classes = static_cast<int>(integer("model.classes", c.num_classes));
  c.histogram_bins = static_cast<int>(integer("model.bins", c.histogram_bins));

  c.train.lr = num("train.lr", c.train.lr);
  c.train.batch_size = static_cast<int>(integer("train.batch", c.train.batch_size));
  c.train.max_epochs = static_cast<int>(integer("train.max_epochs", c.train.max_epochs));
  c.train.patience = static_cast<int>(integer("train.patience", c.train.patience));
  c.train.dropout = num("train.dropout", c.train.dropout);

  if (kv.has("sweep.seeds")) c.seeds = parse_seed_list(kv.get("sweep.seeds"));
  if (kv.has("sweep.combos")) {
    try {
      c.combos = parse_combination_list(kv.get("sweep.combos"));
    } catch (const Error& e) {
      throw ConfigError(std::string("sweep.combos: ") + e.what());
    }
  }
  c.workers = static_cast<int>(integer("sweep.workers", c.workers));
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  const auto kv = KeyValueConfig::load(path);
  return from_key_values(kv, std::filesystem::absolute(path).parent_path());
}

void RunConfig::validate() const {
  if (sample_rate_hz < 8000) throw ConfigError("features.sample_rate must be >= 8000");
  if (!(segment_seconds > 0)) throw ConfigError("features.segment_seconds must be positive");
  double sum = 0;
  for (double r : split_ratios) {
    if (!(r > 0)) throw ConfigError("split ratios must be positive");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
  if (num_classes < 2) throw ConfigError("model.classes must be at least 2");
  if (histogram_bins < 1) throw ConfigError("model.bins must be positive");
  if (workers < 1) throw ConfigError("sweep.workers must be positive");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (combos.empty()) throw ConfigError("at least one combination is required");
  try {
    train.validate();
    FrameParams::from_ms(sample_rate_hz, window_ms, hop_ms);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

FeatureConfig RunConfig::feature_config() const {
  FeatureConfig f;
  f.sample_rate_hz = sample_rate_hz;
  f.frame = FrameParams::from_ms(sample_rate_hz, window_ms, hop_ms);
  f.q_geometry = q_geometry;
  return f;
}

std::string RunConfig::render() const {
  std::ostringstream o;
  o << "[corpus]\nmanifest = " << manifest.generic_string() << "\n\n";
  o << "[output]\ndir = " << output_dir.generic_string() << "\ncache_dir = " << cache_dir.generic_string()
    << "\n\n";
  o << "[features]\nsample_rate = " << sample_rate_hz << "\nsegment_seconds = " << fmt_double(segment_seconds)
    << "\nwindow_ms = " << fmt_double(window_ms) << "\nhop_ms = " << fmt_double(hop_ms)
    << "\nq_bins = " << q_geometry.bins << "\nq_bins_per_octave = " << q_geometry.bins_per_octave
    << "\nq_fmin = " << fmt_double(q_geometry.f_min) << "\n\n";
  o << "[split]\nratios = " << fmt_double(split_ratios[0]) << "," << fmt_double(split_ratios[1]) << ","
    << fmt_double(split_ratios[2]) << "\nseed = " << split_seed << "\n\n";
  o << "[model]\nclasses = " << num_classes << "\nbins = " << histogram_bins << "\n\n";
  o << "[train]\nlr = " << fmt_double(train.lr) << "\nbatch = " << train.batch_size
    << "\nmax_epochs = " << train.max_epochs << "\npatience = " << train.patience
    << "\ndropout = " << fmt_double(train.dropout) << "\n\n";
  o << "[sweep]\nseeds = ";
  for (std::size_t i = 0; i < seeds.size(); ++i) o << (i ? "," : "") << seeds[i];
  o << "\ncombos = ";
  if (combos == enumerate_combinations(kNumFeatureKinds)) {
    o << "all";
  } else {
    for (std::size_t i = 0; i < combos.size(); ++i) o << (i ? ";" : "") << combos[i].name();
  }
  o << "\nworkers = " << workers << "\n";
  return o.str();
}

}  // namespace sonoscope
