#include <cmath>
#include <fstream>
#include <sstream>

#include "sonoscope/errors.h"
#include "sonoscope/signal_io.h"

namespace sonoscope {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace

std::vector<Segment> segment(const AudioBuffer& buf, double seconds) {
  if (!(seconds > 0.0)) throw RangeError("segment: seconds must be positive");
  const double exact = buf.sample_rate_hz * seconds;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9 * std::max(1.0, exact) || rounded < 1) {
    throw RangeError("segment: sample_rate * seconds must be a positive integer");
  }
  const auto seg_len = static_cast<std::size_t>(rounded);
  const std::size_t count = buf.samples.size() / seg_len;

  std::vector<Segment> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Segment s;
    s.samples.assign(buf.samples.begin() + static_cast<std::ptrdiff_t>(i * seg_len),
                     buf.samples.begin() + static_cast<std::ptrdiff_t>((i + 1) * seg_len));
    s.sample_rate_hz = buf.sample_rate_hz;
    s.recording_id = buf.recording_id;
    s.class_label = buf.class_label;
    s.segment_index = static_cast<int>(i);
    out.push_back(std::move(s));
  }
  return out;
}

const char* partition_name(Partition p) {
  switch (p) {
    case Partition::kTrain:
      return "train";
    case Partition::kVal:
      return "val";
    case Partition::kTest:
      return "test";
  }
  return "?";
}

Partition parse_partition(const std::string& name) {
  if (name == "train") return Partition::kTrain;
  if (name == "val") return Partition::kVal;
  if (name == "test") return Partition::kTest;
  throw FormatError("unknown partition '" + name + "'");
}

Partition SplitManifest::partition_of(const std::string& recording_id) const {
  const auto it = assignments.find(recording_id);
  if (it == assignments.end()) {
    throw SelectionError("recording '" + recording_id + "' is not in the split");
  }
  return it->second;
}

void write_split_csv(const std::filesystem::path& path,
                     const SplitManifest& manifest) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "recording_id,partition,seed\n";
  for (const auto& [id, part] : manifest.assignments) {
    out << id << ',' << partition_name(part) << ',' << manifest.seed << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

SplitManifest read_split_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "recording_id,partition,seed") {
    throw FormatError(path.string() + ": bad split header");
  }
  SplitManifest m;
  bool first = true;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw FormatError(path.string() + ": bad row '" + line + "'");
    const auto seed = std::stoull(f[2]);
    if (first) {
      m.seed = seed;
      first = false;
    } else if (seed != m.seed) {
      throw FormatError(path.string() + ": mixed seeds");
    }
    if (!m.assignments.emplace(f[0], parse_partition(f[1])).second) {
      throw FormatError(path.string() + ": duplicate recording '" + f[0] + "'");
    }
  }
  return m;
}

std::vector<CorpusEntry> read_corpus_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": empty manifest");
  line = strip_cr(line);
  // Tolerate a UTF-8 byte order mark.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  if (line != "recording_id,path,class_label") {
    throw FormatError(path.string() + ": expected header recording_id,path,class_label");
  }
  const auto base = path.parent_path();
  std::vector<CorpusEntry> entries;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3 || f[0].empty() || f[1].empty()) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    }
    CorpusEntry e;
    e.recording_id = f[0];
    e.path = f[1];
    if (e.path.is_relative()) e.path = base / e.path;
    try {
      std::size_t used = 0;
      e.class_label = std::stoi(f[2], &used);
      if (used != f[2].size() || e.class_label < 0) throw FormatError("");
    } catch (const std::exception&) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) +
                        ": bad class label '" + f[2] + "'");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_corpus_manifest(const std::filesystem::path& path,
                           const std::vector<CorpusEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "recording_id,path,class_label\n";
  for (const auto& e : entries) {
    out << e.recording_id << ',' << e.path.generic_string() << ',' << e.class_label
        << '\n';
  }
}

}  // namespace sonoscope
