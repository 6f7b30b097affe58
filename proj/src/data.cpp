#include "minacc/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "minacc/error.hpp"
#include "minacc/random.hpp"

namespace minacc {

namespace {

constexpr std::size_t kFieldCount = 2 + kFeatureCount;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc{} && ptr == last;
}

Sample parse_line(std::string_view line, std::size_t line_no) {
  std::array<std::string_view, kFieldCount> fields;
  std::size_t count = 0;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    const std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    if (count < kFieldCount) fields[count] = trim(field);
    ++count;
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (count != kFieldCount) {
    throw ParseError(line_no, "expected " + std::to_string(kFieldCount) + " fields, found " + std::to_string(count));
  }

  Sample sample;
  if (!parse_number(fields[0], sample.id)) {
    throw ParseError(line_no, "bad patient id '" + std::string(fields[0]) + "'");
  }
  if (fields[1] == "M") {
    sample.label = Label::Malignant;
  } else if (fields[1] == "B") {
    sample.label = Label::Benign;
  } else {
    throw ParseError(line_no, "unknown diagnosis '" + std::string(fields[1]) + "'");
  }
  for (int j = 0; j < kFeatureCount; ++j) {
    double value = 0.0;
    if (!parse_number(fields[2 + j], value) || !std::isfinite(value)) {
      throw ParseError(line_no, "bad value '" + std::string(fields[2 + j]) + "' in feature " + std::to_string(j + 1));
    }
    sample.features[j] = value;
  }
  return sample;
}

void append_double(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  out.append(buf, ptr);
}

}  // namespace

Dataset::Dataset(std::vector<Sample> samples, Provenance provenance)
    : samples_(std::move(samples)), provenance_(provenance) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!samples_[i].features.allFinite()) {
      throw Error("sample " + std::to_string(i) + " has a non-finite feature");
    }
    if (samples_[i].label != Label::Benign && samples_[i].label != Label::Malignant) {
      throw Error("sample " + std::to_string(i) + " has an invalid label");
    }
  }
}

std::size_t Dataset::count(Label label) const {
  return static_cast<std::size_t>(
      std::count_if(samples_.begin(), samples_.end(), [label](const Sample& s) { return s.label == label; }));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Sample> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= samples_.size()) {
      throw Error("index " + std::to_string(i) + " out of range for dataset of size " + std::to_string(size()));
    }
    out.push_back(samples_[i]);
  }
  return Dataset(std::move(out), provenance_);
}

Eigen::MatrixXd Dataset::features() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(size()), kFeatureCount);
  for (std::size_t i = 0; i < size(); ++i) x.row(static_cast<Eigen::Index>(i)) = samples_[i].features.transpose();
  return x;
}

Eigen::VectorXd Dataset::targets() const {
  Eigen::VectorXd y(static_cast<Eigen::Index>(size()));
  for (std::size_t i = 0; i < size(); ++i) {
    y[static_cast<Eigen::Index>(i)] = samples_[i].label == Label::Malignant ? 1.0 : 0.0;
  }
  return y;
}

bool operator==(const Sample& a, const Sample& b) {
  return a.id == b.id && a.label == b.label && feature_key(a.features) == feature_key(b.features);
}

bool operator==(const Dataset& a, const Dataset& b) {
  return a.provenance() == b.provenance() && std::ranges::equal(a.samples(), b.samples());
}

std::string_view to_string(Label label) { return label == Label::Malignant ? "Malignant" : "Benign"; }

std::string_view to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::Original: return "original";
    case Provenance::Doubled: return "doubled";
    case Provenance::Augmented: return "augmented";
  }
  return "unknown";
}

Dataset parse_wdbc(std::istream& in) {
  std::vector<Sample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    samples.push_back(parse_line(line, line_no));
  }
  if (samples.empty()) throw ParseError(0, "no records in input");
  return Dataset(std::move(samples), Provenance::Original);
}

Dataset parse_wdbc(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_wdbc(in);
}

Dataset load_wdbc(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_wdbc(in);
}

void write_wdbc(std::ostream& out, const Dataset& data) { out << serialize_wdbc(data); }

std::string serialize_wdbc(const Dataset& data) {
  std::string out;
  out.reserve(data.size() * 256);
  for (const Sample& s : data.samples()) {
    out += std::to_string(s.id);
    out += s.label == Label::Malignant ? ",M" : ",B";
    for (int j = 0; j < kFeatureCount; ++j) {
      out += ',';
      append_double(out, s.features[j]);
    }
    out += '\n';
  }
  return out;
}

void save_wdbc(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_wdbc(out, data);
  if (!out) throw Error("failed writing " + path.string());
}

std::uint64_t fingerprint(const Dataset& data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  auto feed = [&hash](std::uint8_t byte) {
    hash ^= byte;
    hash *= 0x100000001b3ULL;
  };
  for (const Sample& s : data.samples()) {
    feed(s.label == Label::Malignant ? 'M' : 'B');
    for (int j = 0; j < kFeatureCount; ++j) {
      const auto bits = std::bit_cast<std::uint64_t>(s.features[j]);
      for (int b = 0; b < 8; ++b) feed(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return hash;
}

bool is_canonical_wdbc(const Dataset& data) {
  return data.size() == 569 && data.count(Label::Malignant) == 212 && data.count(Label::Benign) == 357 &&
         fingerprint(data) == kCanonicalWdbcFingerprint;
}

StandardizationParams fit_standardizer(const Dataset& train) {
  if (train.empty()) throw Error("cannot fit a standardizer on an empty dataset");
  return fit_standardizer(train.features());
}

Dataset apply_standardizer(const StandardizationParams& params, const Dataset& data) {
  if (params.dimension() != kFeatureCount || params.stddevs.size() != kFeatureCount) {
    throw Error("standardizer has dimension " + std::to_string(params.dimension()) + ", expected " +
                std::to_string(kFeatureCount));
  }
  std::vector<Sample> out(data.samples().begin(), data.samples().end());
  for (Sample& s : out) s.features = (s.features - params.means).cwiseQuotient(params.stddevs);
  return Dataset(std::move(out), data.provenance());
}

Dataset double_dataset(const Dataset& data) {
  if (data.empty()) throw Error("cannot double an empty dataset");
  std::vector<Sample> out;
  out.reserve(2 * data.size());
  out.insert(out.end(), data.samples().begin(), data.samples().end());
  out.insert(out.end(), data.samples().begin(), data.samples().end());
  return Dataset(std::move(out), Provenance::Doubled);
}

Dataset crossover_augment(const Dataset& data, std::size_t offspring_count, std::uint64_t seed) {
  if (offspring_count == 0) throw Error("offspring count must be positive");
  std::array<std::vector<std::size_t>, 2> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[static_cast<std::size_t>(data[i].label)].push_back(i);
  for (const auto label : {Label::Benign, Label::Malignant}) {
    if (by_class[static_cast<std::size_t>(label)].size() < 2) {
      throw Error("crossover needs at least two " + std::string(to_string(label)) + " samples");
    }
  }

  std::int64_t next_id = 0;
  for (const Sample& s : data.samples()) next_id = std::max(next_id, s.id);

  Rng rng(seed);
  std::vector<Sample> out(data.samples().begin(), data.samples().end());
  out.reserve(data.size() + offspring_count);
  for (std::size_t k = 0; k < offspring_count; ++k) {
    const auto cls = static_cast<std::size_t>(rng.uniform_index(2));
    const auto& members = by_class[cls];
    const auto a = static_cast<std::size_t>(rng.uniform_index(members.size()));
    auto b = static_cast<std::size_t>(rng.uniform_index(members.size() - 1));
    if (b >= a) ++b;
    const Sample& parent_a = data[members[a]];
    const Sample& parent_b = data[members[b]];

    Sample child;
    child.id = ++next_id;
    child.label = static_cast<Label>(cls);
    for (int j = 0; j < kFeatureCount; ++j) {
      child.features[j] = rng.coin() ? parent_a.features[j] : parent_b.features[j];
    }
    out.push_back(child);
  }
  return Dataset(std::move(out), Provenance::Augmented);
}

FeatureKey feature_key(const FeatureVector& features) {
  FeatureKey key;
  for (int j = 0; j < kFeatureCount; ++j) key[static_cast<std::size_t>(j)] = std::bit_cast<std::uint64_t>(features[j]);
  return key;
}

std::vector<DuplicateGroup> find_duplicates(const Dataset& data) {
  std::map<FeatureKey, std::vector<std::size_t>> buckets;
  for (std::size_t i = 0; i < data.size(); ++i) buckets[feature_key(data[i].features)].push_back(i);

  std::vector<DuplicateGroup> groups;
  for (auto& [key, indices] : buckets) {
    if (indices.size() < 2) continue;
    DuplicateGroup group;
    group.indices = std::move(indices);
    for (std::size_t i : group.indices) group.labels.push_back(data[i].label);
    groups.push_back(std::move(group));
  }
  std::ranges::sort(groups, {}, [](const DuplicateGroup& g) { return g.indices.front(); });
  return groups;
}

}  // namespace minacc
