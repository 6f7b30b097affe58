#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace minacc {

inline constexpr int kFeatureCount = 30;

enum class Label : std::uint8_t { Benign = 0, Malignant = 1 };

enum class Provenance { Original, Doubled, Augmented };

using FeatureVector = Eigen::Matrix<double, kFeatureCount, 1>;

/// One WDBC record: patient id, diagnosis and the 30 nucleus measurements.
struct Sample {
  std::int64_t id = 0;
  Label label = Label::Benign;
  FeatureVector features = FeatureVector::Zero();
};

/// Ordered, immutable collection of samples. Construction rejects non-finite
/// features.
class Dataset {
 public:
  Dataset() = default;
  Dataset(std::vector<Sample> samples, Provenance provenance);

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const Sample> samples() const noexcept { return samples_; }
  Provenance provenance() const noexcept { return provenance_; }

  std::size_t count(Label label) const;

  /// Samples at `indices`, in that order. Throws on an out-of-range index.
  Dataset subset(std::span<const std::size_t> indices) const;

  /// n x 30 design matrix.
  Eigen::MatrixXd features() const;
  /// 0/1 targets, 1 = Malignant.
  Eigen::VectorXd targets() const;

 private:
  std::vector<Sample> samples_;
  Provenance provenance_ = Provenance::Original;
};

bool operator==(const Sample& a, const Sample& b);
bool operator==(const Dataset& a, const Dataset& b);

std::string_view to_string(Label label);
std::string_view to_string(Provenance provenance);

/// Parses UCI `wdbc.data` text: `id,diagnosis,f1,...,f30` per line, no
/// header, blank lines skipped. Errors carry the 1-based line number.
Dataset parse_wdbc(std::istream& in);
Dataset parse_wdbc(std::string_view text);
Dataset load_wdbc(const std::filesystem::path& path);

/// Inverse of parse_wdbc. Features use the shortest decimal form that reads
/// back to the same double.
void write_wdbc(std::ostream& out, const Dataset& data);
std::string serialize_wdbc(const Dataset& data);
void save_wdbc(const std::filesystem::path& path, const Dataset& data);

/// FNV-1a over each sample's diagnosis letter followed by the little-endian
/// IEEE-754 bytes of its 30 features. Ids are not hashed.
std::uint64_t fingerprint(const Dataset& data);

/// Fingerprint of the 569-record UCI WDBC release.
inline constexpr std::uint64_t kCanonicalWdbcFingerprint = 0x1d70b98a3c30869eULL;

bool is_canonical_wdbc(const Dataset& data);

// -- standardisation --------------------------------------------------------

/// Per-column z-score parameters. Population standard deviation; columns with
/// deviation below 1e-12 get a deviation of 1.
struct StandardizationParams {
  Eigen::VectorXd means;
  Eigen::VectorXd stddevs;

  Eigen::Index dimension() const { return means.size(); }
};

inline constexpr double kDegenerateStddev = 1e-12;

template <typename Derived>
StandardizationParams fit_standardizer(const Eigen::MatrixBase<Derived>& x);

StandardizationParams fit_standardizer(const Dataset& train);

/// Row-wise (x - mean) / stddev.
template <typename Derived>
Eigen::MatrixXd apply_standardizer(const StandardizationParams& params,
                                   const Eigen::MatrixBase<Derived>& x);

Dataset apply_standardizer(const StandardizationParams& params, const Dataset& data);

// -- transformations --------------------------------------------------------

/// `data` followed by an exact copy of itself.
Dataset double_dataset(const Dataset& data);

/// Appends `offspring_count` uniform-crossover children. Each child picks a
/// class uniformly, two distinct parents of that class uniformly, then takes
/// every feature from either parent with probability 1/2. Children get ids
/// max_id + 1, max_id + 2, ...
Dataset crossover_augment(const Dataset& data, std::size_t offspring_count, std::uint64_t seed);

/// Bit pattern of a feature vector. Two samples are duplicates iff their
/// keys compare equal, so 0.0 and -0.0 are distinct.
using FeatureKey = std::array<std::uint64_t, kFeatureCount>;
FeatureKey feature_key(const FeatureVector& features);

struct DuplicateGroup {
  std::vector<std::size_t> indices;  // ascending
  std::vector<Label> labels;         // parallel to indices
};

/// Groups of two or more samples with bit-identical features, ordered by
/// their first index.
std::vector<DuplicateGroup> find_duplicates(const Dataset& data);

// -- template definitions ---------------------------------------------------

template <typename Derived>
StandardizationParams fit_standardizer(const Eigen::MatrixBase<Derived>& x) {
  StandardizationParams params;
  const auto n = static_cast<double>(x.rows());
  params.means = x.colwise().mean().transpose();
  params.stddevs =
      ((x.rowwise() - params.means.transpose()).array().square().colwise().sum() / n).sqrt().transpose();
  for (Eigen::Index j = 0; j < params.stddevs.size(); ++j) {
    if (!(params.stddevs[j] >= kDegenerateStddev)) params.stddevs[j] = 1.0;
  }
  return params;
}

template <typename Derived>
Eigen::MatrixXd apply_standardizer(const StandardizationParams& params,
                                   const Eigen::MatrixBase<Derived>& x) {
  return (x.rowwise() - params.means.transpose()).array().rowwise() / params.stddevs.transpose().array();
}

}  // namespace minacc
