#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "minacc/data.hpp"

namespace minacc {

struct SplitSpec {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
  bool stratified = false;

  bool operator==(const SplitSpec&) const = default;
};

struct SplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct LeakageReport {
  std::size_t contaminated_test_count = 0;
  std::size_t test_size = 0;
  double contamination_fraction = 0.0;
  /// Duplicate groups in the whole dataset, regardless of the split.
  std::size_t duplicate_group_count = 0;
};

/// round(train_fraction * n) with ties to even.
std::size_t train_size_for(std::size_t n, double train_fraction);

/// Shuffles 0..n-1 with Rng(spec.seed) and cuts the permutation at
/// train_size_for(n, fraction): the first part is the training fold. With
/// `stratified`, each class (Benign first, then Malignant) is shuffled and
/// cut separately from the same generator and the folds are concatenated.
SplitResult random_split(std::size_t n, const SplitSpec& spec,
                         std::optional<std::span<const Label>> labels = std::nullopt);

/// Counts test samples whose features are bit-identical to some training
/// sample.
LeakageReport leakage_report(const Dataset& data, const SplitResult& split);

}  // namespace minacc
