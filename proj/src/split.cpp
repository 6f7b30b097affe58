#include "minacc/split.hpp"

#include <cfenv>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "minacc/error.hpp"
#include "minacc/random.hpp"

namespace minacc {

std::size_t train_size_for(std::size_t n, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must lie strictly between 0 and 1, got " + std::to_string(train_fraction));
  }
  // nearbyint honours the current rounding mode; pin it.
  const int saved = std::fegetround();
  std::fesetround(FE_TONEAREST);
  const double rounded = std::nearbyint(train_fraction * static_cast<double>(n));
  std::fesetround(saved);
  return static_cast<std::size_t>(rounded);
}

SplitResult random_split(std::size_t n, const SplitSpec& spec, std::optional<std::span<const Label>> labels) {
  if (n < 2) throw Error("cannot split fewer than two samples");
  const std::size_t n_train = train_size_for(n, spec.train_fraction);
  Rng rng(spec.seed);
  SplitResult result;

  if (!spec.stratified) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span(order));
    result.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    result.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return result;
  }

  if (!labels || labels->size() != n) throw Error("stratified split needs one label per sample");
  for (const Label cls : {Label::Benign, Label::Malignant}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if ((*labels)[i] == cls) members.push_back(i);
    }
    if (members.empty()) throw Error("stratified split needs both classes present");
    rng.shuffle(std::span(members));
    const std::size_t cut = train_size_for(members.size(), spec.train_fraction);
    result.train.insert(result.train.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(cut));
    result.test.insert(result.test.end(), members.begin() + static_cast<std::ptrdiff_t>(cut), members.end());
  }
  return result;
}

LeakageReport leakage_report(const Dataset& data, const SplitResult& split) {
  auto check = [&data](std::size_t i) {
    if (i >= data.size()) {
      throw Error("split index " + std::to_string(i) + " out of range for dataset of size " +
                  std::to_string(data.size()));
    }
  };
  std::set<FeatureKey> train_keys;
  for (std::size_t i : split.train) {
    check(i);
    train_keys.insert(feature_key(data[i].features));
  }

  LeakageReport report;
  report.test_size = split.test.size();
  for (std::size_t i : split.test) {
    check(i);
    if (train_keys.contains(feature_key(data[i].features))) ++report.contaminated_test_count;
  }
  report.contamination_fraction =
      report.test_size == 0 ? 0.0
                            : static_cast<double>(report.contaminated_test_count) / static_cast<double>(report.test_size);
  report.duplicate_group_count = find_duplicates(data).size();
  return report;
}

}  // namespace minacc
