#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "minacc/classifiers.hpp"
#include "minacc/data.hpp"
#include "minacc/split.hpp"

namespace minacc {

/// Original: the dataset as loaded. Doubled: duplicated before splitting, so
/// twins can straddle the split. DoubledAfterSplit: split first, then each
/// fold duplicated on its own; the diagnostic control for Doubled.
enum class Phase { Original, Doubled, DoubledAfterSplit };

std::string_view to_string(Phase phase);
std::optional<Phase> parse_phase(std::string_view name);

struct TrialResult {
  ClassifierKind classifier = ClassifierKind::RandomForest;
  Phase phase = Phase::Original;
  SplitSpec split;
  std::uint64_t model_seed = 0;
  std::size_t trial_index = 0;
  std::size_t correct = 0;
  std::size_t test_size = 0;
  double accuracy = 0.0;  // correct / test_size
  double contamination_fraction = 0.0;

  bool perfect() const { return correct == test_size; }
  bool operator==(const TrialResult&) const = default;
};

struct RunSummary {
  ClassifierKind classifier = ClassifierKind::RandomForest;
  double train_fraction = 0.0;
  Phase phase = Phase::Original;
  std::size_t rounds = 0;
  double min_accuracy = 0.0;
  double mean_accuracy = 0.0;
  double max_accuracy = 0.0;
  std::size_t perfect_count = 0;
  double mean_contamination = 0.0;
  std::vector<TrialResult> per_trial;  // ordered by trial_index

  bool operator==(const RunSummary&) const = default;
};

/// Split, fit (the model standardises internally where it needs to), predict
/// every test sample. With `double_each_fold` both folds are duplicated after
/// splitting and the trial is tagged DoubledAfterSplit; otherwise the phase is
/// read from the dataset's provenance.
TrialResult run_trial(const Dataset& data, ClassifierKind kind, const SplitSpec& spec, const Hyperparams& hp,
                      bool double_each_fold = false);

/// Per-trial seed: mix64 chained over the master seed, the classifier's
/// position in kAllClassifiers, the train percentage (round(100 * fraction))
/// and the trial index:
///   h = mix64(master); h = mix64(h ^ tag); h = mix64(h ^ percent); h = mix64(h ^ trial)
/// The split uses h; the model uses mix64(h ^ kModelSeedSalt).
std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t tag, double train_fraction,
                                std::size_t trial_index);
inline constexpr std::uint64_t kModelSeedSalt = 0x6d6f64656cULL;  // "model"
std::uint64_t classifier_tag(ClassifierKind kind);

struct ProtocolConfig {
  std::vector<ClassifierKind> classifiers{kAllClassifiers.begin(), kAllClassifiers.end()};
  std::vector<double> fractions{0.5, 0.6, 0.7, 0.8};
  std::size_t rounds = 100;
  Phase phase = Phase::Original;
  std::uint64_t master_seed = 42;
  Hyperparams hp;  // hp.seed is replaced per trial
  bool stratified = false;
  /// Worker threads; 0 reads MINACC_THREADS, falling back to the hardware
  /// concurrency.
  unsigned threads = 0;
};

unsigned resolve_worker_count(unsigned requested);

/// One summary per (classifier, fraction), classifiers outermost, in config
/// order. Results do not depend on the worker count. The Doubled phases do
/// their own duplication, so `data` must not already be doubled.
std::vector<RunSummary> run_protocol(const Dataset& data, const ProtocolConfig& config);

/// Min/mean/max over the trials, which must share classifier, fraction and
/// phase. When every trial has the same test size the mean is
/// sum(correct) / (rounds * test_size).
RunSummary summarize(std::span<const TrialResult> trials);

struct AccuracyFloorRow {
  std::size_t input_size = 0;
  std::size_t misclassifications = 0;
  double accuracy_percent = 0.0;

  bool operator==(const AccuracyFloorRow&) const = default;
};

/// 100 * (n - m) / n per (n, m) pair.
std::vector<AccuracyFloorRow> accuracy_floor_table(std::span<const std::pair<std::size_t, std::size_t>> inputs);

enum class Winner { A, B, Tie };
std::string_view to_string(Winner winner);

struct ComparisonVerdict {
  Winner winner_by_max = Winner::Tie;
  Winner winner_by_min = Winner::Tie;
  Winner recommendation = Winner::Tie;  // always winner_by_min
};

/// Ranks two runs by their best and by their worst trial; the worst trial
/// decides the recommendation. Both runs must share phase and fraction.
ComparisonVerdict compare_methods(const RunSummary& a, const RunSummary& b);

struct LeakageSweep {
  Phase phase = Phase::Original;
  double train_fraction = 0.0;
  std::vector<LeakageReport> reports;
  double mean_contamination = 0.0;
  double min_contamination = 0.0;
  double max_contamination = 0.0;
};

/// Leakage of `rounds` random splits of `data` under `phase`. Split seeds are
/// derive_trial_seed(master_seed, kLeakageTag, fraction, r).
inline constexpr std::uint64_t kLeakageTag = 0xffULL;
LeakageSweep leakage_sweep(const Dataset& data, Phase phase, double train_fraction, std::size_t rounds,
                           std::uint64_t master_seed);

}  // namespace minacc
