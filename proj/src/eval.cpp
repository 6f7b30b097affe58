#include "minacc/eval.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "minacc/error.hpp"
#include "minacc/random.hpp"

namespace minacc {

namespace {

struct FoldPair {
  Dataset train;
  Dataset test;
  LeakageReport leakage;
};

FoldPair make_folds(const Dataset& data, const SplitResult& split, bool double_each_fold) {
  if (!double_each_fold) {
    return {data.subset(split.train), data.subset(split.test), leakage_report(data, split)};
  }
  FoldPair folds{double_dataset(data.subset(split.train)), double_dataset(data.subset(split.test)), {}};

  // Audit the doubled folds as one dataset so the measurement is the same one
  // the Doubled phase gets.
  std::vector<Sample> combined(folds.train.samples().begin(), folds.train.samples().end());
  combined.insert(combined.end(), folds.test.samples().begin(), folds.test.samples().end());
  SplitResult combined_split;
  for (std::size_t i = 0; i < folds.train.size(); ++i) combined_split.train.push_back(i);
  for (std::size_t i = 0; i < folds.test.size(); ++i) combined_split.test.push_back(folds.train.size() + i);
  folds.leakage = leakage_report(Dataset(std::move(combined), Provenance::Doubled), combined_split);
  return folds;
}

SplitResult split_for(const Dataset& data, const SplitSpec& spec) {
  if (!spec.stratified) return random_split(data.size(), spec);
  std::vector<Label> labels;
  labels.reserve(data.size());
  for (const Sample& s : data.samples()) labels.push_back(s.label);
  return random_split(data.size(), spec, std::span<const Label>(labels));
}

}  // namespace

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Original: return "original";
    case Phase::Doubled: return "doubled";
    case Phase::DoubledAfterSplit: return "doubled-after-split";
  }
  return "unknown";
}

std::optional<Phase> parse_phase(std::string_view name) {
  for (const Phase p : {Phase::Original, Phase::Doubled, Phase::DoubledAfterSplit}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view to_string(Winner winner) {
  switch (winner) {
    case Winner::A: return "a";
    case Winner::B: return "b";
    case Winner::Tie: return "tie";
  }
  return "unknown";
}

TrialResult run_trial(const Dataset& data, ClassifierKind kind, const SplitSpec& spec, const Hyperparams& hp,
                      bool double_each_fold) {
  const SplitResult split = split_for(data, spec);
  const FoldPair folds = make_folds(data, split, double_each_fold);
  if (folds.test.empty()) throw Error("split left the test fold empty");

  const TrainedModel model = train(kind, folds.train, hp);
  std::size_t correct = 0;
  for (const Sample& s : folds.test.samples()) {
    if (model.predict(s.features).label == s.label) ++correct;
  }

  TrialResult result;
  result.classifier = kind;
  result.phase = double_each_fold                                 ? Phase::DoubledAfterSplit
                 : data.provenance() == Provenance::Doubled ? Phase::Doubled
                                                                  : Phase::Original;
  result.split = spec;
  result.model_seed = hp.seed;
  result.correct = correct;
  result.test_size = folds.test.size();
  result.accuracy = static_cast<double>(correct) / static_cast<double>(result.test_size);
  result.contamination_fraction = folds.leakage.contamination_fraction;
  return result;
}

std::uint64_t classifier_tag(ClassifierKind kind) {
  const auto it = std::ranges::find(kAllClassifiers, kind);
  return static_cast<std::uint64_t>(it - kAllClassifiers.begin());
}

std::uint64_t derive_trial_seed(std::uint64_t master_seed, std::uint64_t tag, double train_fraction,
                                std::size_t trial_index) {
  const auto percent = static_cast<std::uint64_t>(std::llround(train_fraction * 100.0));
  std::uint64_t h = mix64(master_seed);
  h = mix64(h ^ tag);
  h = mix64(h ^ percent);
  return mix64(h ^ static_cast<std::uint64_t>(trial_index));
}

unsigned resolve_worker_count(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MINACC_THREADS"); env != nullptr && *env != '\0') {
    unsigned value = 0;
    const std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc{} && ptr == text.data() + text.size() && value > 0) return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<RunSummary> run_protocol(const Dataset& data, const ProtocolConfig& config) {
  if (config.rounds < 1) throw Error("rounds must be at least 1");
  if (config.classifiers.empty()) throw Error("no classifiers selected");
  if (config.fractions.empty()) throw Error("no split fractions selected");
  config.hp.validate();
  if (config.phase != Phase::Original && data.provenance() == Provenance::Doubled) {
    throw Error("data is already doubled; pass the original dataset and let the phase double it");
  }

  const Dataset staged = config.phase == Phase::Doubled ? double_dataset(data) : data;
  const bool double_each_fold = config.phase == Phase::DoubledAfterSplit;

  const std::size_t groups = config.classifiers.size() * config.fractions.size();
  const std::size_t total = groups * config.rounds;
  std::vector<TrialResult> results(total);

  auto run_job = [&](std::size_t job) {
    const std::size_t group = job / config.rounds;
    const std::size_t trial = job % config.rounds;
    const ClassifierKind kind = config.classifiers[group / config.fractions.size()];
    const double fraction = config.fractions[group % config.fractions.size()];

    const std::uint64_t seed = derive_trial_seed(config.master_seed, classifier_tag(kind), fraction, trial);
    Hyperparams hp = config.hp;
    hp.seed = mix64(seed ^ kModelSeedSalt);
    TrialResult r = run_trial(staged, kind, SplitSpec{fraction, seed, config.stratified}, hp, double_each_fold);
    r.trial_index = trial;
    results[job] = r;
  };

  const unsigned workers = std::min<std::size_t>(resolve_worker_count(config.threads), total);
  if (workers <= 1) {
    for (std::size_t job = 0; job < total; ++job) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t job = next++; job < total; job = next++) {
            try {
              run_job(job);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
              next = total;
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<RunSummary> summaries;
  summaries.reserve(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    summaries.push_back(summarize(std::span(results).subspan(g * config.rounds, config.rounds)));
  }
  return summaries;
}

RunSummary summarize(std::span<const TrialResult> trials) {
  if (trials.empty()) throw Error("cannot summarize zero trials");
  const TrialResult& first = trials.front();
  for (const TrialResult& t : trials) {
    if (t.classifier != first.classifier || t.phase != first.phase ||
        t.split.train_fraction != first.split.train_fraction) {
      throw Error("cannot summarize trials from different classifiers, fractions or phases");
    }
  }

  RunSummary s;
  s.classifier = first.classifier;
  s.train_fraction = first.split.train_fraction;
  s.phase = first.phase;
  s.rounds = trials.size();
  s.per_trial.assign(trials.begin(), trials.end());
  std::ranges::stable_sort(s.per_trial, {}, &TrialResult::trial_index);

  s.min_accuracy = s.per_trial.front().accuracy;
  s.max_accuracy = s.per_trial.front().accuracy;
  std::size_t correct_sum = 0;
  double accuracy_sum = 0.0;
  double contamination_sum = 0.0;
  bool uniform_test_size = true;
  for (const TrialResult& t : s.per_trial) {
    s.min_accuracy = std::min(s.min_accuracy, t.accuracy);
    s.max_accuracy = std::max(s.max_accuracy, t.accuracy);
    if (t.perfect()) ++s.perfect_count;
    correct_sum += t.correct;
    accuracy_sum += t.accuracy;
    contamination_sum += t.contamination_fraction;
    uniform_test_size = uniform_test_size && t.test_size == first.test_size;
  }
  const auto n = static_cast<double>(s.rounds);
  s.mean_accuracy = uniform_test_size ? static_cast<double>(correct_sum) / (n * static_cast<double>(first.test_size))
                                      : accuracy_sum / n;
  // Rounding in the sum can push the mean a hair outside [min, max].
  s.mean_accuracy = std::clamp(s.mean_accuracy, s.min_accuracy, s.max_accuracy);
  s.mean_contamination = contamination_sum / n;
  return s;
}

std::vector<AccuracyFloorRow> accuracy_floor_table(std::span<const std::pair<std::size_t, std::size_t>> inputs) {
  std::vector<AccuracyFloorRow> rows;
  rows.reserve(inputs.size());
  for (const auto& [n, m] : inputs) {
    if (n < 1) throw Error("input size must be at least 1");
    if (m > n) {
      throw Error("misclassifications (" + std::to_string(m) + ") exceed input size (" + std::to_string(n) + ")");
    }
    rows.push_back({n, m, 100.0 * static_cast<double>(n - m) / static_cast<double>(n)});
  }
  return rows;
}

ComparisonVerdict compare_methods(const RunSummary& a, const RunSummary& b) {
  if (a.phase != b.phase || a.train_fraction != b.train_fraction) {
    throw Error("can only compare runs with the same phase and split fraction");
  }
  auto pick = [](double va, double vb) { return va > vb ? Winner::A : vb > va ? Winner::B : Winner::Tie; };
  ComparisonVerdict v;
  v.winner_by_max = pick(a.max_accuracy, b.max_accuracy);
  v.winner_by_min = pick(a.min_accuracy, b.min_accuracy);
  v.recommendation = v.winner_by_min;
  return v;
}

LeakageSweep leakage_sweep(const Dataset& data, Phase phase, double train_fraction, std::size_t rounds,
                           std::uint64_t master_seed) {
  if (rounds < 1) throw Error("rounds must be at least 1");
  if (phase != Phase::Original && data.provenance() == Provenance::Doubled) {
    throw Error("data is already doubled; pass the original dataset and let the phase double it");
  }
  const Dataset staged = phase == Phase::Doubled ? double_dataset(data) : data;

  LeakageSweep sweep;
  sweep.phase = phase;
  sweep.train_fraction = train_fraction;
  double sum = 0.0;
  for (std::size_t r = 0; r < rounds; ++r) {
    const SplitSpec spec{train_fraction, derive_trial_seed(master_seed, kLeakageTag, train_fraction, r), false};
    const SplitResult split = random_split(staged.size(), spec);
    const LeakageReport report = phase == Phase::DoubledAfterSplit ? make_folds(staged, split, true).leakage
                                                                   : leakage_report(staged, split);
    sum += report.contamination_fraction;
    sweep.reports.push_back(report);
  }
  const auto [lo, hi] = std::ranges::minmax(sweep.reports, {}, &LeakageReport::contamination_fraction);
  sweep.min_contamination = lo.contamination_fraction;
  sweep.max_contamination = hi.contamination_fraction;
  sweep.mean_contamination = sum / static_cast<double>(rounds);
  return sweep;
}

}  // namespace minacc
