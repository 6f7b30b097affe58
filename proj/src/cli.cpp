#include "minacc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "minacc/data.hpp"
#include "minacc/error.hpp"
#include "minacc/eval.hpp"
#include "minacc/report.hpp"

namespace minacc {

namespace {

/// Bad flags or flag values: exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<ClassifierKind> parse_classifier_list(const std::vector<std::string>& names) {
  std::vector<ClassifierKind> kinds;
  for (const std::string& name : names) {
    if (name == "all") return {kAllClassifiers.begin(), kAllClassifiers.end()};
    const auto kind = parse_classifier(name);
    if (!kind) throw UsageError("unknown classifier '" + name + "'");
    if (std::ranges::find(kinds, *kind) == kinds.end()) kinds.push_back(*kind);
  }
  return kinds;
}

Phase parse_phase_flag(const std::string& name, bool double_after_split) {
  const auto phase = parse_phase(name);
  if (!phase) throw UsageError("unknown phase '" + name + "' (original, doubled, doubled-after-split)");
  if (!double_after_split) return *phase;
  if (*phase == Phase::Original) throw UsageError("--double-after-split needs --phase doubled");
  return Phase::DoubledAfterSplit;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  std::ostringstream s;
  s << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

Dataset load_checked(const std::string& path, bool expect_canonical) {
  Dataset data = load_wdbc(path);
  if (expect_canonical && !is_canonical_wdbc(data)) {
    throw Error(path + " is not the canonical WDBC release (fingerprint " + hex64(fingerprint(data)) + ")");
  }
  return data;
}

void add_hyperparam_flags(CLI::App& cmd, Hyperparams& hp, int& max_depth) {
  cmd.add_option("--knn-k", hp.knn_k, "Neighbours for k-NN (odd)")->capture_default_str();
  cmd.add_option("--svm-c", hp.svm_c, "SVM regularisation C")->capture_default_str();
  cmd.add_option("--svm-epochs", hp.svm_epochs, "SVM passes over the data")->capture_default_str();
  cmd.add_option("--logreg-lr", hp.logreg_learning_rate, "Logistic regression step size")->capture_default_str();
  cmd.add_option("--logreg-epochs", hp.logreg_epochs, "Logistic regression epochs")->capture_default_str();
  cmd.add_option("--mlp-lr", hp.mlp_learning_rate, "Network step size")->capture_default_str();
  cmd.add_option("--mlp-hidden", hp.mlp_hidden, "Hidden units")->capture_default_str();
  cmd.add_option("--mlp-epochs", hp.mlp_epochs, "Network epochs")->capture_default_str();
  cmd.add_option("--tree-max-depth", max_depth, "Tree depth limit, 0 = unlimited")->capture_default_str();
  cmd.add_option("--tree-min-samples-split", hp.tree_min_samples_split, "Smallest node that may split")
      ->capture_default_str();
  cmd.add_option("--forest-trees", hp.forest_trees, "Trees in the random forest")->capture_default_str();
  cmd.add_option("--forest-features", hp.forest_feature_subset, "Features drawn per forest split")
      ->capture_default_str();
}

void print_summaries(std::ostream& out, const std::vector<RunSummary>& summaries) {
  out << std::left << std::setw(26) << "classifier" << std::setw(7) << "split" << std::setw(21) << "phase"
      << std::right << std::setw(13) << "min %" << std::setw(13) << "mean %" << std::setw(13) << "max %"
      << std::setw(9) << "perfect" << "\n";
  out << std::fixed << std::setprecision(8);
  for (const RunSummary& s : summaries) {
    const int train = static_cast<int>(std::lround(s.train_fraction * 100));
    out << std::left << std::setw(26) << to_string(s.classifier) << std::setw(7)
        << (std::to_string(train) + "-" + std::to_string(100 - train)) << std::setw(21) << to_string(s.phase)
        << std::right << std::setw(13) << percent8(s.min_accuracy) << std::setw(13) << percent8(s.mean_accuracy)
        << std::setw(13) << percent8(s.max_accuracy) << std::setw(9) << s.perfect_count << "\n";
  }
  out << std::defaultfloat;
}

}  // namespace

int cli_run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Repeated-trial classifier evaluation on WDBC with min/mean/max accuracy and a leakage audit",
               "minacc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  // run
  RunConfig config;
  std::string data_path;
  std::vector<std::string> classifier_names{"all"};
  std::string phase_name = "original";
  std::string format_name = "json";
  std::string out_dir = "results";
  bool double_after_split = false;
  bool no_timestamp = false;
  bool expect_canonical = false;
  int max_depth = 0;
  auto* run = app.add_subcommand("run", "Run the repeated-trial protocol and write a report");
  run->add_option("--data", data_path, "WDBC data file")->required();
  run->add_option("--classifiers", classifier_names, "Comma-separated classifier names or 'all'")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--fractions", config.fractions, "Comma-separated train fractions")
      ->delimiter(',')
      ->capture_default_str();
  run->add_option("--rounds", config.rounds, "Trials per classifier and fraction")->capture_default_str();
  run->add_option("--phase", phase_name, "original | doubled | doubled-after-split")->capture_default_str();
  run->add_flag("--double-after-split", double_after_split, "With --phase doubled, duplicate each fold after splitting");
  run->add_option("--seed", config.master_seed, "Master seed")->capture_default_str();
  run->add_flag("--stratified", config.stratified, "Preserve class proportions in each fold");
  run->add_option("--out", out_dir, "Output directory")->capture_default_str();
  run->add_option("--format", format_name, "json | csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  run->add_flag("--no-timestamp", no_timestamp, "Leave the report timestamp null");
  run->add_flag("--expect-canonical", expect_canonical, "Fail unless the data is the canonical WDBC release");
  add_hyperparam_flags(*run, config.hp, max_depth);

  // floor-table
  std::vector<std::size_t> floor_n;
  std::size_t floor_m = 1;
  auto* floor = app.add_subcommand("floor-table", "Accuracy after m misclassifications among n inputs");
  floor->add_option("--n", floor_n, "Comma-separated input sizes")->delimiter(',')->required();
  floor->add_option("--m", floor_m, "Misclassifications")->capture_default_str();

  // leakage
  std::string leak_data;
  std::string leak_phase = "doubled";
  bool leak_after_split = false;
  double leak_fraction = 0.8;
  std::size_t leak_rounds = 100;
  std::uint64_t leak_seed = 42;
  auto* leakage = app.add_subcommand("leakage", "Duplicate contamination of test folds over many random splits");
  leakage->add_option("--data", leak_data, "WDBC data file")->required();
  leakage->add_option("--phase", leak_phase, "original | doubled | doubled-after-split")->capture_default_str();
  leakage->add_flag("--double-after-split", leak_after_split, "Duplicate each fold after splitting");
  leakage->add_option("--fraction", leak_fraction, "Train fraction")->capture_default_str();
  leakage->add_option("--seeds", leak_rounds, "Number of random splits")->capture_default_str();
  leakage->add_option("--seed", leak_seed, "Master seed")->capture_default_str();

  // augment
  std::string aug_data;
  std::string aug_out;
  std::size_t offspring = 569;
  std::uint64_t aug_seed = 42;
  auto* augment = app.add_subcommand("augment", "Append uniform-crossover offspring and write WDBC text");
  augment->add_option("--data", aug_data, "WDBC data file")->required();
  augment->add_option("--offspring", offspring, "Offspring to generate")->capture_default_str();
  augment->add_option("--seed", aug_seed, "Seed")->capture_default_str();
  augment->add_option("--out", aug_out, "Output file")->required();

  // double
  std::string dbl_data;
  std::string dbl_out;
  auto* dbl = app.add_subcommand("double", "Write the dataset followed by an exact copy of itself");
  dbl->add_option("--data", dbl_data, "WDBC data file")->required();
  dbl->add_option("--out", dbl_out, "Output file")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "minacc: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (run->parsed()) {
      config.data_path = data_path;
      config.classifiers = parse_classifier_list(classifier_names);
      config.phase = parse_phase_flag(phase_name, double_after_split);
      config.format = format_name == "csv" ? OutputFormat::Csv : OutputFormat::Json;
      config.output_dir = out_dir;
      if (max_depth < 0) throw UsageError("--tree-max-depth must be non-negative");
      if (max_depth > 0) config.hp.tree_max_depth = max_depth;
      try {
        config.validate();
      } catch (const Error& e) {
        throw UsageError(e.what());
      }

      const Dataset data = load_checked(data_path, expect_canonical);
      Report report;
      report.config = config;
      report.dataset_size = data.size();
      report.dataset_fingerprint = hex64(fingerprint(data));
      if (!no_timestamp) report.timestamp = utc_timestamp();
      report.summaries = run_protocol(data, config.protocol());
      verify_report(report);

      emit_plot_data(report.summaries, config.output_dir);
      if (config.format == OutputFormat::Json) {
        const auto path = config.output_dir / "report.json";
        std::ofstream file(path, std::ios::binary);
        file << to_json(report).dump(2) << "\n";
        if (!file) throw Error("failed writing " + path.string());
      }
      print_summaries(out, report.summaries);
      return kExitOk;
    }

    if (floor->parsed()) {
      std::vector<std::pair<std::size_t, std::size_t>> inputs;
      for (const std::size_t n : floor_n) inputs.emplace_back(n, floor_m);
      std::vector<AccuracyFloorRow> rows;
      try {
        rows = accuracy_floor_table(inputs);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      out << "input,misclassification,accuracy_percent\n" << std::fixed << std::setprecision(8);
      for (const AccuracyFloorRow& row : rows) {
        out << row.input_size << "," << row.misclassifications << "," << row.accuracy_percent << "\n";
      }
      out << std::defaultfloat;
      return kExitOk;
    }

    if (leakage->parsed()) {
      const Phase phase = parse_phase_flag(leak_phase, leak_after_split);
      if (!(leak_fraction > 0.0 && leak_fraction < 1.0)) throw UsageError("--fraction must lie in (0, 1)");
      if (leak_rounds < 1) throw UsageError("--seeds must be at least 1");
      const Dataset data = load_wdbc(leak_data);
      const LeakageSweep sweep = leakage_sweep(data, phase, leak_fraction, leak_rounds, leak_seed);
      nlohmann::ordered_json doc;
      doc["phase"] = to_string(sweep.phase);
      doc["fraction"] = sweep.train_fraction;
      doc["rounds"] = sweep.reports.size();
      doc["master_seed"] = leak_seed;
      doc["mean_contamination_fraction"] = sweep.mean_contamination;
      doc["min_contamination_fraction"] = sweep.min_contamination;
      doc["max_contamination_fraction"] = sweep.max_contamination;
      doc["duplicate_group_count"] = sweep.reports.front().duplicate_group_count;
      nlohmann::ordered_json per_split = nlohmann::ordered_json::array();
      for (const LeakageReport& r : sweep.reports) {
        per_split.push_back({{"contaminated_test_count", r.contaminated_test_count},
                             {"test_size", r.test_size},
                             {"contamination_fraction", r.contamination_fraction}});
      }
      doc["splits"] = std::move(per_split);
      out << doc.dump(2) << "\n";
      return kExitOk;
    }

    if (augment->parsed()) {
      if (offspring < 1) throw UsageError("--offspring must be positive");
      save_wdbc(aug_out, crossover_augment(load_wdbc(aug_data), offspring, aug_seed));
      return kExitOk;
    }

    if (dbl->parsed()) {
      save_wdbc(dbl_out, double_dataset(load_wdbc(dbl_data)));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    err << "minacc: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "minacc: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace minacc
