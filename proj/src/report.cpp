#include "minacc/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "minacc/error.hpp"

namespace minacc {

namespace {

using ordered_json = nlohmann::ordered_json;
using json = nlohmann::json;

constexpr const char* kSeedDerivation =
    "split_seed = mix64(mix64(mix64(mix64(master_seed) ^ classifier_tag) ^ round(100*fraction)) ^ trial_index); "
    "model_seed = mix64(split_seed ^ 0x6d6f64656c); mix64 = SplitMix64 finaliser; classifier_tag = position in "
    "[random-forest, svm, knn, neural-network, naive-bayes, logistic-regression, decision-tree-entropy, "
    "decision-tree-regressor]; generator = std::mt19937_64";

std::string_view to_string(OutputFormat format) { return format == OutputFormat::Json ? "json" : "csv"; }

ordered_json hyperparams_json(const Hyperparams& hp) {
  ordered_json j;
  j["knn_k"] = hp.knn_k;
  j["svm_c"] = hp.svm_c;
  j["svm_epochs"] = hp.svm_epochs;
  j["logreg_learning_rate"] = hp.logreg_learning_rate;
  j["logreg_epochs"] = hp.logreg_epochs;
  j["mlp_learning_rate"] = hp.mlp_learning_rate;
  j["mlp_hidden"] = hp.mlp_hidden;
  j["mlp_epochs"] = hp.mlp_epochs;
  j["tree_max_depth"] = hp.tree_max_depth ? ordered_json(*hp.tree_max_depth) : ordered_json(nullptr);
  j["tree_min_samples_split"] = hp.tree_min_samples_split;
  j["forest_trees"] = hp.forest_trees;
  j["forest_feature_subset"] = hp.forest_feature_subset;
  j["forest_bootstrap"] = hp.forest_bootstrap;
  return j;
}

Hyperparams hyperparams_from_json(const json& j) {
  Hyperparams hp;
  hp.knn_k = j.at("knn_k").get<int>();
  hp.svm_c = j.at("svm_c").get<double>();
  hp.svm_epochs = j.at("svm_epochs").get<int>();
  hp.logreg_learning_rate = j.at("logreg_learning_rate").get<double>();
  hp.logreg_epochs = j.at("logreg_epochs").get<int>();
  hp.mlp_learning_rate = j.at("mlp_learning_rate").get<double>();
  hp.mlp_hidden = j.at("mlp_hidden").get<int>();
  hp.mlp_epochs = j.at("mlp_epochs").get<int>();
  if (!j.at("tree_max_depth").is_null()) hp.tree_max_depth = j.at("tree_max_depth").get<int>();
  hp.tree_min_samples_split = j.at("tree_min_samples_split").get<int>();
  hp.forest_trees = j.at("forest_trees").get<int>();
  hp.forest_feature_subset = j.at("forest_feature_subset").get<int>();
  hp.forest_bootstrap = j.at("forest_bootstrap").get<bool>();
  return hp;
}

ClassifierKind classifier_from_json(const json& j) {
  const auto name = j.get<std::string>();
  const auto kind = parse_classifier(name);
  if (!kind) throw Error("report names unknown classifier '" + name + "'");
  return *kind;
}

Phase phase_from_json(const json& j) {
  const auto name = j.get<std::string>();
  const auto phase = parse_phase(name);
  if (!phase) throw Error("report names unknown phase '" + name + "'");
  return *phase;
}

void check_summary(const RunSummary& stored, const RunSummary& rebuilt) {
  if (!(stored == rebuilt)) {
    throw Error("summary for " + std::string(to_string(stored.classifier)) + " at " +
                format_double(stored.train_fraction) + " does not match its per-trial records");
  }
}

std::string fixed2(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 2);
  return std::string(buf, ptr);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace

void RunConfig::validate() const {
  if (rounds < 1) throw Error("rounds must be at least 1");
  if (classifiers.empty()) throw Error("at least one classifier is required");
  if (fractions.empty()) throw Error("at least one split fraction is required");
  for (const double f : fractions) {
    if (!(f > 0.0 && f < 1.0)) throw Error("split fractions must lie strictly between 0 and 1");
  }
  hp.validate();
}

ProtocolConfig RunConfig::protocol() const {
  ProtocolConfig p;
  p.classifiers = classifiers;
  p.fractions = fractions;
  p.rounds = rounds;
  p.phase = phase;
  p.master_seed = master_seed;
  p.hp = hp;
  p.stratified = stratified;
  return p;
}

double percent8(double accuracy) { return std::round(accuracy * 1e10) / 1e8; }

std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, 16);
  std::string digits(buf, ptr);
  return std::string(16 - digits.size(), '0') + digits;
}

void verify_report(const Report& report) {
  for (const RunSummary& s : report.summaries) {
    for (const TrialResult& t : s.per_trial) {
      if (t.test_size == 0 || t.correct > t.test_size ||
          t.accuracy != static_cast<double>(t.correct) / static_cast<double>(t.test_size)) {
        throw Error("trial " + std::to_string(t.trial_index) + " of " + std::string(to_string(s.classifier)) +
                    " has an inconsistent accuracy");
      }
    }
    check_summary(s, summarize(s.per_trial));
  }
}

nlohmann::ordered_json to_json(const Report& report) {
  ordered_json doc;
  doc["schema_version"] = report.schema_version;
  doc["tool"] = "minacc";
  doc["tool_version"] = report.tool_version;
  doc["timestamp"] = report.timestamp ? ordered_json(*report.timestamp) : ordered_json(nullptr);
  doc["dataset"] = {{"path", report.config.data_path.generic_string()},
                    {"size", report.dataset_size},
                    {"fingerprint", report.dataset_fingerprint}};

  ordered_json config;
  config["classifiers"] = ordered_json::array();
  for (const ClassifierKind k : report.config.classifiers) config["classifiers"].push_back(to_string(k));
  config["fractions"] = report.config.fractions;
  config["rounds"] = report.config.rounds;
  config["phase"] = to_string(report.config.phase);
  config["master_seed"] = report.config.master_seed;
  config["stratified"] = report.config.stratified;
  config["output_format"] = to_string(report.config.format);
  config["hyperparameters"] = hyperparams_json(report.config.hp);
  config["seed_derivation"] = kSeedDerivation;
  doc["config"] = std::move(config);

  ordered_json summaries = ordered_json::array();
  for (const RunSummary& s : report.summaries) {
    ordered_json block;
    block["classifier"] = to_string(s.classifier);
    block["fraction"] = s.train_fraction;
    block["phase"] = to_string(s.phase);
    block["rounds"] = s.rounds;
    block["min_accuracy_percent"] = percent8(s.min_accuracy);
    block["mean_accuracy_percent"] = percent8(s.mean_accuracy);
    block["max_accuracy_percent"] = percent8(s.max_accuracy);
    block["perfect_count"] = s.perfect_count;
    block["mean_contamination_fraction"] = s.mean_contamination;
    ordered_json trials = ordered_json::array();
    for (const TrialResult& t : s.per_trial) {
      trials.push_back({{"trial_index", t.trial_index},
                        {"split_seed", t.split.seed},
                        {"model_seed", t.model_seed},
                        {"correct", t.correct},
                        {"test_size", t.test_size},
                        {"accuracy", t.accuracy},
                        {"contamination_fraction", t.contamination_fraction}});
    }
    block["trials"] = std::move(trials);
    summaries.push_back(std::move(block));
  }
  doc["summaries"] = std::move(summaries);
  return doc;
}

Report report_from_json(const nlohmann::json& doc) {
  try {
    Report report;
    report.schema_version = doc.at("schema_version").get<int>();
    if (report.schema_version != kReportSchemaVersion) {
      throw Error("unsupported report schema version " + std::to_string(report.schema_version));
    }
    report.tool_version = doc.at("tool_version").get<std::string>();
    if (!doc.at("timestamp").is_null()) report.timestamp = doc.at("timestamp").get<std::string>();
    const json& dataset = doc.at("dataset");
    report.config.data_path = dataset.at("path").get<std::string>();
    report.dataset_size = dataset.at("size").get<std::size_t>();
    report.dataset_fingerprint = dataset.at("fingerprint").get<std::string>();

    const json& config = doc.at("config");
    report.config.classifiers.clear();
    for (const json& k : config.at("classifiers")) report.config.classifiers.push_back(classifier_from_json(k));
    report.config.fractions = config.at("fractions").get<std::vector<double>>();
    report.config.rounds = config.at("rounds").get<std::size_t>();
    report.config.phase = phase_from_json(config.at("phase"));
    report.config.master_seed = config.at("master_seed").get<std::uint64_t>();
    report.config.stratified = config.at("stratified").get<bool>();
    report.config.format = config.at("output_format").get<std::string>() == "csv" ? OutputFormat::Csv : OutputFormat::Json;
    report.config.hp = hyperparams_from_json(config.at("hyperparameters"));

    for (const json& block : doc.at("summaries")) {
      const ClassifierKind kind = classifier_from_json(block.at("classifier"));
      const Phase phase = phase_from_json(block.at("phase"));
      const double fraction = block.at("fraction").get<double>();
      std::vector<TrialResult> trials;
      for (const json& t : block.at("trials")) {
        TrialResult r;
        r.classifier = kind;
        r.phase = phase;
        r.split = SplitSpec{fraction, t.at("split_seed").get<std::uint64_t>(), report.config.stratified};
        r.model_seed = t.at("model_seed").get<std::uint64_t>();
        r.trial_index = t.at("trial_index").get<std::size_t>();
        r.correct = t.at("correct").get<std::size_t>();
        r.test_size = t.at("test_size").get<std::size_t>();
        r.accuracy = t.at("accuracy").get<double>();
        r.contamination_fraction = t.at("contamination_fraction").get<double>();
        trials.push_back(r);
      }
      RunSummary rebuilt = summarize(trials);
      const bool printed_ok = block.at("rounds").get<std::size_t>() == rebuilt.rounds &&
                              block.at("min_accuracy_percent").get<double>() == percent8(rebuilt.min_accuracy) &&
                              block.at("mean_accuracy_percent").get<double>() == percent8(rebuilt.mean_accuracy) &&
                              block.at("max_accuracy_percent").get<double>() == percent8(rebuilt.max_accuracy) &&
                              block.at("perfect_count").get<std::size_t>() == rebuilt.perfect_count &&
                              block.at("mean_contamination_fraction").get<double>() == rebuilt.mean_contamination;
      if (!printed_ok) {
        throw Error("summary for " + std::string(to_string(kind)) + " disagrees with its trial records");
      }
      report.summaries.push_back(std::move(rebuilt));
    }
    verify_report(report);
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed report: ") + e.what());
  }
}

std::string trace_file_name(const RunSummary& summary) {
  return std::string(to_string(summary.classifier)) + "_" + fixed2(summary.train_fraction) + "_" +
         std::string(to_string(summary.phase)) + ".csv";
}

std::vector<std::filesystem::path> emit_plot_data(const std::vector<RunSummary>& summaries,
                                                  const std::filesystem::path& out_dir) {
  if (summaries.empty()) throw Error("no summaries to write");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create " + out_dir.string() + ": " + ec.message());

  std::vector<std::filesystem::path> written;
  std::string aggregate = "classifier,fraction,phase,min,mean,max,perfect_count\n";
  for (const RunSummary& s : summaries) {
    std::string trace = "trial_index,accuracy\n";
    for (const TrialResult& t : s.per_trial) {
      trace += std::to_string(t.trial_index) + "," + format_double(t.accuracy) + "\n";
    }
    written.push_back(out_dir / trace_file_name(s));
    write_file(written.back(), trace);

    aggregate += std::string(to_string(s.classifier)) + "," + fixed2(s.train_fraction) + "," +
                 std::string(to_string(s.phase)) + "," + format_double(s.min_accuracy) + "," +
                 format_double(s.mean_accuracy) + "," + format_double(s.max_accuracy) + "," +
                 std::to_string(s.perfect_count) + "\n";
  }
  written.push_back(out_dir / kAggregateFileName);
  write_file(written.back(), aggregate);
  return written;
}

}  // namespace minacc
