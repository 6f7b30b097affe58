#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <unistd.h>

#include "minacc/cli.hpp"
#include "minacc/error.hpp"
#include "minacc/report.hpp"
#include "test_support.hpp"

namespace minacc {
namespace {

namespace fs = std::filesystem;
using test::wdbc;

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() /
            ("minacc_" + std::string(info->name()) + "_" + std::to_string(::getpid()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<RunSummary> synthetic_summaries(std::size_t rounds) {
  std::vector<RunSummary> out;
  std::uint64_t salt = 1;
  for (ClassifierKind kind : kAllClassifiers) {
    for (double f : {0.5, 0.6, 0.7, 0.8}) {
      std::vector<TrialResult> trials;
      const std::size_t test_size = 569 - train_size_for(569, f);
      for (std::size_t i = 0; i < rounds; ++i) {
        TrialResult t;
        t.classifier = kind;
        t.split = SplitSpec{f, mix64(salt++)};
        t.model_seed = mix64(salt++);
        t.trial_index = i;
        t.test_size = test_size;
        t.correct = test_size - (mix64(salt++) % 12);
        t.accuracy = static_cast<double>(t.correct) / static_cast<double>(test_size);
        trials.push_back(t);
      }
      out.push_back(summarize(trials));
    }
  }
  return out;
}

Report small_report() {
  Report r;
  r.config.data_path = test::wdbc_path();
  r.config.classifiers = {ClassifierKind::NaiveBayes, ClassifierKind::LogisticRegression};
  r.config.fractions = {0.7, 0.8};
  r.config.rounds = 3;
  r.config.phase = Phase::Doubled;
  r.dataset_size = wdbc().size();
  r.dataset_fingerprint = hex64(fingerprint(wdbc()));
  r.timestamp = "2026-01-01T00:00:00Z";
  r.summaries = run_protocol(wdbc(), r.config.protocol());
  return r;
}

TEST(ReportJson, RoundTripPreservesSummaries) {
  const Report r = small_report();
  verify_report(r);
  const nlohmann::json doc = nlohmann::json::parse(to_json(r).dump());
  const Report back = report_from_json(doc);
  EXPECT_EQ(back.summaries, r.summaries);
  EXPECT_EQ(back.config.classifiers, r.config.classifiers);
  EXPECT_EQ(back.config.phase, r.config.phase);
  EXPECT_EQ(back.config.hp, r.config.hp);
  EXPECT_EQ(back.dataset_fingerprint, r.dataset_fingerprint);
  EXPECT_EQ(back.timestamp, r.timestamp);
  EXPECT_EQ(doc["summaries"].size(), 4u);
  EXPECT_EQ(doc["summaries"][0]["trials"].size(), 3u);
}

TEST(ReportJson, TamperingIsDetected) {
  Report r = small_report();
  nlohmann::json doc = to_json(r);
  doc["summaries"][1]["mean_accuracy_percent"] = doc["summaries"][1]["mean_accuracy_percent"].get<double>() + 0.5;
  EXPECT_THROW(report_from_json(doc), Error);

  r.summaries[0].max_accuracy = 1.0;
  EXPECT_THROW(verify_report(r), Error);
}

TEST(ReportJson, PercentRounding) {
  EXPECT_EQ(percent8(1.0), 100.0);
  EXPECT_EQ(percent8(169.0 / 171.0), 98.83040936);
  EXPECT_EQ(hex64(0x1d70b98a3c30869eULL), "1d70b98a3c30869e");
}

TEST(PlotData, OneTracePerSummaryPlusAggregate) {
  TempDir dir;
  const auto summaries = synthetic_summaries(100);
  const auto files = emit_plot_data(summaries, dir.path());
  ASSERT_EQ(files.size(), 33u);
  EXPECT_EQ(files.back().filename(), kAggregateFileName);

  for (std::size_t s = 0; s < summaries.size(); ++s) {
    EXPECT_EQ(files[s].filename(), trace_file_name(summaries[s]));
    const std::string text = slurp(files[s]);
    EXPECT_EQ(text.find('\r'), std::string::npos);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    ASSERT_EQ(line, "trial_index,accuracy");
    std::vector<double> acc;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      ASSERT_EQ(std::stoul(line.substr(0, comma)), acc.size());
      acc.push_back(std::stod(line.substr(comma + 1)));
    }
    ASSERT_EQ(acc.size(), 100u);
    double sum = 0, lo = 1, hi = 0;
    for (double a : acc) {
      sum += a;
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    EXPECT_NEAR(sum / 100, summaries[s].mean_accuracy, 1e-12);
    EXPECT_EQ(lo, summaries[s].min_accuracy);
    EXPECT_EQ(hi, summaries[s].max_accuracy);
  }

  std::istringstream agg(slurp(files.back()));
  std::string line;
  std::getline(agg, line);
  EXPECT_EQ(line, "classifier,fraction,phase,min,mean,max,perfect_count");
  std::size_t rows = 0;
  while (std::getline(agg, line)) ++rows;
  EXPECT_EQ(rows, 32u);
}

TEST(PlotData, TraceNames) {
  RunSummary s;
  s.classifier = ClassifierKind::KNearestNeighbor;
  s.train_fraction = 0.8;
  s.phase = Phase::DoubledAfterSplit;
  EXPECT_EQ(trace_file_name(s), "knn_0.80_doubled-after-split.csv");
}

TEST(PlotData, UnwritableDirectoryFails) {
  TempDir dir;
  const fs::path blocker = dir.path() / "file";
  std::ofstream(blocker) << "x";
  EXPECT_THROW(emit_plot_data(synthetic_summaries(2), blocker / "sub"), std::exception);
}

TEST(Cli, FloorTable) {
  const CliResult r = cli({"floor-table", "--n", "2,30,100"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out,
            "input,misclassification,accuracy_percent\n"
            "2,1,50.00000000\n"
            "30,1,96.66666667\n"
            "100,1,99.00000000\n");
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--data", test::wdbc_path().string(), "--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--data", test::wdbc_path().string(), "--classifiers", "svm2"}).code, kExitUsage);
  EXPECT_EQ(cli({"run", "--data", test::wdbc_path().string(), "--fractions", "1.5"}).code, kExitUsage);
  EXPECT_EQ(cli({"floor-table", "--n", "3", "--m", "4"}).code, kExitUsage);
  const CliResult help = cli({"--help"});
  EXPECT_EQ(help.code, kExitOk);
  EXPECT_NE(help.out.find("floor-table"), std::string::npos);
}

TEST(Cli, DataErrors) {
  TempDir dir;
  EXPECT_EQ(cli({"run", "--data", (dir.path() / "missing.data").string(), "--rounds", "1"}).code, kExitData);

  const fs::path bad = dir.path() / "bad.data";
  std::ofstream(bad) << "1,M,1.0\n";
  const CliResult r = cli({"double", "--data", bad.string(), "--out", (dir.path() / "o").string()});
  EXPECT_EQ(r.code, kExitData);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST(Cli, DoubleAugmentAndCanonicalCheck) {
  TempDir dir;
  const fs::path doubled = dir.path() / "doubled.data";
  ASSERT_EQ(cli({"double", "--data", test::wdbc_path().string(), "--out", doubled.string()}).code, kExitOk);
  EXPECT_EQ(serialize_wdbc(load_wdbc(doubled)), serialize_wdbc(double_dataset(wdbc())));

  const fs::path augmented = dir.path() / "aug.data";
  ASSERT_EQ(cli({"augment", "--data", test::wdbc_path().string(), "--offspring", "31", "--out", augmented.string()})
                .code,
            kExitOk);
  EXPECT_EQ(load_wdbc(augmented).size(), 600u);

  const std::vector<std::string> base{"--rounds", "1", "--classifiers", "naive-bayes", "--fractions",
                                      "0.7",      "--no-timestamp", "--expect-canonical", "--out",
                                      (dir.path() / "out").string()};
  std::vector<std::string> ok{"run", "--data", test::wdbc_path().string()};
  ok.insert(ok.end(), base.begin(), base.end());
  EXPECT_EQ(cli(ok).code, kExitOk);
  std::vector<std::string> not_canonical{"run", "--data", doubled.string()};
  not_canonical.insert(not_canonical.end(), base.begin(), base.end());
  EXPECT_EQ(cli(not_canonical).code, kExitData);
}

TEST(Cli, RunIsReproducibleWithoutTimestamp) {
  TempDir dir;
  auto run_into = [&](const std::string& name) {
    const fs::path out = dir.path() / name;
    const CliResult r = cli({"run", "--data", test::wdbc_path().string(), "--classifiers", "knn,svm", "--fractions",
                             "0.6,0.8", "--rounds", "4", "--phase", "doubled", "--no-timestamp", "--out",
                             out.string()});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return out;
  };
  const fs::path a = run_into("a");
  const fs::path b = run_into("b");
  const std::string report = slurp(a / "report.json");
  EXPECT_EQ(report, slurp(b / "report.json"));
  EXPECT_EQ(slurp(a / kAggregateFileName), slurp(b / kAggregateFileName));

  const nlohmann::json doc = nlohmann::json::parse(report);
  EXPECT_TRUE(doc["timestamp"].is_null());
  EXPECT_EQ(doc["dataset"]["fingerprint"], "1d70b98a3c30869e");
  EXPECT_EQ(report_from_json(doc).summaries.size(), 4u);
}

TEST(Cli, CsvFormatSkipsJson) {
  TempDir dir;
  const CliResult r = cli({"run", "--data", test::wdbc_path().string(), "--classifiers", "naive-bayes", "--fractions",
                           "0.5", "--rounds", "2", "--format", "csv", "--out", dir.path().string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_FALSE(fs::exists(dir.path() / "report.json"));
  EXPECT_TRUE(fs::exists(dir.path() / kAggregateFileName));
}

TEST(Cli, LeakageSweepJson) {
  const CliResult r = cli({"leakage", "--data", test::wdbc_path().string(), "--seeds", "10"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const nlohmann::json doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["phase"], "doubled");
  EXPECT_EQ(doc["splits"].size(), 10u);
  EXPECT_EQ(doc["duplicate_group_count"], 569);
  EXPECT_GT(doc["mean_contamination_fraction"].get<double>(), 0.7);
}

}  // namespace
}  // namespace minacc
