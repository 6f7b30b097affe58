#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "minacc/data.hpp"
#include "minacc/error.hpp"
#include "minacc/split.hpp"
#include "test_support.hpp"

namespace minacc {
namespace {

using test::make_sample;
using test::wdbc;

std::string zero_line(std::string_view id, std::string_view diagnosis) {
  std::string line = std::string(id) + "," + std::string(diagnosis);
  for (int j = 0; j < kFeatureCount; ++j) line += ",0.0";
  return line;
}

TEST(ParseWdbc, CanonicalFileCounts) {
  const Dataset& data = wdbc();
  EXPECT_EQ(data.size(), 569u);
  EXPECT_EQ(data.count(Label::Malignant), 212u);
  EXPECT_EQ(data.count(Label::Benign), 357u);
  EXPECT_EQ(data.provenance(), Provenance::Original);
  EXPECT_TRUE(is_canonical_wdbc(data));
}

TEST(ParseWdbc, ColumnMeansMatchIndependentRecomputation) {
  // Exact decimal means of the 30 columns, recomputed from the raw text
  // outside this code base.
  constexpr std::array<double, kFeatureCount> kMeans = {
      14.127291739894552,   19.289648506151142,  91.96903339191564,   654.8891036906854,   0.09636028119507908,
      0.1043409841827768,   0.0887993158172232,  0.04891914586994728, 0.18116186291739894, 0.06279760984182776,
      0.4051720562390158,   1.2168534270650264,  2.8660592267135323,  40.33707908611599,   0.007040978910369068,
      0.0254781388400703,   0.031893716344463974, 0.011796137082601054, 0.02054229876977153, 0.0037949038664323374,
      16.269189806678384,   25.677223198594024,  107.26121265377856,  880.5831282952548,   0.13236859402460457,
      0.2542650439367311,   0.27218848330404216, 0.11460622319859402, 0.2900755711775044,  0.08394581722319859,
  };
  const Eigen::VectorXd means = wdbc().features().colwise().mean().transpose();
  for (int j = 0; j < kFeatureCount; ++j) {
    EXPECT_NEAR(means[j], kMeans[static_cast<std::size_t>(j)], 1e-9 * std::abs(kMeans[static_cast<std::size_t>(j)]))
        << "column " << j;
  }
}

TEST(ParseWdbc, SingleZeroLine) {
  const Dataset data = parse_wdbc(zero_line("1", "M"));
  ASSERT_EQ(data.size(), 1u);
  EXPECT_EQ(data[0].id, 1);
  EXPECT_EQ(data[0].label, Label::Malignant);
  EXPECT_TRUE(data[0].features.isZero(0.0));
}

TEST(ParseWdbc, SkipsBlankLinesAndAcceptsCrlf) {
  const Dataset data = parse_wdbc("\n" + zero_line("7", "B") + "\r\n\n" + zero_line("8", "M") + "\r\n");
  ASSERT_EQ(data.size(), 2u);
  EXPECT_EQ(data[0].id, 7);
  EXPECT_EQ(data[1].label, Label::Malignant);
}

TEST(ParseWdbc, ErrorsCarryLineNumbers) {
  const std::string good = zero_line("1", "B");
  auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse_wdbc(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of(good + "\n" + good + ",1.0\n"), 2u);             // 33 fields
  EXPECT_EQ(line_of(good + "\n\n" + zero_line("2", "X") + "\n"), 3u);  // unknown diagnosis
  std::string bad_number = good;
  bad_number.replace(bad_number.rfind("0.0"), 3, "abc");
  EXPECT_EQ(line_of(bad_number), 1u);
  std::string nan_value = good;
  nan_value.replace(nan_value.rfind("0.0"), 3, "nan");
  EXPECT_EQ(line_of(nan_value), 1u);
  EXPECT_EQ(line_of("x" + good.substr(1)), 1u);  // bad id
  EXPECT_THROW(parse_wdbc(""), ParseError);
  EXPECT_THROW(parse_wdbc("\n\n"), ParseError);
}

TEST(SerializeWdbc, RoundTripIsIdentity) {
  EXPECT_EQ(parse_wdbc(serialize_wdbc(wdbc())), wdbc());

  // Awkward doubles: subnormals, huge magnitudes, negative zero.
  Rng rng(7);
  std::vector<Sample> samples;
  for (int i = 0; i < 50; ++i) {
    Sample s;
    s.id = static_cast<std::int64_t>(rng.next() >> 2);
    s.label = rng.coin() ? Label::Malignant : Label::Benign;
    for (int j = 0; j < kFeatureCount; ++j) {
      const double mantissa = rng.uniform(-1.0, 1.0);
      s.features[j] = std::ldexp(mantissa, static_cast<int>(rng.uniform_index(2000)) - 1000);
    }
    samples.push_back(s);
  }
  samples[0].features[0] = -0.0;
  samples[1].features[1] = std::numeric_limits<double>::denorm_min();
  samples[2].features[2] = std::numeric_limits<double>::max();
  const Dataset random(std::move(samples), Provenance::Original);
  EXPECT_EQ(parse_wdbc(serialize_wdbc(random)), random);
}

TEST(Standardizer, TwoPointColumn) {
  const Dataset data({make_sample(1, Label::Benign, {0.0}), make_sample(2, Label::Malignant, {2.0})},
                     Provenance::Original);
  const StandardizationParams p = fit_standardizer(data);
  EXPECT_DOUBLE_EQ(p.means[0], 1.0);
  EXPECT_DOUBLE_EQ(p.stddevs[0], 1.0);
}

TEST(Standardizer, ConstantColumnGetsUnitDeviation) {
  Eigen::MatrixXd x(3, 2);
  x << 5, 1, 5, 2, 5, 4;
  const StandardizationParams p = fit_standardizer(x);
  EXPECT_DOUBLE_EQ(p.means[0], 5.0);
  EXPECT_DOUBLE_EQ(p.stddevs[0], 1.0);
  EXPECT_NEAR(p.stddevs[1], std::sqrt(14.0 / 9.0), 1e-15);  // population deviation of {1,2,4}
}

TEST(Standardizer, EmptyDatasetThrows) { EXPECT_THROW(fit_standardizer(Dataset{}), Error); }

TEST(Standardizer, TrainingFoldHasZeroMeanUnitDeviation) {
  const SplitResult split = random_split(wdbc().size(), SplitSpec{0.7, 3});
  const Dataset train = wdbc().subset(split.train);
  const Eigen::MatrixXd z = apply_standardizer(fit_standardizer(train), train).features();
  const auto n = static_cast<double>(z.rows());
  for (int j = 0; j < kFeatureCount; ++j) {
    const double mean = z.col(j).mean();
    const double sd = std::sqrt((z.col(j).array() - mean).square().sum() / n);
    EXPECT_LT(std::abs(mean), 1e-9) << "column " << j;
    EXPECT_NEAR(sd, 1.0, 1e-9) << "column " << j;
  }
}

TEST(Standardizer, ApplyArithmetic) {
  StandardizationParams identity{Eigen::VectorXd::Zero(kFeatureCount), Eigen::VectorXd::Ones(kFeatureCount)};
  EXPECT_EQ(apply_standardizer(identity, wdbc()), wdbc());

  StandardizationParams p = identity;
  p.means[0] = 1.0;
  p.stddevs[0] = 2.0;
  const Dataset one({make_sample(4, Label::Benign, {3.0})}, Provenance::Original);
  const Dataset out = apply_standardizer(p, one);
  EXPECT_DOUBLE_EQ(out[0].features[0], 1.0);
  EXPECT_EQ(out[0].id, 4);
}

TEST(Standardizer, InverseRecoversOriginal) {
  const StandardizationParams p = fit_standardizer(wdbc());
  const Dataset z = apply_standardizer(p, wdbc());
  for (std::size_t i = 0; i < wdbc().size(); ++i) {
    const FeatureVector back = z[i].features.cwiseProduct(p.stddevs) + p.means;
    for (int j = 0; j < kFeatureCount; ++j) {
      EXPECT_NEAR(back[j], wdbc()[i].features[j], 1e-12 * std::max(1.0, std::abs(wdbc()[i].features[j])));
    }
  }
}

TEST(Standardizer, DimensionMismatchThrows) {
  StandardizationParams p{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)};
  EXPECT_THROW(apply_standardizer(p, wdbc()), Error);
}

TEST(DoubleDataset, DoublesCountsAndKeepsPrefix) {
  const Dataset doubled = double_dataset(wdbc());
  EXPECT_EQ(doubled.size(), 1138u);
  EXPECT_EQ(doubled.count(Label::Malignant), 424u);
  EXPECT_EQ(doubled.count(Label::Benign), 714u);
  EXPECT_EQ(doubled.provenance(), Provenance::Doubled);
  for (std::size_t i = 0; i < wdbc().size(); ++i) {
    ASSERT_EQ(doubled[i], wdbc()[i]);
    ASSERT_EQ(doubled[i + wdbc().size()], wdbc()[i]);
  }
}

TEST(DoubleDataset, SingleSample) {
  const Dataset one({make_sample(1, Label::Malignant, {1.5})}, Provenance::Original);
  const Dataset two = double_dataset(one);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_EQ(two[0], two[1]);
  EXPECT_THROW(double_dataset(Dataset{}), Error);
}

TEST(FindDuplicates, OriginalWdbcIsDuplicateFree) {
  EXPECT_TRUE(find_duplicates(wdbc()).empty());

  // Exhaustive pairwise scan as the oracle.
  const Eigen::MatrixXd x = wdbc().features();
  std::size_t identical_pairs = 0;
  for (Eigen::Index a = 0; a < x.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < x.rows(); ++b) {
      if ((x.row(a).array() == x.row(b).array()).all()) ++identical_pairs;
    }
  }
  EXPECT_EQ(identical_pairs, 0u);
}

TEST(FindDuplicates, DoubledWdbcHasOneTwinPerSample) {
  const auto groups = find_duplicates(double_dataset(wdbc()));
  ASSERT_EQ(groups.size(), 569u);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    ASSERT_EQ(groups[g].indices, (std::vector<std::size_t>{g, g + 569}));
    EXPECT_EQ(groups[g].labels[0], groups[g].labels[1]);
  }
}

TEST(FindDuplicates, SmallCases) {
  const Sample a = make_sample(1, Label::Benign, {1.0, 2.0});
  Sample a_relabelled = make_sample(2, Label::Malignant, {1.0, 2.0});
  const Sample b = make_sample(3, Label::Benign, {1.0, 3.0});
  const auto groups = find_duplicates(Dataset({a, a_relabelled, b}, Provenance::Original));
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(groups[0].labels, (std::vector<Label>{Label::Benign, Label::Malignant}));

  // Matching is bitwise: +0.0 and -0.0 differ.
  const Sample pos = make_sample(4, Label::Benign, {0.0});
  const Sample neg = make_sample(5, Label::Benign, {-0.0});
  EXPECT_TRUE(find_duplicates(Dataset({pos, neg}, Provenance::Original)).empty());
}

TEST(FindDuplicates, DoublingDuplicateFreeDataGivesOneGroupPerSample) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Sample> samples;
    const auto n = 1 + rng.uniform_index(40);
    for (std::uint64_t i = 0; i < n; ++i) {
      Sample s;
      s.id = static_cast<std::int64_t>(i);
      s.label = rng.coin() ? Label::Malignant : Label::Benign;
      for (int j = 0; j < kFeatureCount; ++j) s.features[j] = rng.uniform01();
      samples.push_back(s);
    }
    const Dataset d(std::move(samples), Provenance::Original);
    ASSERT_TRUE(find_duplicates(d).empty());
    EXPECT_EQ(find_duplicates(double_dataset(d)).size(), d.size());
  }
}

class Crossover : public ::testing::Test {
 protected:
  // Malignant parents 10/11 and Benign parents 20/21 differ in every feature.
  static Dataset four_parents() {
    std::vector<Sample> s(4);
    s[0].id = 10;
    s[0].label = Label::Malignant;
    s[1].id = 11;
    s[1].label = Label::Malignant;
    s[2].id = 20;
    s[3].id = 21;
    for (int j = 0; j < kFeatureCount; ++j) {
      s[0].features[j] = 100.0 + j;
      s[1].features[j] = 200.0 + j;
      s[2].features[j] = -100.0 - j;
      s[3].features[j] = -200.0 - j;
    }
    return Dataset(std::move(s), Provenance::Original);
  }
};

TEST_F(Crossover, EqualParentsGiveThatParent) {
  std::vector<Sample> s{make_sample(1, Label::Malignant, {1, 2, 3}), make_sample(2, Label::Malignant, {1, 2, 3}),
                        make_sample(3, Label::Benign, {4, 5, 6}), make_sample(4, Label::Benign, {4, 5, 6})};
  const Dataset parents(std::move(s), Provenance::Original);
  const Dataset out = crossover_augment(parents, 50, 1);
  for (std::size_t i = 4; i < out.size(); ++i) {
    const std::size_t parent = out[i].label == Label::Malignant ? 0 : 2;
    EXPECT_EQ(feature_key(out[i].features), feature_key(parents[parent].features));
  }
}

TEST_F(Crossover, OffspringLayoutAndIds) {
  const Dataset parents = four_parents();
  const Dataset out = crossover_augment(parents, 25, 9);
  ASSERT_EQ(out.size(), 29u);
  EXPECT_EQ(out.provenance(), Provenance::Augmented);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out[i], parents[i]);
  for (std::size_t i = 4; i < out.size(); ++i) {
    EXPECT_EQ(out[i].id, 21 + static_cast<std::int64_t>(i - 3));
    // Every gene comes from one of the two same-class parents.
    const std::size_t a = out[i].label == Label::Malignant ? 0 : 2;
    for (int j = 0; j < kFeatureCount; ++j) {
      const double v = out[i].features[j];
      EXPECT_TRUE(v == parents[a].features[j] || v == parents[a + 1].features[j]);
    }
  }
  EXPECT_EQ(crossover_augment(parents, 25, 9), out);
}

TEST_F(Crossover, GeneFrequenciesAreHalf) {
  const Dataset parents = four_parents();
  constexpr std::size_t kOffspring = 10000;
  const Dataset out = crossover_augment(parents, kOffspring, 2024);
  std::array<std::size_t, kFeatureCount> from_first{};
  std::size_t malignant = 0;
  for (std::size_t i = 4; i < out.size(); ++i) {
    const std::size_t first = out[i].label == Label::Malignant ? 0 : 2;
    if (out[i].label == Label::Malignant) ++malignant;
    for (int j = 0; j < kFeatureCount; ++j) {
      if (out[i].features[j] == parents[first].features[j]) ++from_first[static_cast<std::size_t>(j)];
    }
  }
  for (int j = 0; j < kFeatureCount; ++j) {
    EXPECT_NEAR(static_cast<double>(from_first[static_cast<std::size_t>(j)]) / kOffspring, 0.5, 0.02);
  }
  EXPECT_NEAR(static_cast<double>(malignant) / kOffspring, 0.5, 0.02);
}

TEST_F(Crossover, NeedsTwoParentsPerClass) {
  std::vector<Sample> s{make_sample(1, Label::Malignant, {1}), make_sample(2, Label::Benign, {2}),
                        make_sample(3, Label::Benign, {3})};
  EXPECT_THROW(crossover_augment(Dataset(std::move(s), Provenance::Original), 5, 1), Error);
  EXPECT_THROW(crossover_augment(four_parents(), 0, 1), Error);
}

TEST(Fingerprint, IgnoresIdsButNotValues) {
  std::vector<Sample> samples(wdbc().samples().begin(), wdbc().samples().end());
  for (Sample& s : samples) s.id += 1000;
  EXPECT_EQ(fingerprint(Dataset(samples, Provenance::Original)), kCanonicalWdbcFingerprint);
  samples[100].features[5] = std::nextafter(samples[100].features[5], 1e9);
  EXPECT_FALSE(is_canonical_wdbc(Dataset(samples, Provenance::Original)));
}

TEST(DatasetType, RejectsNonFiniteFeatures) {
  Sample s = make_sample(1, Label::Benign, {std::numeric_limits<double>::infinity()});
  EXPECT_THROW(Dataset({s}, Provenance::Original), Error);
  EXPECT_THROW(wdbc().subset(std::vector<std::size_t>{569}), Error);
}

}  // namespace
}  // namespace minacc
