#include <gtest/gtest.h>

#include <sstream>

#include "collab/dataset.hpp"
#include "collab/random.hpp"
#include "collab/schema.hpp"
#include "collab/table.hpp"
#include "test_util.hpp"

namespace collab {
namespace {

RawTable csv(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

TEST(Schema, BinaryColumnsStaySingle) {
  const RawTable t = csv("a,b,c,y\n0,1,0,1\n1,0,1,2\n1,1,0,3\n");
  const std::vector<ColumnSpec> specs = {{"a", ColumnRole::Binary},
                                         {"b", ColumnRole::Binary},
                                         {"c", ColumnRole::Binary},
                                         {"y", ColumnRole::Response}};
  const FeatureSchema s = build_schema(t, specs);
  EXPECT_EQ(s.num_groups(), 3u);
  EXPECT_EQ(s.num_multi, 0u);
  EXPECT_EQ(s.num_features, 3u);
  EXPECT_NO_THROW(s.validate());
}

TEST(Schema, BinnedContinuousHasEqualCountBins) {
  std::string text = "x,y\n";
  for (int i = 0; i < 100; ++i) text += std::to_string(i * 0.37 - 5) + "," + std::to_string(i) + "\n";
  const RawTable t = csv(text);
  const std::vector<ColumnSpec> specs = {{"x", ColumnRole::Continuous}, {"y", ColumnRole::Response}};
  const FeatureSchema s = build_schema(t, specs, 5);
  ASSERT_EQ(s.num_groups(), 1u);
  EXPECT_EQ(s.num_multi, 1u);
  EXPECT_EQ(s.num_features, 5u);
  EXPECT_EQ(s.groups[0].kind, GroupKind::BinnedContinuous);

  const Matrix x = encode(t, s).x;
  std::vector<int> counts(5, 0);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    int hot = 0;
    for (std::size_t j = 0; j < 5; ++j) {
      if (x(i, j) == 1.0) {
        ++counts[j];
        ++hot;
      }
    }
    EXPECT_EQ(hot, 1);
  }
  for (int c : counts) EXPECT_EQ(c, 20);
}

TEST(Schema, CategoricalBecomesOneHotBlock) {
  const RawTable t = csv("c,y\na,1\nb,2\nc,3\n");
  const std::vector<ColumnSpec> specs = {{"c", ColumnRole::Categorical}, {"y", ColumnRole::Response}};
  const FeatureSchema s = build_schema(t, specs);
  EXPECT_EQ(s.num_features, 3u);
  EXPECT_EQ(s.num_multi, 1u);
  const Matrix x = encode(t, s).x;
  EXPECT_EQ(x(1, 0), 0.0);
  EXPECT_EQ(x(1, 1), 1.0);
  EXPECT_EQ(x(1, 2), 0.0);
}

TEST(Schema, MultiFeatureGroupsComeFirst) {
  const RawTable t = csv("b,c,x,y\n0,a,1.5,1\n1,b,2.5,2\n1,a,0.5,3\n");
  const std::vector<ColumnSpec> specs = {{"b", ColumnRole::Binary},
                                         {"c", ColumnRole::Categorical},
                                         {"x", ColumnRole::Continuous},
                                         {"y", ColumnRole::Response}};
  const FeatureSchema s = build_schema(t, specs);
  ASSERT_EQ(s.num_groups(), 3u);
  EXPECT_EQ(s.groups[0].name, "c");
  EXPECT_EQ(s.num_multi, 1u);
  EXPECT_NO_THROW(s.validate());
}

TEST(Schema, Errors) {
  const RawTable t = csv("x,z,y\n1,2,1\n1,3,2\n");
  const std::vector<ColumnSpec> constant = {
      {"x", ColumnRole::Continuous}, {"z", ColumnRole::Ignore}, {"y", ColumnRole::Response}};
  EXPECT_COLLAB_ERROR(build_schema(t, constant), ErrorCategory::Schema);
  const std::vector<ColumnSpec> missing = {{"z", ColumnRole::Continuous}, {"y", ColumnRole::Response}};
  EXPECT_COLLAB_ERROR(build_schema(t, missing), ErrorCategory::Config);
  EXPECT_COLLAB_ERROR(parse_role("ordinal"), ErrorCategory::Config);
  try {
    build_schema(t, constant);
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'x'"), std::string::npos);
  }
}

TEST(Schema, ColumnSpecSidecar) {
  std::istringstream in("# roles\nx continuous\nc=categorical\n\ny response\n");
  const auto specs = parse_column_specs(in);
  ASSERT_EQ(specs.size(), 3u);
  EXPECT_EQ(specs[1].name, "c");
  EXPECT_EQ(specs[1].role, ColumnRole::Categorical);
  EXPECT_EQ(specs[2].role, ColumnRole::Response);
}

TEST(Encode, TwoPointsTwoBins) {
  const RawTable t = csv("x,y\n0.1,0\n0.9,1\n");
  const std::vector<ColumnSpec> specs = {{"x", ColumnRole::Continuous}, {"y", ColumnRole::Response}};
  const FeatureSchema s = build_schema(t, specs, 2);
  const Matrix x = encode(t, s).x;
  ASSERT_EQ(x.cols(), 2u);
  EXPECT_EQ(x(0, 0), 1.0);
  EXPECT_EQ(x(0, 1), 0.0);
  EXPECT_EQ(x(1, 0), 0.0);
  EXPECT_EQ(x(1, 1), 1.0);
}

TEST(Encode, CentersResponse) {
  const EncodedDataset d = make_dataset(Matrix(4, 1), std::vector<double>{1, 3, 5, 7});
  EXPECT_EQ(d.y_mean, 4.0);
  EXPECT_EQ(d.y, (std::vector<double>{-3, -1, 1, 3}));
}

TEST(Encode, UnseenLevelIsRejected) {
  const RawTable train = csv("c,y\na,1\nb,2\n");
  const std::vector<ColumnSpec> specs = {{"c", ColumnRole::Categorical}, {"y", ColumnRole::Response}};
  const FeatureSchema s = build_schema(train, specs);
  EXPECT_COLLAB_ERROR(encode(csv("c,y\nz,1\n"), s), ErrorCategory::Encode);
  EXPECT_COLLAB_ERROR(encode(csv("c,y\na,\n"), s), ErrorCategory::Encode);
}

TEST(Encode, DecodeRoundTrip) {
  const RawTable t = csv("c,b,y\na,0,1\nc,1,2\nb,1,3\n");
  const std::vector<ColumnSpec> specs = {
      {"c", ColumnRole::Categorical}, {"b", ColumnRole::Binary}, {"y", ColumnRole::Response}};
  const FeatureSchema s = build_schema(t, specs);
  const Matrix x = encode(t, s).x;
  for (std::size_t i = 0; i < t.num_rows(); ++i) {
    for (const auto& g : s.groups) {
      const std::size_t level = decode_group_level(x.row(i), g);
      EXPECT_EQ(g.categories[level], t.rows[i][t.column_index(g.name)]);
    }
  }
}

TEST(Table, QuotedFieldsAndNumbers) {
  const auto cells = split_csv_line(R"(a,"b,c","say ""hi""",)");
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[1], "b,c");
  EXPECT_EQ(cells[2], "say \"hi\"");
  EXPECT_EQ(parse_number(" 2.5 "), 2.5);
  EXPECT_FALSE(parse_number("2.5x"));
  EXPECT_FALSE(parse_number(""));
}

TEST(Random, DerivedStreamsAreReproducible) {
  Rng a = Rng::derive(42, 3);
  Rng b = Rng::derive(42, 3);
  Rng c = Rng::derive(42, 4);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next(), b.next());
  EXPECT_NE(Rng::derive(42, 3).next(), c.next());
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.index(7), 7u);
  }
}

}  // namespace
}  // namespace collab
