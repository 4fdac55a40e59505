#pragma once

#include <gtest/gtest.h>

#include <cstddef>
#include <string>
#include <vector>

#include "collab/error.hpp"
#include "collab/schema.hpp"

namespace collab::test {

// Fails unless `expr` throws collab::Error of the given category.
#define EXPECT_COLLAB_ERROR(expr, cat)                                      \
  do {                                                                      \
    try {                                                                   \
      (void)(expr);                                                         \
      ADD_FAILURE() << "expected " << ::collab::category_name(cat) << " error"; \
    } catch (const ::collab::Error& e) {                                    \
      EXPECT_EQ(e.category(), cat) << e.what();                             \
    }                                                                       \
  } while (0)

inline FeatureSchema single_schema(std::size_t p, GroupKind kind) {
  FeatureSchema schema;
  for (std::size_t j = 0; j < p; ++j) {
    schema.groups.push_back({"x" + std::to_string(j + 1), kind, {j}, {}, {}});
  }
  schema.num_features = p;
  return schema;
}

// Multi-feature one-hot groups of the given widths followed by single groups.
inline FeatureSchema mixed_schema(const std::vector<std::size_t>& widths, std::size_t singles) {
  FeatureSchema schema;
  std::size_t col = 0;
  for (std::size_t w : widths) {
    GroupSpec g{"g" + std::to_string(schema.groups.size() + 1), GroupKind::CategoricalOneHot, {}, {}, {}};
    for (std::size_t j = 0; j < w; ++j) g.columns.push_back(col++);
    schema.groups.push_back(std::move(g));
  }
  schema.num_multi = widths.size();
  for (std::size_t j = 0; j < singles; ++j) {
    schema.groups.push_back({"s" + std::to_string(j + 1), GroupKind::ContinuousSingle, {col++}, {}, {}});
  }
  schema.num_features = col;
  return schema;
}

}  // namespace collab::test
