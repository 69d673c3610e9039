// Copyright 2026 The wsloc Authors
// SPDX-License-Identifier: Apache-2.0

#include "wsloc/model.hpp"

#include <gtest/gtest.h>

#include "wsloc/error.hpp"

namespace wsloc {
namespace {

TEST(PartKindTest, ExactlyThreeKindsRoundTrip) {
  EXPECT_EQ(kAllPartKinds.size(), 3u);
  for (PartKind k : kAllPartKinds) EXPECT_EQ(parse_part_kind(to_string(k)), k);
  EXPECT_EQ(parse_part_kind("blade"), std::nullopt);
}

TEST(ClassNameTest, Normalization) {
  EXPECT_EQ(normalize_class_name("  Monopolar   Curved\tScissors "),
            "monopolar curved scissors");
  EXPECT_EQ(normalize_class_name("STAPLER"), "stapler");
}

struct SpecialCase {
  const char* name;
  bool special;
};

class SpecialListTest : public ::testing::TestWithParam<SpecialCase> {};

TEST_P(SpecialListTest, Membership) {
  EXPECT_EQ(is_special_name(GetParam().name), GetParam().special);
}

INSTANTIATE_TEST_SUITE_P(
    AllEntries, SpecialListTest,
    ::testing::Values(SpecialCase{"monopolar curved scissors", true},
                      SpecialCase{"tip-up fenestrated grasper", true},
                      SpecialCase{"suction irrigator", true},
                      SpecialCase{"stapler", true},
                      SpecialCase{"grasping retractor", true},
                      SpecialCase{"  Suction  IRRIGATOR", true},
                      SpecialCase{"needle driver", false},
                      SpecialCase{"bipolar forceps", false},
                      SpecialCase{"vessel sealer", false}));

TEST(ClassRegistryTest, AssignsIdsInInputOrder) {
  const auto reg = ClassRegistry::build({"needle driver", "monopolar curved scissors"});
  ASSERT_EQ(reg.size(), 2u);
  EXPECT_EQ(reg.at(0).name, "needle driver");
  EXPECT_FALSE(reg.at(0).is_special);
  EXPECT_EQ(reg.at(1).id, 1);
  EXPECT_TRUE(reg.at(1).is_special);
  EXPECT_EQ(reg.find("Monopolar Curved Scissors"), 1);
  EXPECT_EQ(reg.find("laser lance"), std::nullopt);
  EXPECT_EQ(reg.id_of("needle  driver"), 0);
}

TEST(ClassRegistryTest, Errors) {
  EXPECT_THROW(ClassRegistry::build({}), RegistryError);
  EXPECT_THROW(ClassRegistry::build({"stapler", "Stapler"}), RegistryError);
  EXPECT_THROW(ClassRegistry::build({"stapler", "  "}), RegistryError);
  const auto reg = ClassRegistry::build({"stapler"});
  EXPECT_THROW(reg.at(1), RegistryError);
  EXPECT_THROW(reg.id_of("laser lance"), RegistryError);
}

TEST(ClassRegistryTest, DuplicateErrorNamesTheClass) {
  try {
    ClassRegistry::build({"stapler", "Stapler"});
    FAIL();
  } catch (const RegistryError& e) {
    EXPECT_NE(std::string(e.what()).find("Stapler"), std::string::npos);
  }
}

TEST(FrameKeyTest, AnnotationStem) {
  EXPECT_EQ(annotation_stem({"clip7", 42}), "clip7_000042");
  EXPECT_EQ(annotation_stem({"a_b", 1234567}), "a_b_1234567");
}

TEST(PseudoLabelRecordTest, SortCanonical) {
  std::vector<PseudoLabelRecord> recs = {
      {"b", 0, {}, {}}, {"a", 10, {}, {}}, {"a", 2, {}, {}}};
  sort_canonical(recs);
  EXPECT_EQ(recs[0].key(), (FrameKey{"a", 2}));
  EXPECT_EQ(recs[1].key(), (FrameKey{"a", 10}));
  EXPECT_EQ(recs[2].key(), (FrameKey{"b", 0}));
}

}  // namespace
}  // namespace wsloc
