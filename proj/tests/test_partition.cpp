#include <doctest.h>

#include <set>

#include "shapmix/errors.hpp"
#include "shapmix/partition.hpp"

using namespace shapmix;

TEST_CASE("built-in 25-joint partition is disjoint and complete") {
  const auto p = default_partition(25);
  std::set<int> all;
  std::size_t total = 0;
  for (int i = 0; i < kNumParts; ++i) {
    const auto& js = p.joints(static_cast<Part>(i));
    CHECK_FALSE(js.empty());
    total += js.size();
    all.insert(js.begin(), js.end());
  }
  CHECK(total == 25);
  CHECK(all.size() == 25);
  CHECK(*all.begin() == 0);
  CHECK(*all.rbegin() == 24);
  CHECK(p.joints_of(PartMask::all()).size() == 25);
  CHECK(p.joint_count(PartMask::of(Part::trunk)) == 5);
  CHECK(p.part_of_joint(20) == Part::trunk);
  CHECK(p.part_of_joint(23) == Part::right_arm);
}

TEST_CASE("unsupported joint count without a partition file") {
  CHECK_THROWS_AS(default_partition(17), ConfigError);
}

TEST_CASE("partition validation") {
  using Parts = std::array<std::vector<int>, kNumParts>;
  CHECK_THROWS_AS(PartPartition(4, Parts{{{0}, {1}, {2}, {3}, {}}}), ConfigError);
  CHECK_THROWS_AS(PartPartition(5, Parts{{{0}, {1}, {2}, {3}, {3}}}), ConfigError);
  CHECK_THROWS_AS(PartPartition(6, Parts{{{0}, {1}, {2}, {3}, {4}}}), ConfigError);
  CHECK_NOTHROW(PartPartition(5, Parts{{{0}, {1}, {2}, {3}, {4}}}));
}

TEST_CASE("partition override file") {
  const auto p = parse_partition(R"([
    {"name": "trunk", "joints": [0, 1]},
    {"name": "left_arm", "joints": [2]},
    {"name": "right_arm", "joints": [3]},
    {"name": "left_leg", "joints": [4, 6]},
    {"name": "right_leg", "joints": [5]}
  ])");
  CHECK(p.num_joints() == 7);
  CHECK(p.joints(Part::left_leg) == std::vector<int>{4, 6});
  CHECK_THROWS_AS(parse_partition("[1, 2]"), ParseError);
  CHECK_THROWS_AS(parse_partition("not json"), ParseError);
  CHECK_THROWS_AS(parse_partition(R"([
    {"name": "trunk", "joints": [0]}, {"name": "trunk", "joints": [1]},
    {"name": "right_arm", "joints": [2]}, {"name": "left_leg", "joints": [3]},
    {"name": "right_leg", "joints": [4]}])"),
                  ParseError);
}

TEST_CASE("part mask keys are sorted names") {
  const PartMask m = PartMask::of(Part::trunk) | PartMask::of(Part::left_arm);
  CHECK(m.key() == "left_arm+trunk");
  CHECK(part_mask_from_key("trunk+left_arm") == m);
  CHECK(m.complement().size() == 3);
  CHECK(PartMask::all().complement().empty());
  for (unsigned bits = 0; bits < 32; ++bits) {
    const PartMask x(static_cast<std::uint8_t>(bits));
    CHECK(part_mask_from_key(x.key()) == x);
  }
}
