#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace shapmix {

inline constexpr int kNumParts = 5;

enum class Part : std::uint8_t { trunk, left_arm, right_arm, left_leg, right_leg };

std::string_view part_name(Part p);
Part part_from_name(std::string_view name);  // throws ConfigError

// A set of body parts encoded as a 5-bit mask. Used both for spatial mixing
// selections and for Shapley coalitions.
class PartMask {
 public:
  constexpr PartMask() = default;
  constexpr explicit PartMask(std::uint8_t bits) : bits_(bits & kAllBits) {}

  static constexpr PartMask all() { return PartMask(kAllBits); }
  static constexpr PartMask none() { return PartMask(0); }
  static constexpr PartMask of(Part p) {
    return PartMask(static_cast<std::uint8_t>(1u << static_cast<unsigned>(p)));
  }

  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool contains(Part p) const { return (bits_ >> static_cast<unsigned>(p)) & 1u; }
  constexpr bool empty() const { return bits_ == 0; }
  int size() const;

  constexpr PartMask operator|(PartMask o) const { return PartMask(bits_ | o.bits_); }
  constexpr PartMask operator&(PartMask o) const { return PartMask(bits_ & o.bits_); }
  constexpr PartMask complement() const { return PartMask(~bits_ & kAllBits); }
  constexpr bool subset_of(PartMask o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr bool intersects(PartMask o) const { return (bits_ & o.bits_) != 0; }

  std::vector<Part> parts() const;
  // Sorted part names joined by "+", e.g. "left_arm+trunk". Empty set is "".
  std::string key() const;

  friend constexpr bool operator==(PartMask, PartMask) = default;

 private:
  static constexpr std::uint8_t kAllBits = (1u << kNumParts) - 1;
  std::uint8_t bits_ = 0;
};

PartMask part_mask_from_key(std::string_view key);  // inverse of key()

// Disjoint assignment of the V joints to the five body parts.
class PartPartition {
 public:
  // Validates disjointness, coverage of {0..V-1} and non-empty parts.
  PartPartition(int num_joints, std::array<std::vector<int>, kNumParts> parts);

  int num_joints() const { return num_joints_; }
  const std::vector<int>& joints(Part p) const {
    return parts_[static_cast<std::size_t>(p)];
  }
  // Sorted joint indices belonging to any part in the mask.
  std::vector<int> joints_of(PartMask mask) const;
  int joint_count(PartMask mask) const;
  // Per-joint owner part.
  Part part_of_joint(int v) const { return owner_[static_cast<std::size_t>(v)]; }

 private:
  int num_joints_;
  std::array<std::vector<int>, kNumParts> parts_;
  std::vector<Part> owner_;
};

// The built-in 25-joint NTU map:
//   trunk     = {0 spine base, 1 spine mid, 2 neck, 3 head, 20 spine shoulder}
//   left_arm  = {4 shoulder, 5 elbow, 6 wrist, 7 hand, 21 hand tip, 22 thumb}
//   right_arm = {8, 9, 10, 11, 23, 24}
//   left_leg  = {12 hip, 13 knee, 14 ankle, 15 foot}
//   right_leg = {16, 17, 18, 19}
// Other joint counts need a partition file. Throws ConfigError.
PartPartition default_partition(int num_joints);

// Partition override file: JSON list of 5 {"name": ..., "joints": [...]}.
PartPartition load_partition(const std::filesystem::path& path);
PartPartition parse_partition(std::string_view json_text);

}  // namespace shapmix
