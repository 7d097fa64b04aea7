#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace shapmix {

// Shape of a skeleton sequence: channels x frames x joints x performers.
struct Dims {
  int channels = 0;
  int frames = 0;
  int joints = 0;
  int performers = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * frames * joints * performers;
  }
  bool valid() const {
    return channels > 0 && frames > 0 && joints > 0 && performers > 0;
  }
  std::string to_string() const;

  friend bool operator==(const Dims&, const Dims&) = default;
};

// Dense joint-coordinate tensor, stored in 32-bit with c-major then t, v, m
// ordering (the same order used on disk).
class SkeletonSequence {
 public:
  SkeletonSequence() = default;
  explicit SkeletonSequence(Dims dims, float fill = 0.0f);
  SkeletonSequence(Dims dims, std::vector<float> data);

  const Dims& dims() const { return dims_; }

  std::size_t index(int c, int t, int v, int m) const {
    return ((static_cast<std::size_t>(c) * dims_.frames + t) * dims_.joints + v) *
               dims_.performers + m;
  }
  float at(int c, int t, int v, int m) const { return data_[index(c, t, v, m)]; }
  float& at(int c, int t, int v, int m) { return data_[index(c, t, v, m)]; }

  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool all_finite() const;

  friend bool operator==(const SkeletonSequence&, const SkeletonSequence&) = default;

 private:
  Dims dims_;
  std::vector<float> data_;
};

}  // namespace shapmix
