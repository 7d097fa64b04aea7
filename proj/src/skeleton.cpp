#include "shapmix/skeleton.hpp"

#include <algorithm>
#include <cmath>

#include "shapmix/errors.hpp"

namespace shapmix {

std::string Dims::to_string() const {
  return std::to_string(channels) + "x" + std::to_string(frames) + "x" +
         std::to_string(joints) + "x" + std::to_string(performers);
}

SkeletonSequence::SkeletonSequence(Dims dims, float fill)
    : dims_(dims), data_(dims.size(), fill) {
  if (!dims.valid()) throw DataError("invalid sequence dims " + dims.to_string());
}

SkeletonSequence::SkeletonSequence(Dims dims, std::vector<float> data)
    : dims_(dims), data_(std::move(data)) {
  if (!dims.valid()) throw DataError("invalid sequence dims " + dims.to_string());
  if (data_.size() != dims.size())
    throw DataError("sequence payload has " + std::to_string(data_.size()) +
                    " values, dims " + dims.to_string() + " need " +
                    std::to_string(dims.size()));
}

bool SkeletonSequence::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](float x) { return std::isfinite(x); });
}

}  // namespace shapmix
