#pragma once

#include <algorithm>
#include <cstdint>

namespace turnlab {

/// Running bit count of an algorithm's tracked state, with its peak.
class SpaceMeter {
 public:
  void set(std::uint64_t bits) {
    current_ = bits;
    peak_ = std::max(peak_, bits);
  }
  std::uint64_t current() const { return current_; }
  std::uint64_t peak() const { return peak_; }

 private:
  std::uint64_t current_ = 0;
  std::uint64_t peak_ = 0;
};

}  // namespace turnlab
