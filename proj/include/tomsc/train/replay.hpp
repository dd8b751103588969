#pragma once

#include "tomsc/common.hpp"

#include <vector>

namespace tomsc::train {

/// Fixed-capacity FIFO store with uniform sampling.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) fail("replay buffer capacity must be positive");
    items_.reserve(capacity);
  }

  void add(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[static_cast<std::size_t>(inserted_ % capacity_)] = std::move(item);
    }
    ++inserted_;
  }

  /// Uniform draws with replacement.
  std::vector<const T*> sample(std::size_t n, Rng& rng) const {
    if (items_.empty()) fail("replay buffer: sampling from an empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    std::vector<const T*> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
    return out;
  }

  void clear() {
    items_.clear();
    inserted_ = 0;
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  /// Total insertions since construction or the last clear().
  long inserted() const { return inserted_; }
  const T& at(std::size_t i) const { return items_.at(i); }

 private:
  std::size_t capacity_;
  std::vector<T> items_;
  long inserted_ = 0;
};

}  // namespace tomsc::train
