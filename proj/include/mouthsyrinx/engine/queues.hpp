#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <utility>

namespace mouthsyrinx::engine {

// Single-writer latest-value mailbox. Readers never block on the writer; a
// reader that falls behind sees only the newest value.
template <typename T>
class LatestValue {
 public:
  void publish(T value) {
    {
      std::lock_guard lock(mutex_);
      value_ = std::move(value);
      ++version_;
    }
    cv_.notify_all();
  }

  // Latest value with its version, or nullopt before the first publish.
  std::optional<std::pair<std::uint64_t, T>> read() const {
    std::lock_guard lock(mutex_);
    if (!value_) return std::nullopt;
    return std::pair{version_, *value_};
  }

  // Waits until the version exceeds `seen` or close() is called.
  std::optional<std::pair<std::uint64_t, T>> wait_newer(std::uint64_t seen) {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return closed_ || (value_ && version_ > seen); });
    if (!value_ || version_ <= seen) return std::nullopt;
    return std::pair{version_, *value_};
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::optional<T> value_;
  std::uint64_t version_ = 0;
  bool closed_ = false;
};

// FIFO whose items are either droppable or not. When more than `capacity`
// droppable items are queued the oldest droppable one is removed and handed
// back to the producer; other items are never dropped.
template <typename T>
class DropOldestQueue {
 public:
  explicit DropOldestQueue(std::size_t capacity) : capacity_(capacity) {}

  std::optional<T> push(T item, bool droppable) {
    std::optional<T> dropped;
    {
      std::lock_guard lock(mutex_);
      items_.emplace_back(std::move(item), droppable);
      if (droppable && ++droppable_count_ > capacity_) {
        for (auto it = items_.begin(); it != items_.end(); ++it) {
          if (it->second) {
            dropped = std::move(it->first);
            items_.erase(it);
            --droppable_count_;
            break;
          }
        }
      }
    }
    cv_.notify_one();
    return dropped;
  }

  // Blocks until an item arrives or the queue is closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    auto [item, droppable] = std::move(items_.front());
    items_.pop_front();
    if (droppable) --droppable_count_;
    return std::move(item);
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      closed_ = true;
    }
    cv_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
  }

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::pair<T, bool>> items_;
  std::size_t capacity_;
  std::size_t droppable_count_ = 0;
  bool closed_ = false;
};

}  // namespace mouthsyrinx::engine
