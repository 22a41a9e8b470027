#pragma once

#include <cstddef>
#include <vector>

namespace mouthsyrinx::syrinx {

// Integer-delay circular buffer. A value pushed at tick n is returned by
// read(d) at tick n + d, provided read happens before the push of that tick.
class DelayLine {
 public:
  DelayLine() = default;
  explicit DelayLine(std::size_t max_delay);

  double read(std::size_t delay) const;
  void push(double value);
  void clear();
  std::size_t max_delay() const { return mask_; }

 private:
  std::vector<double> buffer_;
  std::size_t mask_ = 0;
  std::size_t write_ = 0;
};

// Delay line whose length can change at runtime. Length changes are
// crossfaded linearly over a fixed number of reads.
class CrossfadedDelay {
 public:
  CrossfadedDelay() = default;
  CrossfadedDelay(std::size_t max_delay, std::size_t delay, std::size_t fade_length);

  double read() const;
  void push(double value);
  void set_delay(std::size_t delay);
  void clear();
  std::size_t delay() const { return delay_; }
  bool fading() const { return fade_pos_ < fade_length_; }

 private:
  DelayLine line_;
  std::size_t delay_ = 1;
  std::size_t previous_delay_ = 1;
  std::size_t fade_length_ = 1;
  std::size_t fade_pos_ = 1;
};

}  // namespace mouthsyrinx::syrinx
