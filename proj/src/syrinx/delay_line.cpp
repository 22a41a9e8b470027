#include "mouthsyrinx/syrinx/delay_line.hpp"

#include <algorithm>
#include <bit>
#include <cassert>

namespace mouthsyrinx::syrinx {

DelayLine::DelayLine(std::size_t max_delay) {
  const std::size_t size = std::bit_ceil(max_delay + 1);
  buffer_.assign(size, 0.0);
  mask_ = size - 1;
}

double DelayLine::read(std::size_t delay) const {
  assert(delay >= 1 && delay <= mask_);
  return buffer_[(write_ - delay) & mask_];
}

void DelayLine::push(double value) {
  buffer_[write_] = value;
  write_ = (write_ + 1) & mask_;
}

void DelayLine::clear() {
  std::fill(buffer_.begin(), buffer_.end(), 0.0);
  write_ = 0;
}

CrossfadedDelay::CrossfadedDelay(std::size_t max_delay, std::size_t delay, std::size_t fade_length)
    : line_(max_delay),
      delay_(delay),
      previous_delay_(delay),
      fade_length_(std::max<std::size_t>(fade_length, 1)),
      fade_pos_(fade_length_) {}

double CrossfadedDelay::read() const {
  const double current = line_.read(delay_);
  if (!fading()) return current;
  const double mix = static_cast<double>(fade_pos_ + 1) / static_cast<double>(fade_length_);
  return (1.0 - mix) * line_.read(previous_delay_) + mix * current;
}

void CrossfadedDelay::push(double value) {
  line_.push(value);
  if (fading()) ++fade_pos_;
}

void CrossfadedDelay::set_delay(std::size_t delay) {
  if (delay == delay_) return;
  previous_delay_ = delay_;
  delay_ = std::min(delay, line_.max_delay());
  fade_pos_ = 0;
}

void CrossfadedDelay::clear() {
  line_.clear();
  previous_delay_ = delay_;
  fade_pos_ = fade_length_;
}

}  // namespace mouthsyrinx::syrinx
