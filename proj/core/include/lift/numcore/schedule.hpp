#pragma once

#include <cmath>
#include <cstdint>

#include "lift/errors.hpp"

namespace lift::num {

struct ScheduleSpec {
  enum class Kind { constant, cosine_with_warmup };
  Kind kind = Kind::constant;
  double base_lr = 0.0;
  double warmup_ratio = 0.0;   // fraction of total_steps spent ramping up
  int64_t total_steps = 1;
  double min_lr = 0.0;
};

inline int64_t warmup_steps(const ScheduleSpec& s) {
  return static_cast<int64_t>(std::llround(s.warmup_ratio * static_cast<double>(s.total_steps)));
}

inline void validate(const ScheduleSpec& s) {
  if (s.base_lr <= 0.0) throw ValueError("schedule: base_lr must be positive");
  if (s.total_steps < 1) throw ValueError("schedule: total_steps must be positive");
  if (s.warmup_ratio < 0.0 || s.warmup_ratio >= 1.0) throw ValueError("schedule: warmup_ratio in [0,1)");
  if (s.min_lr < 0.0) throw ValueError("schedule: min_lr must be nonnegative");
  if (warmup_steps(s) >= s.total_steps) throw ValueError("schedule: warmup covers every step");
}

// Linear ramp 0 -> base_lr over the warmup steps, then cosine decay down to
// min_lr at total_steps. kind=constant returns base_lr for every valid step.
inline double lr_at_step(const ScheduleSpec& s, int64_t step) {
  if (step < 0 || step > s.total_steps) throw IndexError("lr_at_step: step outside [0, total_steps]");
  if (s.kind == ScheduleSpec::Kind::constant) return s.base_lr;
  const int64_t w = warmup_steps(s);
  if (step < w) return s.base_lr * static_cast<double>(step) / static_cast<double>(w);
  const double progress = static_cast<double>(step - w) / static_cast<double>(s.total_steps - w);
  return s.min_lr + (s.base_lr - s.min_lr) * 0.5 * (1.0 + std::cos(M_PI * progress));
}

}  // namespace lift::num
