#pragma once

#include <mutex>

#include "pocketpilot/common/time.hpp"

namespace pocketpilot {

// Time source injected everywhere time matters: scheduling, run metadata and
// latency measurement. Wall time and the monotonic reading advance together on
// the simulated clock so simulated latencies are exact.
class Clock {
 public:
  virtual ~Clock() = default;

  virtual UtcMs now_ms() const = 0;
  // Milliseconds on a monotonic timeline with an arbitrary origin.
  virtual double monotonic_ms() const = 0;
  virtual void sleep_for_ms(double ms) = 0;
  virtual void sleep_until(UtcMs t) = 0;
};

class SystemClock final : public Clock {
 public:
  UtcMs now_ms() const override;
  double monotonic_ms() const override;
  void sleep_for_ms(double ms) override;
  void sleep_until(UtcMs t) override;
};

// Deterministic clock: sleeping advances time instantly. Thread-safe.
class SimulatedClock final : public Clock {
 public:
  explicit SimulatedClock(UtcMs start);

  UtcMs now_ms() const override;
  double monotonic_ms() const override;
  void sleep_for_ms(double ms) override;
  void sleep_until(UtcMs t) override;

  void set(UtcMs t);
  void advance_ms(double ms);

 private:
  mutable std::mutex mu_;
  double now_;  // fractional ms to keep sub-millisecond sleeps visible
};

SystemClock& system_clock();

}  // namespace pocketpilot
