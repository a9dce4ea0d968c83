#include "pocketpilot/common/clock.hpp"

#include <chrono>
#include <thread>

namespace pocketpilot {

UtcMs SystemClock::now_ms() const {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

double SystemClock::monotonic_ms() const {
  using namespace std::chrono;
  return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

void SystemClock::sleep_for_ms(double ms) {
  if (ms > 0) {
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
  }
}

void SystemClock::sleep_until(UtcMs t) {
  const UtcMs now = now_ms();
  if (t > now) {
    sleep_for_ms(static_cast<double>(t - now));
  }
}

SimulatedClock::SimulatedClock(UtcMs start) : now_(static_cast<double>(start)) {}

UtcMs SimulatedClock::now_ms() const {
  std::lock_guard lock(mu_);
  return static_cast<UtcMs>(now_);
}

double SimulatedClock::monotonic_ms() const {
  std::lock_guard lock(mu_);
  return now_;
}

void SimulatedClock::sleep_for_ms(double ms) { advance_ms(ms); }

void SimulatedClock::sleep_until(UtcMs t) {
  std::lock_guard lock(mu_);
  if (static_cast<double>(t) > now_) {
    now_ = static_cast<double>(t);
  }
}

void SimulatedClock::set(UtcMs t) {
  std::lock_guard lock(mu_);
  now_ = static_cast<double>(t);
}

void SimulatedClock::advance_ms(double ms) {
  std::lock_guard lock(mu_);
  if (ms > 0) {
    now_ += ms;
  }
}

SystemClock& system_clock() {
  static SystemClock clock;
  return clock;
}

}  // namespace pocketpilot
