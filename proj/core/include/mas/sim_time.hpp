#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace mas {

/// Simulation time with microsecond resolution. Integer ticks keep event
/// ordering and log output exact across platforms.
class SimTime {
 public:
  constexpr SimTime() = default;

  static constexpr SimTime from_us(std::int64_t us) { return SimTime(us); }
  static constexpr SimTime from_ms(std::int64_t ms) { return SimTime(ms * 1000); }
  static SimTime from_seconds(double s) { return SimTime(static_cast<std::int64_t>(std::llround(s * 1e6))); }

  constexpr std::int64_t us() const { return us_; }
  constexpr double seconds() const { return static_cast<double>(us_) * 1e-6; }

  constexpr auto operator<=>(const SimTime&) const = default;

  constexpr SimTime operator+(SimTime o) const { return SimTime(us_ + o.us_); }
  constexpr SimTime operator-(SimTime o) const { return SimTime(us_ - o.us_); }
  constexpr SimTime& operator+=(SimTime o) {
    us_ += o.us_;
    return *this;
  }

 private:
  constexpr explicit SimTime(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

/// "12.345678": seconds with six decimals, exact for microsecond ticks.
std::string format_seconds(SimTime t);

}  // namespace mas
