#pragma once

#include <chrono>
#include <cstdint>
#include <string>

namespace urb {

// Simulated time. Microsecond resolution keeps comparisons exact while all
// external documents speak milliseconds.
using Duration = std::chrono::microseconds;
using SimTime = Duration;  // offset from simulation start

Duration from_ms(double ms);
double to_ms(Duration d);
double to_seconds(Duration d);

// Fixed three-decimal millisecond rendering ("1234.567"); exact for integer
// microseconds, so traces format identically on every platform.
std::string format_ms(Duration d);

}  // namespace urb
