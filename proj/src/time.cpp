#include "urb/time.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace urb {

Duration from_ms(double ms) { return Duration{static_cast<std::int64_t>(std::llround(ms * 1000.0))}; }

double to_ms(Duration d) { return static_cast<double>(d.count()) / 1000.0; }

double to_seconds(Duration d) { return static_cast<double>(d.count()) / 1e6; }

std::string format_ms(Duration d) {
  const std::int64_t us = d.count();
  const std::int64_t mag = std::llabs(us);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", us < 0 ? "-" : "", static_cast<long long>(mag / 1000),
                static_cast<long long>(mag % 1000));
  return buf;
}

}  // namespace urb
