#include "rtlat/clock.hpp"

#include <cerrno>
#include <cstring>
#include <ctime>
#include <stdexcept>

namespace rtlat {

namespace {

TimeNs timespec_to_ns(const timespec& t) {
    return TimeNs(static_cast<std::uint64_t>(t.tv_sec) * 1000000000ull +
                  static_cast<std::uint64_t>(t.tv_nsec));
}

timespec ns_to_timespec(TimeNs t) {
    timespec out;
    out.tv_sec = static_cast<time_t>(t.ns / 1000000000ull);
    out.tv_nsec = static_cast<long>(t.ns % 1000000000ull);
    return out;
}

}  // namespace

TimeNs MonotonicClock::now() {
    timespec t;
    if (clock_gettime(CLOCK_MONOTONIC, &t) != 0) {
        throw std::runtime_error(std::string("clock_gettime: ") + std::strerror(errno));
    }
    return timespec_to_ns(t);
}

TimeNs MonotonicClock::sleep_until(TimeNs deadline) {
    const timespec target = ns_to_timespec(deadline);
    int rc;
    do {
        rc = clock_nanosleep(CLOCK_MONOTONIC, TIMER_ABSTIME, &target, nullptr);
    } while (rc == EINTR);
    if (rc != 0) {
        throw std::runtime_error(std::string("clock_nanosleep: ") + std::strerror(rc));
    }
    return now();
}

}  // namespace rtlat
