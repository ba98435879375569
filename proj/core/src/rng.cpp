#include "apf/rng.hpp"

#include <cmath>
#include <limits>

namespace apf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(mix64(mix64(seed) ^ mix64(stream_id ^ 0xa5a5a5a5a5a5a5a5ULL))) {}

RngStream RngStream::derive(std::uint64_t seed, std::uint64_t replication,
                            std::string_view stage) {
    return RngStream(seed, mix64(replication) ^ fnv1a(stage));
}

double RngStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    // u1 in (0, 1] so the log is finite.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    cached_normal_ = radius * std::sin(kTwoPi * u2);
    has_cached_normal_ = true;
    return radius * std::cos(kTwoPi * u2);
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    // Rejection sampling on the top interval keeps the draw exactly uniform.
    if (n == 0) return 0;
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

}  // namespace apf
