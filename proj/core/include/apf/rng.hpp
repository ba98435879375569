#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace apf {

/// Seeded, stream-addressable random source.
///
/// A stream is identified by (seed, stream id). The same pair reproduces the
/// same draw sequence bit-exactly; distinct stream ids give statistically
/// independent sequences. Stream ids for replicated experiments are derived
/// by hashing (replication index, stage tag), so replications can run in
/// parallel without shared state.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    // Counter-based derivation: stream id = hash(replication, stage tag).
    static RngStream derive(std::uint64_t seed, std::uint64_t replication,
                            std::string_view stage);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();

    /// Standard normal via Box-Muller; pairs are cached, draw order is fixed.
    double normal();

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
    double cached_normal_ = 0.0;
    bool has_cached_normal_ = false;
};

/// 64-bit mix used for stream derivation (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

}  // namespace apf
