#pragma once

#include <array>
#include <cstdint>

namespace rden {

/// Philox4x32-10 block function (Salmon et al., "Parallel random numbers:
/// as easy as 1, 2, 3"). Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// The 64-bit seed is the Philox key; the 128-bit counter is
/// (stream_id, block index). Streams with different ids never share a
/// counter value, and the sequence for a given (seed, stream_id) depends
/// only on integer arithmetic, so it is identical on every platform.
/// Derived samplers (uniform, normal, Poisson) are implemented here rather
/// than via <random> distributions, whose algorithms are
/// implementation-defined.
class SeededStream {
public:
    SeededStream(std::uint64_t seed, std::uint64_t stream_id = 0) noexcept;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    /// Independent sub-stream keyed by (this stream's id, index).
    /// Does not advance this stream.
    SeededStream split(std::uint64_t index) const noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    /// Uniform on (0, 1].
    double uniform_open_left() noexcept;
    /// Uniform integer in [0, bound), unbiased (bound > 0).
    std::uint64_t below(std::uint64_t bound) noexcept;
    /// Standard normal via the Box-Muller transform.
    double normal() noexcept;
    /// +1 or -1 with equal probability.
    double rademacher() noexcept;
    /// Poisson(mean) variate. Multiplication method for mean <= 30,
    /// Hormann's PTRS transformed rejection above.
    std::uint64_t poisson(double mean) noexcept;

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer; used to derive sub-stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

} // namespace rden
