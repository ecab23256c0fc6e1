#pragma once

#include <array>
#include <cstdint>

namespace imdev {

// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

std::uint64_t mix64(std::uint64_t x) noexcept;

// Domain tags so that the same (seed, index) pair never reuses a stream for
// two different purposes.
enum class StreamPurpose : std::uint64_t {
    simulation = 0x51a1,
    pilot = 0x9170,
    dominating = 0xd0a1,
    bootstrap = 0xb007,
    coupling = 0xc0b1,
    burn_in = 0xbb11,
    generic = 0x6e1e,
};

// Counter-based stream addressed by (seed, purpose, stream, substream).
// Any draw is a pure function of its address plus the position within the
// substream, so parallel schedules cannot change results.
class CounterStream {
public:
    CounterStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t stream,
                  std::uint64_t substream) noexcept;

    std::uint32_t next_u32() noexcept;
    std::uint64_t next_u64() noexcept;

    // Uniform on the open interval (0, 1) with 53 random bits.
    double uniform() noexcept;
    double normal() noexcept;
    // Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound) noexcept;

private:
    void refill() noexcept;

    std::array<std::uint32_t, 2> key_{};
    std::array<std::uint32_t, 4> counter_{};
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
};

}  // namespace imdev
