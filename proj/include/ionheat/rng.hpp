#pragma once

#include <array>
#include <cstdint>

// Counter-based random numbers (Philox 4x64, 10 rounds). Each trajectory gets
// its own stream addressed by (seed, stream id), so draws never depend on how
// trajectories are divided among worker threads, and replaying a single
// trajectory needs no skip-ahead state.
namespace ionheat::rng {

namespace detail {
inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
}
}  // namespace detail

// One 256-bit block keyed by 128 bits. Matches the reference Philox 4x64
// with 10 rounds; known-answer vectors are pinned in the test suite.
inline std::array<std::uint64_t, 4> philox4x64(std::array<std::uint64_t, 4> ctr,
                                               std::array<std::uint64_t, 2> key) {
    constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
    constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
    constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
    constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;
    for (int round = 0; round < 10; ++round) {
        if (round) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint64_t hi0, lo0, hi1, lo1;
        detail::mulhilo(kMul0, ctr[0], hi0, lo0);
        detail::mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

// Buffered uniform stream over one (seed, stream) pair.
class Stream {
  public:
    Stream(std::uint64_t seed, std::uint64_t stream)
        : key_{seed, 0x6A09E667F3BCC909ull}, ctr_{0, 0, stream, 0} {}

    std::uint64_t next_u64() {
        if (idx_ == 4) refill();
        return buf_[idx_++];
    }

    // Uniform double in [0, 1), 53 random bits.
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform double in (0, 1]; safe as a log() argument.
    double uniform_pos() {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

  private:
    void refill() {
        buf_ = philox4x64(ctr_, key_);
        if (++ctr_[0] == 0) ++ctr_[1];  // 128-bit draw counter
        idx_ = 0;
    }

    std::array<std::uint64_t, 2> key_;
    std::array<std::uint64_t, 4> ctr_;
    std::array<std::uint64_t, 4> buf_{};
    int idx_{4};
};

}  // namespace ionheat::rng
