#pragma once

// Counter-based random streams. Every draw is a pure function of
// (key, stream id, draw index), so results never depend on scheduling.

#include <array>
#include <cstdint>
#include <limits>

namespace wealthdyn {

/// Philox4x32-10 block function (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t{kMul0} * ctr[0];
            const std::uint64_t p1 = std::uint64_t{kMul1} * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Stream domains keep independent uses of one master seed apart.
enum class StreamDomain : std::uint32_t {
    Transition = 0,
    Bootstrap = 1,
    PairSampling = 2,
    KernelProbe = 3,
    TrialDensity = 4,
    Initial = 5,
};

/// A uniform random bit generator over one keyed Philox stream.
///
/// The key is derived from (seed, domain); the counter carries
/// (draw index, stream id, time index). Copying a stream copies its position.
class CounterStream {
public:
    using result_type = std::uint32_t;

    CounterStream(std::uint64_t seed, StreamDomain domain, std::uint64_t time,
                  std::uint64_t id) noexcept
        : key_{mix_key(seed, domain)},
          hi_{static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
              static_cast<std::uint32_t>(time)} {
        // High bits of the time index fold into the key; a run never
        // approaches 2^32 steps, so this keeps the stream map injective there.
        key_[1] ^= static_cast<std::uint32_t>(time >> 32);
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept {
        if (lane_ == 4) refill();
        return buffer_[lane_++];
    }

    /// Uniform double in the open interval (0, 1).
    double uniform() noexcept {
        const std::uint64_t hi = (*this)();
        const std::uint64_t lo = (*this)();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t draws() const noexcept { return block_index_; }

private:
    static Philox4x32::Key mix_key(std::uint64_t seed, StreamDomain domain) noexcept {
        // splitmix64 finalizer decorrelates nearby seeds
        std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(domain) + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        z ^= z >> 31;
        return {static_cast<std::uint32_t>(z), static_cast<std::uint32_t>(z >> 32)};
    }

    void refill() noexcept {
        // 32-bit block counter: 2^32 blocks per stream is far beyond any draw count here.
        buffer_ = Philox4x32::block({static_cast<std::uint32_t>(block_index_), hi_[0], hi_[1], hi_[2]},
                                    key_);
        ++block_index_;
        lane_ = 0;
    }

    Philox4x32::Key key_;
    std::array<std::uint32_t, 3> hi_;
    Philox4x32::Counter buffer_{};
    std::uint64_t block_index_ = 0;
    int lane_ = 4;
};

}  // namespace wealthdyn
