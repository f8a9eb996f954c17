#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace pwalk {

// Philox4x32-10 counter-based generator (Salmon et al., SC 2011).
// A stream is addressed by (seed, stream_index): the seed is the key and the
// stream index occupies the upper counter words, so distinct streams draw from
// disjoint counter ranges of the same keyed bijection. Draws are reproducible
// and independent of scheduling, which is what lets ensembles assign one
// stream per path and parallelize freely.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_index)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_index_(stream_index) {}

    std::uint64_t seed() const {
        return key_[0] | (static_cast<std::uint64_t>(key_[1]) << 32);
    }
    std::uint64_t stream_index() const { return stream_index_; }

    std::uint32_t next_u32() {
        if (buf_pos_ == 4) refill();
        return buf_[buf_pos_++];
    }

    std::uint64_t next_u64() {
        std::uint64_t lo = next_u32();
        return lo | (static_cast<std::uint64_t>(next_u32()) << 32);
    }

    /// Uniform on [0,1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform on (0,1]; safe as a log() argument.
    double uniform01_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double standard_normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1 = uniform01_open();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    /// Runs one Philox4x32-10 block; exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            ctr = single_round(ctr, key);
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        return ctr;
    }

private:
    static std::array<std::uint32_t, 4> single_round(const std::array<std::uint32_t, 4>& c,
                                                     const std::array<std::uint32_t, 2>& k) {
        std::uint64_t p0 = static_cast<std::uint64_t>(0xD2511F53u) * c[0];
        std::uint64_t p1 = static_cast<std::uint64_t>(0xCD9E8D57u) * c[2];
        std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }

    void refill() {
        buf_ = block({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                      static_cast<std::uint32_t>(stream_index_),
                      static_cast<std::uint32_t>(stream_index_ >> 32)},
                     key_);
        ++block_;
        buf_pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_index_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace pwalk
