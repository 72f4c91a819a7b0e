// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0

#include "reflectmc/rng.hpp"

#include <stdexcept>

#include "reflectmc/normal.hpp"

namespace reflectmc {

namespace {

constexpr std::uint32_t kMultiplier0 = 0xD2511F53u;
constexpr std::uint32_t kMultiplier1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
constexpr int kRounds = 10;

// 2^-53
constexpr double kUnit53 = 1.0 / 9007199254740992.0;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < kRounds; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMultiplier0, ctr[0], hi0, lo0);
        mulhilo(kMultiplier1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RandomStream::RandomStream(StreamSpec spec, std::uint32_t lane) noexcept
    : spec_(spec),
      lane_(lane),
      key_{static_cast<std::uint32_t>(spec.master_seed),
           static_cast<std::uint32_t>(spec.master_seed >> 32)} {}

void RandomStream::refill(std::uint64_t block) {
    if (block > 0xFFFFFFFFull) {
        throw std::length_error("RandomStream: lane exhausted (more than 2^33 draws)");
    }
    const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block), lane_,
                                  static_cast<std::uint32_t>(spec_.stream_index),
                                  static_cast<std::uint32_t>(spec_.stream_index >> 32)};
    buffer_ = Philox4x32::generate(ctr, key_);
    buffered_block_ = block;
}

double RandomStream::uniform() {
    const std::uint64_t block = position_ >> 1;
    if (block != buffered_block_) {
        refill(block);
    }
    const std::size_t half = static_cast<std::size_t>(position_ & 1u) * 2;
    const std::uint64_t bits =
        (static_cast<std::uint64_t>(buffer_[half + 1]) << 32) | buffer_[half];
    ++position_;
    return (static_cast<double>(bits >> 11) + 0.5) * kUnit53;
}

void RandomStream::seek(std::uint64_t position) { position_ = position; }

double standard_normal(RandomStream& stream) { return normal_quantile(stream.uniform()); }

}  // namespace reflectmc
