// Copyright reflectmc contributors
// SPDX-License-Identifier: Apache-2.0
//
// Counter-based random streams.
//
// Every draw is a pure function of (master_seed, stream_index, lane, draw
// position), computed with the Philox4x32-10 block cipher (Salmon et al.,
// "Parallel random numbers: as easy as 1, 2, 3", SC 2011). Streams can be
// created in any order on any thread and always reproduce the same values.

#pragma once

#include <array>
#include <cstdint>

namespace reflectmc {

/// Identifies one independent random stream.
struct StreamSpec {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    friend bool operator==(const StreamSpec&, const StreamSpec&) = default;
};

/// Philox4x32 with 10 rounds. Stateless: maps (counter, key) to 128 bits.
class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// Sequential view onto a counter-based stream.
///
/// The 128-bit Philox counter is laid out as
///   word 0: block index within the lane
///   word 1: lane (sub-stream selector, e.g. path increments vs. bridge draws)
///   words 2-3: stream_index
/// and the key is the 64-bit master seed. Each block yields two 53-bit
/// uniforms.
class RandomStream {
  public:
    explicit RandomStream(StreamSpec spec, std::uint32_t lane = 0) noexcept;

    /// Uniform draw on the open interval (0, 1).
    double uniform();

    /// Number of uniforms consumed so far.
    std::uint64_t position() const noexcept { return position_; }

    /// Skip ahead so the next draw is the one at `position`.
    void seek(std::uint64_t position);

    StreamSpec spec() const noexcept { return spec_; }
    std::uint32_t lane() const noexcept { return lane_; }

  private:
    void refill(std::uint64_t block);

    StreamSpec spec_;
    std::uint32_t lane_;
    Philox4x32::Key key_;
    std::array<std::uint32_t, 4> buffer_{};
    std::uint64_t buffered_block_ = ~std::uint64_t{0};
    std::uint64_t position_ = 0;
};

/// Standard normal draw via inverse CDF; consumes exactly one uniform.
double standard_normal(RandomStream& stream);

// Lane assignments used inside the library.
inline constexpr std::uint32_t kPathLane = 0;
inline constexpr std::uint32_t kBridgeLane = 1;
inline constexpr std::uint32_t kAuditLane = 2;

}  // namespace reflectmc
