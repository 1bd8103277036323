// SPDX-License-Identifier: MIT
//
// Counter-based random number streams.
//
// The generator is Philox4x32-10: a keyed bijection on 128-bit counters
// producing four 32-bit words per block.  Streams are cheap value types; a
// (seed, stream) pair fully determines the sequence, independent of platform,
// thread count, or call interleaving with other streams.  This is what makes
// Monte-Carlo runs reproducible byte-for-byte when trials are sharded across
// threads: trial i always uses stream (seed, base + i).

#pragma once

#include <array>
#include <cstdint>

namespace sounder {

/// One independent random stream identified by (seed, stream_id).
///
/// Draw order within a stream is fixed: every draw consumes whole 32-bit
/// words from consecutive counter blocks.  normal() uses the Box-Muller
/// transform and caches its second variate.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Uniform on [0,1) with 53-bit resolution.
  double uniform();

  /// Uniform on (0,1]; never returns exactly 0 (safe for logs and powers).
  double uniform_pos();

  /// Standard normal via Box-Muller (second variate cached).
  double normal();

  /// Next raw 64-bit word.
  std::uint64_t next_u64();

  /// Next raw 32-bit word.
  std::uint32_t next_u32();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// One Philox4x32-10 block evaluation (exposed for known-answer tests).
  static std::array<std::uint32_t, 4> philox4x32(
      const std::array<std::uint32_t, 4>& counter,
      const std::array<std::uint32_t, 2>& key);

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_;                  // consecutive counter-block index
  std::array<std::uint32_t, 4> buffer_;  // words of the current block
  int buffer_pos_;                       // next unused word in buffer_, 4 = empty
  double cached_normal_;
  bool has_cached_normal_;
};

}  // namespace sounder
