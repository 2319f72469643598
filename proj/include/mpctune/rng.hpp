#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>

namespace mpctune::rng {

/// SplitMix64 step; used for key derivation and generator seeding.
std::uint64_t split_mix64(std::uint64_t& state);

/// Deterministically mixes an ordered tuple of integers into a stream key.
/// Used to give every (seed, iteration, replicate) its own independent
/// sub-stream so results do not depend on scheduling order.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts);

/// Self-contained xoshiro256++ stream. All draw primitives are fully
/// specified here (no std::distribution) so sequences are bit-reproducible
/// across standard libraries.
class Stream {
 public:
  explicit Stream(std::uint64_t key);

  std::uint64_t key() const { return key_; }
  std::uint64_t next_u64();

  /// Uniform on [0,1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (second draw of each pair is cached).
  double normal();
  double normal(double mean, double stddev);

  /// Child stream keyed by (this stream's key, index).
  Stream substream(std::uint64_t index) const;

 private:
  std::array<std::uint64_t, 4> s_{};
  std::uint64_t key_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace mpctune::rng
