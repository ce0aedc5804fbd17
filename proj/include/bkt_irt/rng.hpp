#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace bkt_irt {

/// Philox4x32-10 block function (Salmon et al., Random123). Maps a 128-bit
/// counter and a 64-bit key to 128 pseudorandom bits.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// SplitMix64 finalizer, used to fold stream identifiers into one word.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Identity of a random stream: the experiment seed plus up to four
/// coordinates (e.g. person, item, replication, purpose tag).
struct StreamKey {
  std::uint64_t seed = 0;
  std::array<std::uint64_t, 4> ids{};

  friend bool operator==(const StreamKey&, const StreamKey&) = default;
};

/// Deterministic counter-based stream. Two streams with distinct keys are
/// independent, and a stream's output depends only on its key and on how
/// many values were drawn from it, never on thread scheduling.
///
/// Models UniformRandomBitGenerator so it can drive <random> distributions.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream() : RngStream(StreamKey{}) {}
  explicit RngStream(StreamKey key);
  RngStream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on the open interval (eps, 1 - eps).
  double uniform_open(double eps);
  /// True with probability p; p = 0 never fires and p = 1 always does.
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  const StreamKey& key() const noexcept { return key_; }
  /// Number of 32-bit words consumed so far.
  std::uint64_t position() const noexcept { return block_ * 4 - remaining_; }

 private:
  void refill();

  StreamKey key_;
  std::array<std::uint32_t, 2> philox_key_{};
  std::uint64_t stream_hash_ = 0;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int remaining_ = 0;
};

}  // namespace bkt_irt
