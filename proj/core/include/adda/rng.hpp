#pragma once

#include <cstddef>
#include <cstdint>

namespace adda {

/// Counter-based random stream.
///
/// Every draw is a pure function of (seed, stream_id, counter):
///
///   key   = mix64(seed ^ mix64(stream_id + 0x632BE59BD9B3E8B5))
///   bits  = mix64(key + counter * 0x9E3779B97F4A7C15)
///
/// where mix64 is the SplitMix64 finalizer (xor-shift 30/27/31 with the
/// multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB). The counter is
/// incremented after each draw. Only 64-bit integer arithmetic is involved,
/// so sequences are identical on every platform.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t counter = 0)
      : seed_(seed), stream_id_(stream_id), counter_(counter) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;

  // Standard normal via Box-Muller (consumes two draws).
  double normal() noexcept;

  // Independent child stream, keyed by this stream's identity and `tag`.
  // Does not advance this stream.
  RngStream child(std::uint64_t tag) const noexcept;

  static std::uint64_t mix64(std::uint64_t x) noexcept;

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t counter_ = 0;
};

// Stream-id namespaces. A stream id packs (purpose, epoch, index) so that
// every consumer gets its own sequence regardless of execution order.
enum class StreamPurpose : std::uint64_t {
  kInit = 1,
  kShuffle = 2,
  kViews = 3,
  kData = 4,
  kProbe = 5,
};

constexpr std::uint64_t stream_id(StreamPurpose purpose, std::uint64_t epoch,
                                  std::uint64_t index) noexcept {
  return (static_cast<std::uint64_t>(purpose) << 56) ^ ((epoch & 0xFFFFFFu) << 32) ^
         (index & 0xFFFFFFFFu);
}

}  // namespace adda
