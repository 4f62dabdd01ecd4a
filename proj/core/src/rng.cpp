#include "adda/rng.hpp"

#include <cmath>
#include <numbers>

namespace adda {

std::uint64_t RngStream::mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t RngStream::next_u64() noexcept {
  const std::uint64_t key = mix64(seed_ ^ mix64(stream_id_ + 0x632BE59BD9B3E8B5ULL));
  const std::uint64_t bits = mix64(key + counter_ * 0x9E3779B97F4A7C15ULL);
  ++counter_;
  return bits;
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t n) noexcept {
  // Lemire-style rejection keeps the result unbiased.
  const std::uint64_t threshold = (0 - n) % n;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double RngStream::normal() noexcept {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::child(std::uint64_t tag) const noexcept {
  return RngStream(mix64(seed_ ^ mix64(stream_id_)), tag, 0);
}

}  // namespace adda
