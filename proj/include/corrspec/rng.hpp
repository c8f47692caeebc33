#pragma once

// Counter-based random streams. A Stream is addressed by (seed, tag, index),
// so any probe, shot or trial can regenerate its own draws independently of
// how work is split across threads.

#include <array>
#include <cstdint>
#include <limits>

namespace corrspec {

/// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

enum class StreamModule : std::uint32_t {
  protocol = 1,
  detection = 2,
  remote = 3,
  laser = 4,
  test = 255,
};

/// Build the 32-bit stream tag from a module and a 24-bit sub-identifier.
constexpr std::uint32_t stream_tag(StreamModule module, std::uint32_t sub = 0) {
  return (static_cast<std::uint32_t>(module) << 24) | (sub & 0x00FFFFFFu);
}

/// UniformRandomBitGenerator over one Philox substream. Copyable and movable;
/// a single instance must not be shared between threads.
class Stream {
public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint32_t tag, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

  std::uint64_t seed() const { return seed_; }
  std::uint32_t tag() const { return tag_; }
  std::uint64_t index() const { return index_; }

private:
  void refill();

  std::uint64_t seed_;
  std::uint32_t tag_;
  std::uint64_t index_;
  std::uint32_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4; // 32-bit words consumed from buffer_
};

} // namespace corrspec
