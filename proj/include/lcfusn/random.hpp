#pragma once

#include <array>
#include <cstdint>

namespace lcfusn {

/// Reproducible 64-bit random stream.
///
/// The generator is xoshiro256** whose state is derived from (seed, stream_id)
/// through splitmix64, so a (seed, stream_id) pair together with the number of
/// draws already taken fully determines every subsequent value. Distinct
/// stream ids give decorrelated streams from a single seed; chains, replicates
/// and parallel blocks each take their own id.
///
/// Normal variates are produced by inversion (norm_quantile) instead of
/// std::normal_distribution, whose output is implementation defined.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t draws() const noexcept { return draws_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;
  double normal(double mean, double sd) noexcept { return mean + sd * normal(); }
  double exponential() noexcept;

  /// A new stream keyed by this stream's seed and `child_id`; does not
  /// advance this stream.
  RandomStream split(std::uint64_t child_id) const;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t draws_ = 0;
  std::array<std::uint64_t, 4> s_{};
};

}  // namespace lcfusn
