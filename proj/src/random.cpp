#include "lcfusn/random.hpp"

#include <cmath>

#include "lcfusn/normal.hpp"

namespace lcfusn {
namespace {

std::uint64_t splitmix64(std::uint64_t& x) noexcept {
  std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id) {
  std::uint64_t mix = seed;
  std::uint64_t key = splitmix64(mix);
  std::uint64_t sid = stream_id ^ 0xD1B54A32D192ED03ULL;
  key ^= splitmix64(sid);
  for (auto& word : s_) word = splitmix64(key);
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t RandomStream::next_u64() noexcept {
  ++draws_;
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RandomStream::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() noexcept { return norm_quantile_unchecked(uniform()); }

double RandomStream::exponential() noexcept { return -std::log(uniform()); }

RandomStream RandomStream::split(std::uint64_t child_id) const {
  std::uint64_t x = stream_id_ ^ 0x632BE59BD9B4E019ULL;
  return RandomStream(seed_, splitmix64(x) ^ (child_id * 0x9E3779B97F4A7C15ULL));
}

}  // namespace lcfusn
