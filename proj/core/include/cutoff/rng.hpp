#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace cutoff {

// Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

std::uint64_t splitmix64(std::uint64_t x);

// Mixes a master seed with integer tags into an independent seed.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> tags);

// Counter-based stream: (seed, stream, counter) fully determines the output.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1).
  double uniform();
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  double normal();
  double exponential();
  std::uint64_t poisson(double mean);
  std::uint64_t binomial(std::uint64_t trials, double p);

 private:
  void refill();

  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace cutoff
