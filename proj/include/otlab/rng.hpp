#pragma once

#include <array>
#include <cstdint>

namespace otlab {

// Counter-based generator (Philox 4x32-10).  Every draw is a pure function of
// (seed, stream, index), so sampling is reproducible bit-for-bit no matter how
// work is partitioned across threads or processes.
std::array<std::uint32_t, 4> philox4x32(std::uint64_t key,
                                        const std::array<std::uint32_t, 4>& counter);

// Uniform double in the open interval (0,1) from one 64-bit word.
double uniform_from_bits(std::uint64_t bits);

double standard_normal_pdf(double x);
double standard_normal_cdf(double x);
// Inverse of the standard normal CDF, accurate to ~1e-15 relative.
double standard_normal_quantile(double p);

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // 64 uniform bits for (stream, index).
  std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const;
  double uniform(std::uint64_t stream, std::uint64_t index) const;
  double normal(std::uint64_t stream, std::uint64_t index) const;

  // Derive an unrelated seed for a nested context (e.g. inner Monte Carlo).
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

 private:
  std::uint64_t seed_;
};

}  // namespace otlab
