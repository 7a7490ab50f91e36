#pragma once

#include <cstdint>
#include <random>

namespace fnpp {

/// Reproducible random stream identified by (seed, stream_id).
///
/// Wraps std::mt19937_64 seeded through std::seed_seq, both of which are
/// fully specified by the standard. The variate conversions below are
/// written out explicitly instead of using <random> distributions, whose
/// algorithms differ between standard libraries.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Standard exponential, -log U.
  double exponential();
  /// Poisson(mean); inversion for small means, PTRS (Hormann) otherwise.
  std::uint64_t poisson(double mean);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
};

}  // namespace fnpp
