#pragma once

#include <cstdint>

namespace ckmopt {

/// Named random streams. Each module draws from its own stream so that adding
/// draws in one place never shifts the sequence seen by another.
enum class Stream : std::uint64_t {
  kLayout = 1,
  kShadowing = 2,
  kSampling = 3,
  kDfoInit = 4,
  kDfoResample = 5,
  kSubproblem = 6,
  kTest = 99,
};

/// Counter-based generator: draw n is a pure function of (seed, stream, n).
/// Integer draws are bit-reproducible everywhere; floating-point transforms
/// (normal()) rely on the platform libm for log/cos.
class SeededRng {
 public:
  SeededRng(std::uint64_t seed, std::uint64_t stream);
  SeededRng(std::uint64_t seed, Stream stream)
      : SeededRng(seed, static_cast<std::uint64_t>(stream)) {}

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Uniform integer on [0, n), unbiased.
  std::uint64_t below(std::uint64_t n);
  double normal();

  /// Independent child stream, e.g. one per GBS.
  SeededRng fork(std::uint64_t substream) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ckmopt
