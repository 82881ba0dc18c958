#include <cmath>
#include <vector>

#include "doctest.h"

#include "ckmopt/rng.hpp"

using namespace ckmopt;

TEST_SUITE("rng") {

TEST_CASE("equal seed and stream give equal sequences") {
  SeededRng a(42, Stream::kLayout);
  SeededRng b(42, Stream::kLayout);
  for (int i = 0; i < 10000; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("streams and seeds are distinct") {
  SeededRng a(42, Stream::kLayout);
  SeededRng b(42, Stream::kShadowing);
  SeededRng c(43, Stream::kLayout);
  int same_ab = 0;
  int same_ac = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    same_ab += x == b.next_u64();
    same_ac += x == c.next_u64();
  }
  CHECK(same_ab == 0);
  CHECK(same_ac == 0);
}

TEST_CASE("draws are a pure function of the counter") {
  SeededRng a(7, Stream::kTest);
  for (int i = 0; i < 5; ++i) a.next_u64();
  const auto sixth = a.next_u64();
  SeededRng b(7, Stream::kTest);
  std::vector<std::uint64_t> v;
  for (int i = 0; i < 6; ++i) v.push_back(b.next_u64());
  CHECK(v.back() == sixth);
  CHECK(a.counter() == 6);
}

TEST_CASE("fork does not disturb the parent") {
  SeededRng a(9, Stream::kTest);
  SeededRng b(9, Stream::kTest);
  SeededRng child = a.fork(3);
  child.next_u64();
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.fork(3).next_u64() == b.fork(3).next_u64());
  CHECK(a.fork(3).next_u64() != a.fork(4).next_u64());
}

TEST_CASE("uniform and bounded draws") {
  SeededRng r(1, Stream::kTest);
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));

  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = r.below(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);

  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform(-3.0, 2.0);
    REQUIRE(u >= -3.0);
    REQUIRE(u < 2.0);
  }
}

TEST_CASE("normal draws have unit moments") {
  SeededRng r(5, Stream::kTest);
  const int n = 200000;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
  }
  const double mean = s1 / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(s2 / n - mean * mean == doctest::Approx(1.0).epsilon(0.02));
}

}
