#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "doctest.h"
#include "heislab/ball.hpp"
#include "heislab/error.hpp"
#include "heislab/group.hpp"

using namespace heis;

namespace {

// Word-length oracle: enumerate every word of length <= L over the four
// generators, evaluating by the 3x3 upper-triangular matrix product.
std::map<std::array<long, 3>, int> words_up_to(int L) {
  struct M {
    long a, b, c;  // [[1,a,c],[0,1,b],[0,0,1]]
  };
  auto mul = [](M p, M q) { return M{p.a + q.a, p.b + q.b, p.c + q.c + p.a * q.b}; };
  const M gens[4] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}};
  std::map<std::array<long, 3>, int> best;
  std::vector<M> layer{{0, 0, 0}};
  best[{0, 0, 0}] = 0;
  for (int len = 1; len <= L; ++len) {
    std::vector<M> next;
    next.reserve(layer.size() * 4);
    for (const M& m : layer)
      for (const M& g : gens) {
        M r = mul(m, g);
        next.push_back(r);
        best.try_emplace({r.a, r.b, r.c}, len);
      }
    layer = std::move(next);
  }
  return best;
}

GroupElement random_element(std::mt19937_64& rng, int span) {
  std::uniform_int_distribution<int> u(-span, span);
  return {u(rng), u(rng), u(rng)};
}

}  // namespace

TEST_CASE("group law basics") {
  CHECK(multiply(kA, kB) == GroupElement{1, 1, 1});
  CHECK(multiply(kB, kA) == GroupElement{1, 1, 0});
  CHECK(evaluate({Generator::A, Generator::B, Generator::AInv, Generator::BInv}) == kC);
  const GroupElement g{3, -7, 11};
  CHECK(multiply(g, kIdentity) == g);
  CHECK(multiply(kIdentity, g) == g);
  CHECK(inverse(g) == GroupElement{-3, 7, -11 + 3 * -7});
  for (Generator s : kGenerators) CHECK(step(g, s) == multiply(g, as_element(s)));
}

TEST_CASE("group axioms on random triples") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 10000; ++i) {
    const auto g = random_element(rng, 1000), h = random_element(rng, 1000), k = random_element(rng, 1000);
    REQUIRE(multiply(multiply(g, h), k) == multiply(g, multiply(h, k)));
    REQUIRE(multiply(g, inverse(g)) == kIdentity);
    REQUIRE(multiply(inverse(g), g) == kIdentity);
    REQUIRE(multiply(g, kC) == multiply(kC, g));
  }
}

TEST_CASE("power matches repeated product") {
  const GroupElement g{2, 3, -1};
  GroupElement acc = kIdentity;
  for (int k = 0; k <= 20; ++k) {
    CHECK(power(g, k) == acc);
    CHECK(power(g, -k) == inverse(acc));
    acc = multiply(acc, g);
  }
}

TEST_CASE("overflow is reported") {
  const GroupElement big{INT64_MAX / 2 + 1, INT64_MAX / 2 + 1, 0};
  CHECK_THROWS_AS(multiply(big, big), ArithmeticOverflow);
  CHECK_THROWS_AS(inverse(GroupElement{INT64_MIN, 0, 0}), ArithmeticOverflow);
  CHECK_THROWS_AS(multiply(GroupElement{1 << 30, 0, 0}, GroupElement{0, std::int64_t{1} << 40, INT64_MAX}), ArithmeticOverflow);
}

TEST_CASE("commutator word evaluates to a central power") {
  for (std::int64_t m = 1; m <= 100; ++m) {
    const Word w = commutator_word(m);
    REQUIRE(w.size() == static_cast<std::size_t>(4 * m));
    REQUIRE(evaluate(w) == GroupElement{0, 0, m * m});
  }
  CHECK_THROWS_AS(commutator_word(0), InvalidArgument);
}

TEST_CASE("ball sizes and distances match exhaustive word enumeration") {
  constexpr int L = 7;
  const auto oracle = words_up_to(L);
  const BallTable t = build_ball(L);
  CHECK(t.count(1) == 5);
  CHECK(t.count(2) == 17);
  CHECK(t.size() == oracle.size());
  for (const auto& [key, len] : oracle) {
    const GroupElement g{key[0], key[1], key[2]};
    REQUIRE(word_distance(t, g) == len);
  }
  CHECK(word_distance(t, kC) == 4);
}

TEST_CASE("ball table invariants") {
  const BallTable t = build_ball(10);
  CHECK(t.distance(0) == 0);
  CHECK(t.element(0) == kIdentity);
  for (std::size_t i = 1; i < t.size(); ++i) {
    REQUIRE(t.distance(i) >= t.distance(i - 1));
    REQUIRE(t.distance(i) <= t.distance(i - 1) + 1);
    if (t.distance(i) == t.distance(i - 1)) REQUIRE(t.element(i - 1) < t.element(i));
  }
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto j = t.find(inverse(t.element(i)));
    REQUIRE(j.has_value());
    REQUIRE(t.distance(*j) == t.distance(i));
    REQUIRE(t.index_of(t.element(i)) == i);
  }
  for (int n = 1; n <= 10; ++n) {
    CHECK(t.count(n) > t.count(n - 1));
    CHECK(t.count(n) <= t.count(1) * t.count(n - 1));
  }
  CHECK_THROWS_AS(word_distance(t, GroupElement{11, 0, 0}), OutOfRange);
  CHECK_THROWS_AS(t.count(11), OutOfRange);
}

TEST_CASE("left quotient distance and triangle inequality") {
  const BallTable t = build_ball(12);
  CHECK(left_quotient_distance(t, kA, kA) == 0);
  CHECK(left_quotient_distance(t, kIdentity, kA) == 1);
  CHECK(left_quotient_distance(t, kA, multiply(kA, kB)) == 1);
  std::mt19937_64 rng(11);
  const std::size_t n4 = t.count(4);
  std::uniform_int_distribution<std::size_t> pick(0, n4 - 1);
  for (int i = 0; i < 20000; ++i) {
    const auto& g = t.element(pick(rng));
    const auto& h = t.element(pick(rng));
    const auto& k = t.element(pick(rng));
    REQUIRE(left_quotient_distance(t, g, k) <= left_quotient_distance(t, g, h) + left_quotient_distance(t, h, k));
    // Left translation by any element preserves distance.
    REQUIRE(left_quotient_distance(t, multiply(k, g), multiply(k, h)) == left_quotient_distance(t, g, h));
  }
}

TEST_CASE("neighbor and vertical shift tables") {
  const BallTable t = build_ball(6);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (Generator s : kGenerators) {
      const auto j = t.neighbor(i, s);
      const auto expect = t.find(step(t.element(i), s));
      REQUIRE((j == kNoIndex) == !expect.has_value());
      if (expect) REQUIRE(j == *expect);
    }
  CHECK(t.vertical_shift(0, 1) == t.index_of(kC));
  CHECK(t.vertical_shift(0, 1000) == kNoIndex);
}

TEST_CASE("central powers grow like square roots") {
  const BallTable t = build_ball(30);
  CHECK(word_distance(t, kC) == 4);
  for (std::int64_t k = 1; k <= 900 && k <= 56; ++k) {
    const std::int64_t d = word_distance(t, GroupElement{0, 0, k});
    REQUIRE(d <= 4 * static_cast<std::int64_t>(std::ceil(std::sqrt(static_cast<double>(k)))));
  }
}

TEST_CASE("closed-form central word length matches the BFS table") {
  const BallTable t = build_ball(40);
  int checked = 0;
  for (std::int64_t k = -400; k <= 400; ++k) {
    const auto g = GroupElement{0, 0, k};
    if (!t.find(g)) {
      CHECK(central_power_length(k) > 40);
      continue;
    }
    CHECK(central_power_length(k) == word_distance(t, g));
    ++checked;
  }
  CHECK(checked == 201);  // |k| <= 100, exactly the s <= 20 range
  CHECK(central_power_length(900) == 120);
  CHECK(central_power_length(1) == 4);
}

TEST_CASE("ball text format round-trips") {
  const BallTable t = build_ball(5);
  std::stringstream ss;
  write_ball(ss, t);
  const std::string first = ss.str();
  CHECK(first.rfind("# heis-ball R=5 count=299\n", 0) == 0);
  const BallTable u = read_ball(ss);
  CHECK(u.size() == t.size());
  std::stringstream again;
  write_ball(again, u);
  CHECK(again.str() == first);

  std::stringstream bad("# heis-ball R=1 count=2\n0 0 0 0\n");
  CHECK_THROWS_AS(read_ball(bad), InvalidArgument);
}

TEST_CASE("growth counting agrees with the full table") {
  const BallTable t = build_ball(14);
  const auto g = ball_growth(14);
  REQUIRE(g.size() == 15);
  for (int n = 0; n <= 14; ++n) CHECK(g[n] == t.count(n));
}

TEST_CASE("memory budget is enforced") {
  CHECK_THROWS_AS(build_ball(200, 1e6), ResourceError);
  CHECK_THROWS_AS(build_ball(-1), InvalidArgument);
}
