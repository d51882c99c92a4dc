#include "heislab/group.hpp"

#include "heislab/error.hpp"

namespace heis {

namespace {

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw ArithmeticOverflow("group coordinate overflow in addition");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw ArithmeticOverflow("group coordinate overflow in multiplication");
  return r;
}

std::int64_t checked_neg(std::int64_t a) {
  if (a == INT64_MIN) throw ArithmeticOverflow("group coordinate overflow in negation");
  return -a;
}

}  // namespace

GroupElement multiply(const GroupElement& g, const GroupElement& h) {
  return {checked_add(g.x, h.x), checked_add(g.y, h.y), checked_add(checked_add(g.z, h.z), checked_mul(g.x, h.y))};
}

GroupElement inverse(const GroupElement& g) {
  return {checked_neg(g.x), checked_neg(g.y), checked_add(checked_neg(g.z), checked_mul(g.x, g.y))};
}

GroupElement power(const GroupElement& g, std::int64_t k) {
  GroupElement base = k < 0 ? inverse(g) : g;
  std::uint64_t e = k < 0 ? static_cast<std::uint64_t>(-(k + 1)) + 1 : static_cast<std::uint64_t>(k);
  GroupElement acc = kIdentity;
  while (e) {
    if (e & 1) acc = multiply(acc, base);
    e >>= 1;
    if (e) base = multiply(base, base);
  }
  return acc;
}

GroupElement as_element(Generator s) {
  switch (s) {
    case Generator::A: return kA;
    case Generator::AInv: return {-1, 0, 0};
    case Generator::B: return kB;
    case Generator::BInv: return {0, -1, 0};
  }
  return kIdentity;
}

Word commutator_word(std::int64_t m) {
  if (m < 1) throw InvalidArgument("commutator_word: m must be >= 1");
  Word w;
  w.reserve(static_cast<std::size_t>(4 * m));
  for (Generator s : {Generator::A, Generator::B, Generator::AInv, Generator::BInv})
    w.insert(w.end(), static_cast<std::size_t>(m), s);
  return w;
}

GroupElement evaluate(const Word& w) {
  GroupElement g = kIdentity;
  for (Generator s : w) g = multiply(g, as_element(s));
  return g;
}

std::string to_string(const GroupElement& g) {
  return "(" + std::to_string(g.x) + "," + std::to_string(g.y) + "," + std::to_string(g.z) + ")";
}

}  // namespace heis
