#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace heis {

// (x, y, z) stands for c^z b^y a^x. With this convention the product is
// (x1, y1, z1)(x2, y2, z2) = (x1 + x2, y1 + y2, z1 + z2 + x1*y2).
struct GroupElement {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;
};

inline constexpr GroupElement kIdentity{0, 0, 0};
inline constexpr GroupElement kA{1, 0, 0};
inline constexpr GroupElement kB{0, 1, 0};
inline constexpr GroupElement kC{0, 0, 1};

/// Throws ArithmeticOverflow when any coordinate leaves int64.
GroupElement multiply(const GroupElement& g, const GroupElement& h);
GroupElement inverse(const GroupElement& g);
GroupElement power(const GroupElement& g, std::int64_t k);

inline GroupElement operator*(const GroupElement& g, const GroupElement& h) { return multiply(g, h); }

enum class Generator : std::uint8_t { A, AInv, B, BInv };

inline constexpr Generator kGenerators[4] = {Generator::A, Generator::AInv, Generator::B, Generator::BInv};

GroupElement as_element(Generator s);

/// Right multiplication by a generator, g*s. Unchecked; callers stay in
/// small ranges.
constexpr GroupElement step(const GroupElement& g, Generator s) {
  switch (s) {
    case Generator::A: return {g.x + 1, g.y, g.z};
    case Generator::AInv: return {g.x - 1, g.y, g.z};
    case Generator::B: return {g.x, g.y + 1, g.z + g.x};
    case Generator::BInv: return {g.x, g.y - 1, g.z - g.x};
  }
  return g;
}

using Word = std::vector<Generator>;

/// a^m b^m a^-m b^-m, which evaluates to c^(m^2).
Word commutator_word(std::int64_t m);
GroupElement evaluate(const Word& w);

std::string to_string(const GroupElement& g);

}  // namespace heis
