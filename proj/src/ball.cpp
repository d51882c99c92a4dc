#include "heislab/ball.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <string>

#include "heislab/error.hpp"

namespace heis {

namespace {

constexpr std::int64_t kMaxRadius = 4000;

void check_radius(std::int64_t R) {
  if (R < 0) throw InvalidArgument("ball radius must be >= 0");
  if (R > kMaxRadius) throw InvalidArgument("ball radius exceeds supported maximum " + std::to_string(kMaxRadius));
}

// Any word of length <= R with A letters a^{+-1} and B letters b^{+-1} ends at
// |x| <= A and |z| <= A*B <= R^2/4.
std::int64_t z_bound(std::int64_t R) { return R * R / 4; }

double count_estimate(std::int64_t R) {
  const double r = static_cast<double>(R);
  return 0.45 * r * r * r * r + 6.0 * r * r * r + 20.0 * r * r + 20.0;
}

class BitBox {
 public:
  BitBox(std::int64_t R, std::int64_t Z) : R_(R), Z_(Z), side_(2 * R + 1), depth_(2 * Z + 1) {
    bits_.assign((static_cast<std::size_t>(side_ * side_ * depth_) + 63) / 64, 0);
  }
  // Returns true when the bit was newly set.
  bool mark(const GroupElement& g) {
    const std::size_t k = static_cast<std::size_t>(((g.x + R_) * side_ + (g.y + R_)) * depth_ + (g.z + Z_));
    const std::uint64_t m = std::uint64_t{1} << (k & 63);
    std::uint64_t& w = bits_[k >> 6];
    if (w & m) return false;
    w |= m;
    return true;
  }

 private:
  std::int64_t R_, Z_, side_, depth_;
  std::vector<std::uint64_t> bits_;
};

}  // namespace

double ball_memory_estimate(std::int64_t R) {
  check_radius(R);
  const double n = count_estimate(R);
  const double side = 2.0 * static_cast<double>(R) + 1.0;
  const double depth = 2.0 * static_cast<double>(z_bound(R)) + 1.0;
  const double per_element = sizeof(GroupElement) + sizeof(std::uint16_t) + 4 * sizeof(std::uint32_t) + 1.5 * sizeof(std::uint32_t);
  return n * per_element + side * side * depth / 8.0 + side * side * 24.0;
}

BallTable build_ball(std::int64_t R, double memory_budget) {
  check_radius(R);
  const double est = ball_memory_estimate(R);
  if (est > memory_budget)
    throw ResourceError("build_ball: estimated " + std::to_string(est) + " bytes exceeds budget " + std::to_string(memory_budget), est);

  BallTable t;
  t.radius_ = R;
  BitBox seen(R, z_bound(R));
  std::vector<GroupElement> frontier{kIdentity};
  seen.mark(kIdentity);
  for (std::int64_t d = 0;; ++d) {
    std::sort(frontier.begin(), frontier.end(), [](const GroupElement& a, const GroupElement& b) { return a < b; });
    t.elements_.insert(t.elements_.end(), frontier.begin(), frontier.end());
    t.dist_.insert(t.dist_.end(), frontier.size(), static_cast<std::uint16_t>(d));
    if (d == R) break;
    std::vector<GroupElement> next;
    next.reserve(frontier.size() * 2);
    for (const auto& g : frontier)
      for (Generator s : kGenerators) {
        const GroupElement h = step(g, s);
        if (seen.mark(h)) next.push_back(h);
      }
    frontier = std::move(next);
  }
  t.finalize();
  return t;
}

void BallTable::finalize() {
  const std::int64_t R = radius_;
  const std::int64_t side = 2 * R + 1;
  layer_end_.assign(static_cast<std::size_t>(R + 1), 0);
  for (std::size_t i = 0; i < dist_.size(); ++i) layer_end_[dist_[i]] = i + 1;
  for (std::size_t d = 1; d < layer_end_.size(); ++d) layer_end_[d] = std::max(layer_end_[d], layer_end_[d - 1]);

  columns_.assign(static_cast<std::size_t>(side * side), Column{});
  for (const auto& g : elements_) {
    Column& c = columns_[static_cast<std::size_t>((g.x + R) * side + (g.y + R))];
    if (c.zmax < c.zmin) {
      c.zmin = c.zmax = g.z;
    } else {
      c.zmin = std::min(c.zmin, g.z);
      c.zmax = std::max(c.zmax, g.z);
    }
  }
  std::size_t total = 0;
  for (auto& c : columns_) {
    c.offset = total;
    if (c.zmax >= c.zmin) total += static_cast<std::size_t>(c.zmax - c.zmin + 1);
  }
  slots_.assign(total, kNoIndex);
  for (std::size_t i = 0; i < elements_.size(); ++i) {
    const auto& g = elements_[i];
    const Column& c = columns_[static_cast<std::size_t>((g.x + R) * side + (g.y + R))];
    slots_[c.offset + static_cast<std::size_t>(g.z - c.zmin)] = static_cast<std::uint32_t>(i);
  }
  nbr_.assign(4 * elements_.size(), kNoIndex);
  for (std::size_t i = 0; i < elements_.size(); ++i)
    for (Generator s : kGenerators)
      if (auto j = find(step(elements_[i], s))) nbr_[4 * i + static_cast<int>(s)] = static_cast<std::uint32_t>(*j);
}

std::size_t BallTable::count(std::int64_t n) const {
  if (n < 0) return 0;
  if (n > radius_) throw OutOfRange("ball count requested for n=" + std::to_string(n) + " beyond table radius " + std::to_string(radius_));
  return layer_end_[static_cast<std::size_t>(n)];
}

std::optional<std::size_t> BallTable::find(const GroupElement& g) const {
  const std::int64_t R = radius_;
  if (g.x < -R || g.x > R || g.y < -R || g.y > R) return std::nullopt;
  const Column& c = columns_[static_cast<std::size_t>((g.x + R) * (2 * R + 1) + (g.y + R))];
  if (g.z < c.zmin || g.z > c.zmax) return std::nullopt;
  const std::uint32_t s = slots_[c.offset + static_cast<std::size_t>(g.z - c.zmin)];
  if (s == kNoIndex) return std::nullopt;
  return s;
}

std::size_t BallTable::index_of(const GroupElement& g) const {
  if (auto i = find(g)) return *i;
  throw OutOfRange("element " + to_string(g) + " is outside the ball of radius " + std::to_string(radius_));
}

std::uint32_t BallTable::vertical_shift(std::size_t i, std::int64_t k) const {
  const GroupElement& g = elements_[i];
  if (auto j = find({g.x, g.y, g.z + k})) return static_cast<std::uint32_t>(*j);
  return kNoIndex;
}

std::size_t BallTable::memory_bytes() const {
  return elements_.capacity() * sizeof(GroupElement) + dist_.capacity() * sizeof(std::uint16_t) +
         columns_.capacity() * sizeof(Column) + slots_.capacity() * 4 + nbr_.capacity() * 4;
}

void visit_ball_layers(std::int64_t R, const LayerVisitor& visit, double memory_budget) {
  check_radius(R);
  const std::int64_t Z = z_bound(R);
  const std::int64_t depth = 2 * Z + 1;
  // Columns over the diamond |x| + |y| <= R.
  std::vector<std::int64_t> col_start(static_cast<std::size_t>(2 * R + 2), 0);
  for (std::int64_t x = -R; x <= R; ++x)
    col_start[static_cast<std::size_t>(x + R + 1)] = col_start[static_cast<std::size_t>(x + R)] + 2 * (R - std::abs(x)) + 1;
  const double bits = static_cast<double>(col_start.back()) * static_cast<double>(depth);
  const double frontier_bytes = 2.0 * 8.0 * 2.0 * static_cast<double>(R) * static_cast<double>(R) * static_cast<double>(R);
  const double est = bits / 8.0 + frontier_bytes;
  if (est > memory_budget)
    throw ResourceError("ball traversal: estimated " + std::to_string(est) + " bytes exceeds budget", est);

  std::vector<std::uint64_t> seen(static_cast<std::size_t>((bits + 63) / 64), 0);
  auto bit = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    return static_cast<std::size_t>((col_start[static_cast<std::size_t>(x + R)] + y + (R - std::abs(x))) * depth + z + Z);
  };
  auto pack = [&](const GroupElement& g) {
    return (static_cast<std::uint64_t>(g.x + R) << 48) | (static_cast<std::uint64_t>(g.y + R) << 32) | static_cast<std::uint64_t>(g.z + Z);
  };
  auto unpack = [&](std::uint64_t p) {
    return GroupElement{static_cast<std::int64_t>(p >> 48) - R, static_cast<std::int64_t>((p >> 32) & 0xFFFF) - R,
                        static_cast<std::int64_t>(p & 0xFFFFFFFF) - Z};
  };

  constexpr std::size_t kBatch = 1 << 16;
  std::vector<GroupElement> batch;
  batch.reserve(kBatch);
  auto emit = [&](std::int64_t d, const std::vector<std::uint64_t>& layer) {
    for (std::size_t b = 0; b < layer.size(); b += kBatch) {
      batch.clear();
      for (std::size_t i = b; i < std::min(layer.size(), b + kBatch); ++i) batch.push_back(unpack(layer[i]));
      visit(d, std::span<const GroupElement>(batch));
    }
  };

  std::vector<std::uint64_t> frontier{pack(kIdentity)}, next;
  {
    const std::size_t k = bit(0, 0, 0);
    seen[k >> 6] |= std::uint64_t{1} << (k & 63);
  }
  emit(0, frontier);
  for (std::int64_t d = 1; d <= R; ++d) {
    next.clear();
    for (std::uint64_t p : frontier) {
      const GroupElement g = unpack(p);
      for (Generator s : kGenerators) {
        const GroupElement h = step(g, s);
        const std::size_t k = bit(h.x, h.y, h.z);
        const std::uint64_t m = std::uint64_t{1} << (k & 63);
        if (seen[k >> 6] & m) continue;
        seen[k >> 6] |= m;
        next.push_back(pack(h));
      }
    }
    std::swap(frontier, next);
    emit(d, frontier);
  }
}

std::vector<std::uint64_t> ball_growth(std::int64_t R, double memory_budget) {
  std::vector<std::uint64_t> layer(static_cast<std::size_t>(std::max<std::int64_t>(R, 0) + 1), 0);
  visit_ball_layers(
      R, [&](std::int64_t d, std::span<const GroupElement> e) { layer[static_cast<std::size_t>(d)] += e.size(); }, memory_budget);
  for (std::size_t d = 1; d < layer.size(); ++d) layer[d] += layer[d - 1];
  return layer;
}

std::int64_t word_distance(const BallTable& table, const GroupElement& g) {
  return table.distance(table.index_of(g));
}

std::int64_t left_quotient_distance(const BallTable& table, const GroupElement& g, const GroupElement& h) {
  return word_distance(table, multiply(inverse(g), h));
}

std::int64_t central_power_length(std::int64_t k) {
  if (k == 0) return 0;
  if (k == std::numeric_limits<std::int64_t>::min()) throw ArithmeticOverflow("central_power_length: |k| overflows");
  const std::int64_t a = k < 0 ? -k : k;
  if (a > (std::int64_t{1} << 60)) throw ArithmeticOverflow("central_power_length: |k| too large");
  auto s = static_cast<std::int64_t>(2.0 * std::sqrt(static_cast<double>(a)));
  s = std::max<std::int64_t>(s - 2, 1);
  while ((s * s) / 4 < a) ++s;
  return 2 * s;
}

void write_ball(std::ostream& os, const BallTable& table) {
  os << "# heis-ball R=" << table.radius() << " count=" << table.size() << '\n';
  char buf[96];
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto& g = table.element(i);
    char* p = buf;
    for (std::int64_t v : {g.x, g.y, g.z, static_cast<std::int64_t>(table.distance(i))}) {
      if (p != buf) *p++ = ' ';
      p = std::to_chars(p, buf + sizeof buf, v).ptr;
    }
    *p++ = '\n';
    os.write(buf, p - buf);
  }
}

BallTable read_ball(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw InvalidArgument("ball file: missing header");
  long long R = -1;
  unsigned long long n = 0;
  if (std::sscanf(line.c_str(), "# heis-ball R=%lld count=%llu", &R, &n) != 2) throw InvalidArgument("ball file: malformed header");
  check_radius(R);
  BallTable t;
  t.radius_ = R;
  t.elements_.reserve(n);
  t.dist_.reserve(n);
  for (unsigned long long i = 0; i < n; ++i) {
    long long x, y, z, d;
    if (!(is >> x >> y >> z >> d)) throw InvalidArgument("ball file: truncated at element " + std::to_string(i));
    if (d < 0 || d > R) throw InvalidArgument("ball file: distance out of range at element " + std::to_string(i));
    const GroupElement g{x, y, z};
    if (!t.elements_.empty()) {
      const bool ordered = t.dist_.back() < d || (t.dist_.back() == d && t.elements_.back() < g);
      if (!ordered) throw InvalidArgument("ball file: elements not in (distance, x, y, z) order");
    }
    if (std::abs(x) + std::abs(y) > R || std::abs(z) > z_bound(R)) throw InvalidArgument("ball file: element outside radius bounds");
    t.elements_.push_back(g);
    t.dist_.push_back(static_cast<std::uint16_t>(d));
  }
  t.finalize();
  return t;
}

}  // namespace heis
