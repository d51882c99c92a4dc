#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "heislab/group.hpp"

namespace heis {

inline constexpr std::uint32_t kNoIndex = 0xFFFFFFFFu;

/// Ball B_R of the word metric for {a, b, a^-1, b^-1}, with exact distances.
/// Elements are sorted by (distance, x, y, z). Immutable once built.
class BallTable {
 public:
  BallTable() = default;

  std::int64_t radius() const { return radius_; }
  std::size_t size() const { return elements_.size(); }
  const std::vector<GroupElement>& elements() const { return elements_; }
  const GroupElement& element(std::size_t i) const { return elements_[i]; }
  int distance(std::size_t i) const { return dist_[i]; }

  /// |B_n| for n <= radius; the first count(n) elements are exactly B_n.
  std::size_t count(std::int64_t n) const;

  std::optional<std::size_t> find(const GroupElement& g) const;
  /// Throws OutOfRange when g is not in the table.
  std::size_t index_of(const GroupElement& g) const;

  /// Index of element(i)*s, or kNoIndex when it falls outside the table.
  std::uint32_t neighbor(std::size_t i, Generator s) const { return nbr_[4 * i + static_cast<int>(s)]; }

  /// Index of g*c^k, or kNoIndex.
  std::uint32_t vertical_shift(std::size_t i, std::int64_t k) const;

  std::size_t memory_bytes() const;

  friend BallTable build_ball(std::int64_t, double);
  friend BallTable read_ball(std::istream&);

 private:
  struct Column {
    std::int64_t zmin = 0;
    std::int64_t zmax = -1;
    std::size_t offset = 0;
  };

  void finalize();  // builds index, layer offsets and neighbor table from elements_/dist_

  std::int64_t radius_ = -1;
  std::vector<GroupElement> elements_;
  std::vector<std::uint16_t> dist_;
  std::vector<std::size_t> layer_end_;
  std::vector<Column> columns_;  // (2R+1)^2, row-major in (x, y)
  std::vector<std::uint32_t> slots_;
  std::vector<std::uint32_t> nbr_;
};

/// Upper estimate of the bytes build_ball(R) will allocate.
double ball_memory_estimate(std::int64_t R);

/// Default budget for build_ball, 4 GiB.
inline constexpr double kDefaultMemoryBudget = 4.0 * 1024 * 1024 * 1024;

/// BFS from the identity. Throws ResourceError when the estimate exceeds
/// the budget.
BallTable build_ball(std::int64_t R, double memory_budget = kDefaultMemoryBudget);

/// Streams B_R layer by layer without storing it, in bounded batches.
using LayerVisitor = std::function<void(std::int64_t distance, std::span<const GroupElement> batch)>;
void visit_ball_layers(std::int64_t R, const LayerVisitor& visit, double memory_budget = kDefaultMemoryBudget);

/// |B_0|, ..., |B_R| by a counting-only BFS (no element storage). Reaches
/// radii where the full table would not fit.
std::vector<std::uint64_t> ball_growth(std::int64_t R, double memory_budget = kDefaultMemoryBudget);

std::int64_t word_distance(const BallTable& table, const GroupElement& g);
std::int64_t left_quotient_distance(const BallTable& table, const GroupElement& g, const GroupElement& h);

/// d_W(e, c^k) without a table. The horizontal trace of a word for c^k is a
/// closed lattice path of length 2s enclosing signed area k; the largest
/// area for that length is floor(s^2/4), and every smaller area >= s-1 is
/// reached by a staircase in the same bounding box.
std::int64_t central_power_length(std::int64_t k);

/// Text format: "# heis-ball R=<R> count=<N>" then one "x y z d" per line.
void write_ball(std::ostream& os, const BallTable& table);
BallTable read_ball(std::istream& is);

}  // namespace heis
