#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dcop::qmc {

inline constexpr unsigned kDigits = 32;

struct NetParams {
  unsigned base = 2;
  unsigned m = 0;
  unsigned s = 1;
  unsigned t = 0;

  std::size_t points() const { return std::size_t{1} << m; }
};

// Sobol direction numbers in Joe-Kuo layout. Dimension 0 is the van der
// Corput sequence and has no table row.
class DirectionTable {
 public:
  static const DirectionTable& bundled();
  static DirectionTable parse(std::istream& in);
  static DirectionTable load(const std::string& path);

  std::size_t max_dimension() const { return rows_.size() + 1; }
  // Direction integers v_1..v_32, scaled so bit 31 is the first binary digit.
  std::array<std::uint32_t, kDigits> directions(std::size_t dim) const;

 private:
  struct Row {
    unsigned degree;
    std::uint32_t poly;
    std::vector<std::uint32_t> initial;
  };
  std::vector<Row> rows_;
};

enum class Provenance { RawNet, Scrambled, Pseudo };

struct PointSet {
  std::size_t n = 0;
  std::size_t s = 0;
  std::vector<double> values;  // row-major n x s
  Provenance provenance = Provenance::RawNet;
  std::uint64_t seed = 0;
  unsigned m = 0;  // log2(n) for nets

  double operator()(std::size_t i, std::size_t j) const { return values[i * s + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * s + j]; }
  std::span<const double> row(std::size_t i) const { return {values.data() + i * s, s}; }
};

void write_csv(std::ostream& out, const PointSet& points);

// Exact t-value of the first s Sobol coordinates at 2^m points, from the
// ranks of the generating matrices. Cost grows with C(m+s-1, s-1).
unsigned sobol_t_value(unsigned m, unsigned s, const DirectionTable& table = DirectionTable::bundled());

// Number of compositions of m into s nonnegative parts.
double composition_count(unsigned m, unsigned s);

PointSet generate_net(const NetParams& params, const DirectionTable& table = DirectionTable::bundled());

// Sobol digits of the raw net as 32-bit integers (row-major n x s).
std::vector<std::uint32_t> net_digits(unsigned m, unsigned s, const DirectionTable& table = DirectionTable::bundled());

struct CorrDepth {
  static constexpr unsigned kInfinite = std::numeric_limits<unsigned>::max();
  unsigned value = 0;

  static constexpr CorrDepth infinite() { return CorrDepth{kInfinite}; }
  constexpr bool is_infinite() const { return value == kInfinite; }
  friend constexpr bool operator==(CorrDepth, CorrDepth) = default;
};

// Base-2 nested permutation tree. Digit level k (1-based) uses the seed of
// the last segment starting at or before k; level kDigits + 1 drives the
// uniform tail below the materialized depth.
class ScrambleTree {
 public:
  explicit ScrambleTree(std::uint64_t seed);
  static ScrambleTree identity();

  bool is_identity() const { return identity_mask_ == kAllLevels; }
  std::uint64_t root_seed() const { return segments_.front().seed; }
  std::uint64_t level_seed(unsigned level) const { return level_seeds_[level - 1]; }

  // Shares levels 1..depth with *this; deeper levels come from fresh_seed.
  ScrambleTree correlated(CorrDepth depth, std::uint64_t fresh_seed) const;

  // Flip applied to digit `level` of coordinate `dim` whose higher digits are `prefix`.
  bool flip(std::size_t dim, unsigned level, std::uint32_t prefix) const;

  // Scrambles one coordinate given its 32 input digits.
  double scramble(std::size_t dim, std::uint32_t digits) const;

  friend bool operator==(const ScrambleTree& a, const ScrambleTree& b) { return a.segments_ == b.segments_; }

 private:
  static constexpr std::uint64_t kAllLevels = (std::uint64_t{1} << (kDigits + 1)) - 1;
  struct Segment {
    unsigned first_level;
    std::uint64_t seed;
    bool identity;
    friend bool operator==(const Segment&, const Segment&) = default;
  };
  ScrambleTree() = default;
  void rebuild();

  std::vector<Segment> segments_;
  std::array<std::uint64_t, kDigits + 1> level_seeds_{};
  std::uint64_t identity_mask_ = 0;  // bit k-1 set when level k is the identity
};

PointSet owen_scramble(const PointSet& net, const ScrambleTree& tree);
// Reference implementation without threading, kept for testing.
PointSet owen_scramble_serial(const PointSet& net, const ScrambleTree& tree);

// Scrambles only columns [0, cols) of a raw net given as digits; writes a
// row-major n x cols block into out.
void scramble_block(std::span<const std::uint32_t> digits, std::size_t n, std::size_t s, std::size_t cols,
                    const ScrambleTree& tree, std::span<double> out);

struct CorrelatedScramble {
  PointSet points;
  ScrambleTree tree;
};

CorrelatedScramble correlated_scramble(const PointSet& net, const ScrambleTree& reference, CorrDepth depth,
                                       std::uint64_t fresh_seed);

PointSet pseudo_uniform(std::size_t n, std::size_t s, std::uint64_t seed, std::uint64_t offset = 0);

// Smallest m with 2^m >= n.
unsigned ceil_log2(std::size_t n);

}  // namespace dcop::qmc
