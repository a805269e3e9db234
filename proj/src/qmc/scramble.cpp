#include <cmath>
#include <stdexcept>

#include "dcop/qmc.hpp"
#include "dcop/rng.hpp"

namespace dcop::qmc {

ScrambleTree::ScrambleTree(std::uint64_t seed) : segments_{{1, seed, false}} { rebuild(); }

ScrambleTree ScrambleTree::identity() {
  ScrambleTree tree;
  tree.segments_ = {{1, 0, true}};
  tree.rebuild();
  return tree;
}

void ScrambleTree::rebuild() {
  identity_mask_ = 0;
  std::size_t seg = 0;
  for (unsigned level = 1; level <= kDigits + 1; ++level) {
    while (seg + 1 < segments_.size() && segments_[seg + 1].first_level <= level) ++seg;
    level_seeds_[level - 1] = segments_[seg].seed;
    if (segments_[seg].identity) identity_mask_ |= std::uint64_t{1} << (level - 1);
  }
}

ScrambleTree ScrambleTree::correlated(CorrDepth depth, std::uint64_t fresh_seed) const {
  if (depth.is_infinite() || depth.value > kDigits) return *this;
  ScrambleTree out;
  for (const Segment& s : segments_)
    if (s.first_level <= depth.value) out.segments_.push_back(s);
  out.segments_.push_back({depth.value + 1, fresh_seed, false});
  out.rebuild();
  return out;
}

namespace {

inline std::uint64_t node_key(std::size_t dim, unsigned level, std::uint32_t prefix) {
  return (static_cast<std::uint64_t>(dim) << 38) | (static_cast<std::uint64_t>(level) << 32) | prefix;
}

inline bool node_bit(std::uint64_t seed, std::uint64_t key) {
  return (mix64(seed ^ (key * 0x9e3779b97f4a7c15ULL)) >> 63) != 0;
}

}  // namespace

bool ScrambleTree::flip(std::size_t dim, unsigned level, std::uint32_t prefix) const {
  if ((identity_mask_ >> (level - 1)) & 1u) return false;
  return node_bit(level_seeds_[level - 1], node_key(dim, level, prefix));
}

double ScrambleTree::scramble(std::size_t dim, std::uint32_t digits) const {
  std::uint32_t out = 0;
  for (unsigned level = 1; level <= kDigits; ++level) {
    const unsigned shift = kDigits - level;
    const std::uint32_t prefix = level == 1 ? 0u : digits >> (shift + 1);
    std::uint32_t bit = (digits >> shift) & 1u;
    if (!((identity_mask_ >> (level - 1)) & 1u)) bit ^= node_bit(level_seeds_[level - 1], node_key(dim, level, prefix));
    out |= bit << shift;
  }
  std::uint64_t tail = 0;
  if (!((identity_mask_ >> kDigits) & 1u)) {
    const std::uint64_t key = (static_cast<std::uint64_t>(dim) << 32) | digits;
    tail = mix64(level_seeds_[kDigits] ^ mix64(key + 0x2545f4914f6cdd1dULL)) >> 43;  // 21 bits
  }
  return (static_cast<double>(out) * 0x1.0p21 + static_cast<double>(tail)) * 0x1.0p-53;
}

namespace {

std::vector<std::uint32_t> digits_of(const PointSet& net) {
  if (net.provenance != Provenance::RawNet) throw std::invalid_argument("owen_scramble expects a raw net");
  std::vector<std::uint32_t> d(net.values.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = static_cast<std::uint32_t>(std::ldexp(net.values[k], 32));
  return d;
}

PointSet scrambled_shell(const PointSet& net, const ScrambleTree& tree) {
  PointSet out;
  out.n = net.n;
  out.s = net.s;
  out.m = net.m;
  out.provenance = Provenance::Scrambled;
  out.seed = tree.root_seed();
  out.values.resize(net.values.size());
  return out;
}

}  // namespace

void scramble_block(std::span<const std::uint32_t> digits, std::size_t n, std::size_t s, std::size_t cols,
                    const ScrambleTree& tree, std::span<double> out) {
  if (cols > s || digits.size() < n * s || out.size() < n * cols) throw std::invalid_argument("scramble_block sizes");
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n * cols >= 16384)
  for (std::ptrdiff_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) out[i * cols + j] = tree.scramble(j, digits[i * s + j]);
}

PointSet owen_scramble(const PointSet& net, const ScrambleTree& tree) {
  const auto d = digits_of(net);
  PointSet out = scrambled_shell(net, tree);
  scramble_block(d, net.n, net.s, net.s, tree, out.values);
  return out;
}

PointSet owen_scramble_serial(const PointSet& net, const ScrambleTree& tree) {
  const auto d = digits_of(net);
  PointSet out = scrambled_shell(net, tree);
  for (std::size_t i = 0; i < net.n; ++i)
    for (std::size_t j = 0; j < net.s; ++j) out.values[i * net.s + j] = tree.scramble(j, d[i * net.s + j]);
  return out;
}

CorrelatedScramble correlated_scramble(const PointSet& net, const ScrambleTree& reference, CorrDepth depth,
                                       std::uint64_t fresh_seed) {
  ScrambleTree tree = reference.correlated(depth, fresh_seed);
  PointSet points = owen_scramble(net, tree);
  return {std::move(points), std::move(tree)};
}

}  // namespace dcop::qmc
