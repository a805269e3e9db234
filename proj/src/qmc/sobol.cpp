#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dcop/error.hpp"
#include "dcop/qmc.hpp"
#include "dcop/rng.hpp"

namespace dcop::qmc {

namespace detail {
extern const char* const kBundledDirectionText;
}

const DirectionTable& DirectionTable::bundled() {
  static const DirectionTable table = [] {
    std::istringstream in(detail::kBundledDirectionText);
    return parse(in);
  }();
  return table;
}

DirectionTable DirectionTable::parse(std::istream& in) {
  DirectionTable table;
  std::string line;
  std::size_t expected = 2;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'd') continue;
    std::istringstream fields(line);
    std::size_t d = 0;
    Row row{};
    if (!(fields >> d >> row.degree >> row.poly)) throw DataError("malformed direction-number row: " + line);
    if (d != expected) throw DataError("direction-number rows out of order at dimension " + std::to_string(d));
    if (row.degree == 0 || row.degree > kDigits) throw DataError("bad polynomial degree at dimension " + std::to_string(d));
    for (unsigned k = 0; k < row.degree; ++k) {
      std::uint32_t mk = 0;
      if (!(fields >> mk)) throw DataError("missing direction integer at dimension " + std::to_string(d));
      if (mk % 2 == 0 || mk >= (std::uint32_t{1} << (k + 1)))
        throw DataError("invalid direction integer at dimension " + std::to_string(d));
      row.initial.push_back(mk);
    }
    table.rows_.push_back(std::move(row));
    ++expected;
  }
  return table;
}

DirectionTable DirectionTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open direction-number file " + path);
  return parse(in);
}

std::array<std::uint32_t, kDigits> DirectionTable::directions(std::size_t dim) const {
  std::array<std::uint32_t, kDigits> v{};
  if (dim == 0) {
    for (unsigned i = 0; i < kDigits; ++i) v[i] = std::uint32_t{1} << (kDigits - 1 - i);
    return v;
  }
  if (dim >= max_dimension())
    throw ConfigError("dimension " + std::to_string(dim + 1) + " exceeds direction-number table (" +
                      std::to_string(max_dimension()) + ")");
  const Row& row = rows_[dim - 1];
  const unsigned s = row.degree;
  // v[i] holds V_{i+1} = m_{i+1} << (32 - (i+1)).
  for (unsigned i = 0; i < s && i < kDigits; ++i) v[i] = row.initial[i] << (kDigits - 1 - i);
  for (unsigned i = s; i < kDigits; ++i) {
    std::uint32_t x = v[i - s] ^ (v[i - s] >> s);
    for (unsigned k = 1; k < s; ++k)
      if ((row.poly >> (s - 1 - k)) & 1u) x ^= v[i - k];
    v[i] = x;
  }
  return v;
}

void write_csv(std::ostream& out, const PointSet& points) {
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < points.n; ++i) {
    for (std::size_t j = 0; j < points.s; ++j) {
      if (j) out << ',';
      out << points(i, j);
    }
    out << '\n';
  }
  out.precision(old);
}

unsigned ceil_log2(std::size_t n) {
  unsigned m = 0;
  while ((std::size_t{1} << m) < n) ++m;
  return m;
}

double composition_count(unsigned m, unsigned s) {
  // C(m + s - 1, s - 1)
  double c = 1.0;
  for (unsigned i = 1; i < s; ++i) c = c * (m + i) / i;
  return c;
}

namespace {

// Rank over GF(2) of row vectors stored as bit masks.
unsigned gf2_rank(std::vector<std::uint64_t> rows) {
  unsigned rank = 0;
  for (int bit = 63; bit >= 0 && rank < rows.size(); --bit) {
    const std::uint64_t mask = std::uint64_t{1} << bit;
    std::size_t pivot = rank;
    while (pivot < rows.size() && !(rows[pivot] & mask)) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r)
      if (r != rank && (rows[r] & mask)) rows[r] ^= rows[rank];
    ++rank;
  }
  return rank;
}

// Row r (digit r+1) of the generating matrix of one coordinate: bit k set
// when direction V_{k+1} has digit r+1 set.
std::vector<std::vector<std::uint64_t>> generator_rows(unsigned m, unsigned s, const DirectionTable& table) {
  std::vector<std::vector<std::uint64_t>> out(s, std::vector<std::uint64_t>(m, 0));
  for (unsigned j = 0; j < s; ++j) {
    const auto v = table.directions(j);
    for (unsigned r = 0; r < m; ++r)
      for (unsigned k = 0; k < m; ++k)
        if ((v[k] >> (kDigits - 1 - r)) & 1u) out[j][r] |= std::uint64_t{1} << k;
  }
  return out;
}

bool all_compositions_full_rank(const std::vector<std::vector<std::uint64_t>>& gen, unsigned total, unsigned s) {
  std::vector<unsigned> d(s, 0);
  std::vector<std::uint64_t> rows;
  std::function<bool(unsigned, unsigned)> rec = [&](unsigned j, unsigned left) -> bool {
    if (j + 1 == s) {
      d[j] = left;
      rows.clear();
      for (unsigned q = 0; q < s; ++q)
        for (unsigned r = 0; r < d[q]; ++r) rows.push_back(gen[q][r]);
      return gf2_rank(rows) == total;
    }
    for (unsigned x = 0; x <= left; ++x) {
      d[j] = x;
      if (!rec(j + 1, left - x)) return false;
    }
    return true;
  };
  return rec(0, total);
}

}  // namespace

unsigned sobol_t_value(unsigned m, unsigned s, const DirectionTable& table) {
  if (s == 0) throw std::invalid_argument("dimension must be positive");
  if (m > kDigits) throw ConfigError("m exceeds 32 binary digits");
  const auto gen = generator_rows(m, s, table);
  for (unsigned t = 0; t < m; ++t)
    if (all_compositions_full_rank(gen, m - t, s)) return t;
  return m;
}

std::vector<std::uint32_t> net_digits(unsigned m, unsigned s, const DirectionTable& table) {
  if (m > kDigits) throw ConfigError("m exceeds 32 binary digits");
  const std::size_t n = std::size_t{1} << m;
  std::vector<std::uint32_t> out(n * s);
  for (unsigned j = 0; j < s; ++j) {
    const auto v = table.directions(j);
    // Gray-code walk, then store in natural order.
    std::uint32_t x = 0;
    out[j] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const unsigned c = static_cast<unsigned>(__builtin_ctzll(i));
      x ^= v[c];
      const std::size_t gray = i ^ (i >> 1);
      out[gray * s + j] = x;
    }
  }
  return out;
}

PointSet generate_net(const NetParams& params, const DirectionTable& table) {
  if (params.base != 2) throw ConfigError("unsupported base " + std::to_string(params.base) + " (only base 2)");
  if (params.s == 0) throw ConfigError("net dimension must be positive");
  if (params.m > kDigits) throw ConfigError("m exceeds 32 binary digits");
  if (params.t > params.m) throw ConfigError("quality t exceeds m");
  if (params.s > table.max_dimension())
    throw ConfigError("dimension " + std::to_string(params.s) + " exceeds direction-number table (" +
                      std::to_string(table.max_dimension()) + ")");
  if (params.t < params.m && composition_count(params.m - params.t, params.s) <= 2e6) {
    const auto gen = generator_rows(params.m, params.s, table);
    if (!all_compositions_full_rank(gen, params.m - params.t, params.s))
      throw ConfigError("a (" + std::to_string(params.t) + "," + std::to_string(params.m) + "," +
                        std::to_string(params.s) + ")-net is not attainable with Sobol points");
  }
  PointSet out;
  out.n = params.points();
  out.s = params.s;
  out.m = params.m;
  out.provenance = Provenance::RawNet;
  const auto digits = net_digits(params.m, params.s, table);
  out.values.resize(digits.size());
  for (std::size_t i = 0; i < digits.size(); ++i) out.values[i] = std::ldexp(static_cast<double>(digits[i]), -32);
  return out;
}

PointSet pseudo_uniform(std::size_t n, std::size_t s, std::uint64_t seed, std::uint64_t offset) {
  PointSet out;
  out.n = n;
  out.s = s;
  out.provenance = Provenance::Pseudo;
  out.seed = seed;
  out.values.resize(n * s);
  for (std::size_t k = 0; k < n * s; ++k) out.values[k] = bits_to_unit(hash64(seed, offset + k));
  return out;
}

}  // namespace dcop::qmc
