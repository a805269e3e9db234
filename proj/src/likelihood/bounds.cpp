#include <algorithm>
#include <string>

#include "dcop/error.hpp"
#include "dcop/likelihood.hpp"

namespace dcop::lik {

bool ObservationBounds::all_discrete() const {
  return std::all_of(discrete.begin(), discrete.end(), [](std::uint8_t d) { return d != 0; });
}

ObservationBounds bounds_from_data(std::span<const double> x, std::span<const Marginal> margins) {
  if (x.size() != margins.size()) throw DataError("observation has " + std::to_string(x.size()) + " values for " +
                                                  std::to_string(margins.size()) + " margins");
  ObservationBounds out;
  const std::size_t J = x.size();
  out.lower.resize(J);
  out.upper.resize(J);
  out.log_density.assign(J, 0.0);
  out.discrete.resize(J);
  for (std::size_t j = 0; j < J; ++j) {
    const Marginal& m = margins[j];
    if (m.discrete()) {
      const auto [a, b] = m.interval(x[j]);
      if (!(b > a)) throw DataError("value in column " + std::to_string(j) + " has zero probability");
      out.lower[j] = a;
      out.upper[j] = b;
      out.discrete[j] = 1;
    } else {
      const double u = m.cdf(x[j]);
      if (!(u > 0.0 && u < 1.0)) throw DataError("continuous margin " + std::to_string(j) + " maps a value to the boundary");
      out.lower[j] = out.upper[j] = u;
      out.log_density[j] = m.log_pdf(x[j]);
      out.discrete[j] = 0;
    }
  }
  return out;
}

}  // namespace dcop::lik
